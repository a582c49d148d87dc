#include "anosov/grid_field.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace anosov {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;

// powers[k] = z^k for k = 0..F
inline void fill_powers(std::complex<double>* powers, std::complex<double> z, int F) {
    powers[0] = {1.0, 0.0};
    for (int k = 1; k <= F; ++k) powers[k] = powers[k - 1] * z;
}
} // namespace

double TrigScalar::eval(const Vec2& x) const {
    const int F = F_;
    std::complex<double> p1[129], p2[129];
    fill_powers(p1, std::polar(1.0, kTwoPi * x.x), F);
    fill_powers(p2, std::polar(1.0, kTwoPi * x.y), F);
    std::complex<double> total{0.0, 0.0};
    for (int m1 = -F; m1 <= F; ++m1) {
        std::complex<double> e1 = m1 >= 0 ? p1[m1] : std::conj(p1[-m1]);
        std::complex<double> row{0.0, 0.0};
        const std::complex<double>* c = &c_[idx(m1, -F)];
        for (int m2 = -F; m2 <= F; ++m2) {
            std::complex<double> e2 = m2 >= 0 ? p2[m2] : std::conj(p2[-m2]);
            row += c[m2 + F] * e2;
        }
        total += row * e1;
    }
    return total.real();
}

Vec2 TrigScalar::gradient(const Vec2& x) const {
    const int F = F_;
    std::complex<double> p1[129], p2[129];
    fill_powers(p1, std::polar(1.0, kTwoPi * x.x), F);
    fill_powers(p2, std::polar(1.0, kTwoPi * x.y), F);
    std::complex<double> gx{0.0, 0.0}, gy{0.0, 0.0};
    for (int m1 = -F; m1 <= F; ++m1) {
        std::complex<double> e1 = m1 >= 0 ? p1[m1] : std::conj(p1[-m1]);
        for (int m2 = -F; m2 <= F; ++m2) {
            std::complex<double> e2 = m2 >= 0 ? p2[m2] : std::conj(p2[-m2]);
            std::complex<double> term = c_[idx(m1, m2)] * e1 * e2;
            std::complex<double> im{0.0, kTwoPi};
            gx += term * im * double(m1);
            gy += term * im * double(m2);
        }
    }
    return {gx.real(), gy.real()};
}

void TrigScalar::symmetrize() {
    const int F = F_;
    for (int m1 = -F; m1 <= F; ++m1)
        for (int m2 = -F; m2 <= F; ++m2) {
            if (m1 < 0 || (m1 == 0 && m2 < 0)) continue;
            auto avg = 0.5 * (c_[idx(m1, m2)] + std::conj(c_[idx(-m1, -m2)]));
            c_[idx(m1, m2)] = avg;
            c_[idx(-m1, -m2)] = std::conj(avg);
        }
    c_[idx(0, 0)] = {c_[idx(0, 0)].real(), 0.0};
}

TrigScalar TrigScalar::fit_grid(const std::vector<double>& v, int N, int F) {
    TrigScalar out(F);
    const int W = 2 * F + 1;
    // twiddle table: tw[t] = exp(-2 pi i t / N)
    std::vector<std::complex<double>> tw(static_cast<std::size_t>(N));
    for (int t = 0; t < N; ++t) tw[size_t(t)] = std::polar(1.0, -kTwoPi * t / N);

    // stage 1: S[i][m2] = sum_j v[i][j] tw[(m2*j) mod N]
    std::vector<std::complex<double>> S(size_t(N) * size_t(W));
    for (int i = 0; i < N; ++i) {
        const double* row = &v[size_t(i) * size_t(N)];
        for (int m2 = -F; m2 <= F; ++m2) {
            std::complex<double> acc{0.0, 0.0};
            std::int64_t mm = ((m2 % N) + N) % N;
            std::int64_t t = 0;
            for (int j = 0; j < N; ++j) {
                acc += row[j] * tw[size_t(t)];
                t += mm;
                if (t >= N) t -= N;
            }
            S[size_t(i) * size_t(W) + size_t(m2 + F)] = acc;
        }
    }
    // stage 2: c[m1][m2] = (1/N^2) sum_i S[i][m2] tw[(m1*i) mod N]
    const double scale = 1.0 / (double(N) * double(N));
    for (int m1 = -F; m1 <= F; ++m1) {
        std::int64_t mm = ((m1 % N) + N) % N;
        for (int m2 = -F; m2 <= F; ++m2) {
            std::complex<double> acc{0.0, 0.0};
            std::int64_t t = 0;
            for (int i = 0; i < N; ++i) {
                acc += S[size_t(i) * size_t(W) + size_t(m2 + F)] * tw[size_t(t)];
                t += mm;
                if (t >= N) t -= N;
            }
            out.c_[out.idx(m1, m2)] = acc * scale;
        }
    }
    out.symmetrize();
    return out;
}

std::vector<double> TrigScalar::evaluate_grid(int N) const {
    const int F = F_, W = 2 * F + 1;
    std::vector<std::complex<double>> tw(static_cast<std::size_t>(N));
    for (int t = 0; t < N; ++t) tw[size_t(t)] = std::polar(1.0, kTwoPi * t / N);

    // stage 1: T[m1][j] = sum_m2 c[m1][m2] tw[(m2*j) mod N]
    std::vector<std::complex<double>> T(size_t(W) * size_t(N));
    for (int m1 = -F; m1 <= F; ++m1) {
        for (int j = 0; j < N; ++j) {
            std::complex<double> acc{0.0, 0.0};
            for (int m2 = -F; m2 <= F; ++m2) {
                std::int64_t t = (std::int64_t(((m2 % N) + N) % N) * j) % N;
                acc += c_[idx(m1, m2)] * tw[size_t(t)];
            }
            T[size_t(m1 + F) * size_t(N) + size_t(j)] = acc;
        }
    }
    std::vector<double> out(size_t(N) * size_t(N));
    for (int i = 0; i < N; ++i) {
        for (int j = 0; j < N; ++j) {
            std::complex<double> acc{0.0, 0.0};
            for (int m1 = -F; m1 <= F; ++m1) {
                std::int64_t t = (std::int64_t(((m1 % N) + N) % N) * i) % N;
                acc += T[size_t(m1 + F) * size_t(N) + size_t(j)] * tw[size_t(t)];
            }
            out[size_t(i) * size_t(N) + size_t(j)] = acc.real();
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

GridField::GridField(int N, std::vector<double> values) : N_(N), v_(std::move(values)) {
    if (v_.size() != size_t(N) * size_t(N))
        throw ModelError("grid field size mismatch");
}

double GridField::sample_lift(const Vec2& u) const {
    if (coeffs_) return coeffs_->eval(u);
    return bicubic(u);
}

double GridField::mean() const {
    double s = 0.0;
    for (double x : v_) s += x;
    return s / double(v_.size());
}

void GridField::shift(double constant) {
    for (double& x : v_) x += constant;
    if (coeffs_) coeffs_->set_mean(coeffs_->mean() + constant);
}

void GridField::fit_trig(int F) { coeffs_ = TrigScalar::fit_grid(v_, N_, F); }

double GridField::bicubic(const Vec2& u) const {
    // periodic Catmull-Rom
    double fx = wrap01(u.x) * N_;
    double fy = wrap01(u.y) * N_;
    int i0 = int(std::floor(fx)), j0 = int(std::floor(fy));
    double tx = fx - i0, ty = fy - j0;

    auto w = [](double t, double* c) {
        c[0] = 0.5 * (-t * t * t + 2 * t * t - t);
        c[1] = 0.5 * (3 * t * t * t - 5 * t * t + 2);
        c[2] = 0.5 * (-3 * t * t * t + 4 * t * t + t);
        c[3] = 0.5 * (t * t * t - t * t);
    };
    double wx[4], wy[4];
    w(tx, wx);
    w(ty, wy);

    double r = 0.0;
    for (int di = -1; di <= 2; ++di) {
        int i = ((i0 + di) % N_ + N_) % N_;
        double rowacc = 0.0;
        for (int dj = -1; dj <= 2; ++dj) {
            int j = ((j0 + dj) % N_ + N_) % N_;
            rowacc += wy[dj + 1] * at(i, j);
        }
        r += wx[di + 1] * rowacc;
    }
    return r;
}

void GridField::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ModelError("cannot write field file: " + path);
    int F = coeffs_ ? coeffs_->F() : -1;
    std::size_t ncoeff = coeffs_ ? coeffs_->coeffs().size() : 0;
    std::ostringstream head;
    head.precision(17);
    head << "anosov-gridfield v1\n"
         << "N " << N_ << " F " << F << " mean " << mean() << " ncoeff " << ncoeff << "\n";
    out << head.str();
    out.write(reinterpret_cast<const char*>(v_.data()),
              std::streamsize(v_.size() * sizeof(double)));
    if (coeffs_)
        out.write(reinterpret_cast<const char*>(coeffs_->coeffs().data()),
                  std::streamsize(ncoeff * sizeof(std::complex<double>)));
}

GridField GridField::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ModelError("cannot open field file: " + path);
    std::string magic, line;
    std::getline(in, magic);
    if (magic != "anosov-gridfield v1")
        throw ModelError("bad field file header: " + path);
    std::getline(in, line);
    std::istringstream hs(line);
    std::string kN, kF, kMean, kNc;
    int N = 0, F = -1;
    double mean = 0.0;
    std::size_t ncoeff = 0;
    hs >> kN >> N >> kF >> F >> kMean >> mean >> kNc >> ncoeff;
    if (kN != "N" || kF != "F" || N <= 0)
        throw ModelError("bad field file header fields: " + path);
    GridField g(N);
    in.read(reinterpret_cast<char*>(g.v_.data()),
            std::streamsize(g.v_.size() * sizeof(double)));
    if (F >= 0) {
        TrigScalar c(F);
        if (c.coeffs().size() != ncoeff)
            throw ModelError("coefficient count mismatch in field file");
        in.read(reinterpret_cast<char*>(c.coeffs().data()),
                std::streamsize(ncoeff * sizeof(std::complex<double>)));
        g.coeffs_ = std::move(c);
    }
    if (!in) throw ModelError("truncated field file: " + path);
    return g;
}

} // namespace anosov
