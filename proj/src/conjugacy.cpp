#include "anosov/conjugacy.hpp"

#include <cmath>
#include <numeric>
#include <random>

#include <json.hpp>

namespace anosov {

ConjugacyMap::ConjugacyMap(GridField ux, GridField uy, double residual, int sweeps)
    : ux_(std::move(ux)), uy_(std::move(uy)), residual_(residual), sweeps_(sweeps) {}

double ConjugacyMap::displacement_sup() const {
    double m = 0.0;
    for (int i = 0; i < ux_.N(); ++i)
        for (int j = 0; j < ux_.N(); ++j)
            m = std::max(m, Vec2{ux_.at(i, j), uy_.at(i, j)}.norm());
    return m;
}

void ConjugacyMap::save(const std::string& path_prefix) const {
    ux_.save(path_prefix + "_ux.bin");
    uy_.save(path_prefix + "_uy.bin");
}

ConjugacyMap ConjugacyMap::load(const std::string& path_prefix) {
    ConjugacyMap h;
    h.ux_ = GridField::load(path_prefix + "_ux.bin");
    h.uy_ = GridField::load(path_prefix + "_uy.bin");
    return h;
}

ConjugacyMap base_conjugacy(const ToralEndomorphism& f, const ConjugacyOptions& opts) {
    const int N = opts.N;
    const IMat2& A = f.linear_part();
    if (std::gcd(std::int64_t(N), std::llabs(A.det())) != 1)
        throw ModelError("conjugacy lattice size must be coprime to det A");
    const Mat2 Areal = A.real();

    // lattice action of A (bijective since gcd(det A, N) = 1)
    std::vector<int> permA(size_t(N) * size_t(N));
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
            std::int64_t pi = ((A.a * i + A.b * j) % N + N) % N;
            std::int64_t pj = ((A.c * i + A.d * j) % N + N) % N;
            permA[size_t(i) * size_t(N) + size_t(j)] = int(pi) * N + int(pj);
        }

    std::vector<Vec2> u(size_t(N) * size_t(N));
    if (opts.init_amplitude > 0.0) {
        std::mt19937_64 rng(opts.init_seed);
        std::uniform_real_distribution<double> amp(-opts.init_amplitude, opts.init_amplitude);
        for (auto& v : u) v = {amp(rng), amp(rng)};
    }

    const Vec2 eu = f.eigen().e_u;
    const Vec2 es = f.eigen().e_s;
    const Mat2 basis{eu.x, es.x, eu.y, es.y};
    const Mat2 basis_inv = basis.inverse();

    std::vector<Vec2> cand_u(u.size()), cand_s(u.size());
    int sweep = 0;
    double update = 1e300;
    for (; sweep < opts.max_sweeps; ++sweep) {
        // unstable candidate: u'(x) = fbar^{-1}(A x + u(Ax)) - x
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j) {
                std::size_t k = size_t(i) * size_t(N) + size_t(j);
                Vec2 x{i / double(N), j / double(N)};
                Vec2 Ax = Areal * x;
                Vec2 target = Ax + u[size_t(permA[k])];
                Vec2 w = f.invert_lift(target, x + u[k]);
                cand_u[k] = w - x;
            }
        // stable candidate: u'(A y) = fbar(y + u(y)) - A y, written at A y
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j) {
                std::size_t k = size_t(i) * size_t(N) + size_t(j);
                Vec2 y{i / double(N), j / double(N)};
                Vec2 w = f.lift_apply(y + u[k]) - Areal * y;
                cand_s[size_t(permA[k])] = w;
            }
        update = 0.0;
        for (std::size_t k = 0; k < u.size(); ++k) {
            Vec2 cu = basis_inv * cand_u[k];
            Vec2 cs = basis_inv * cand_s[k];
            Vec2 unew = basis * Vec2{cu.x, cs.y};
            update = std::max(update, (unew - u[k]).norm_inf());
            u[k] = unew;
        }
        if (update < opts.tol) break;
    }
    if (update >= opts.tol)
        throw NoConvergence("conjugacy sweeps did not reach tolerance after " +
                            std::to_string(opts.max_sweeps) + " sweeps");

    GridField ux(N), uy(N);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
            ux.at(i, j) = u[size_t(i) * size_t(N) + size_t(j)].x;
            uy.at(i, j) = u[size_t(i) * size_t(N) + size_t(j)].y;
        }
    int F = std::min(opts.fit_F, (N - 1) / 2);
    ux.fit_trig(F);
    uy.fit_trig(F);

    ConjugacyMap h(std::move(ux), std::move(uy), 0.0, sweep + 1);

    // defining-equation residual d(h(Ax), f(h(x))) on the check grid
    double resid = 0.0;
    const int M = opts.residual_grid;
    for (int i = 0; i < M; ++i)
        for (int j = 0; j < M; ++j) {
            TorusPoint x{i / double(M), j / double(M)};
            TorusPoint hx = h.apply(x);
            TorusPoint hAx = h.apply(project(Areal * x.lift()));
            resid = std::max(resid, torus_dist(hAx, f.apply(hx)));
        }
    return ConjugacyMap(h.ux(), h.uy(), resid, sweep + 1);
}

// ---------------------------------------------------------------------------

LeafMap leaf_ode_conjugacy(const ToralEndomorphism& f, const GridField& phi_u,
                           const DirectionField& unstable, const TorusPoint& b0,
                           const TorusPoint& b1, double theta_len, int samples) {
    LeafHit hit = trace_leaf_to(f, unstable, b0, b1, 4.0 * std::fabs(theta_len) + 2.0);
    if (hit.s_b <= 0.0)
        throw AnchorMismatch("second anchor sits behind the first on the traced leaf");

    // kappa: d^u with density e^{-(phi_u + kappa)} gives the interval d^u-length
    // theta_len
    double raw = conformal_length(hit.segment, phi_u, 0.0, hit.s_b);
    double kappa = std::log(raw / theta_len);

    // z' = e^{phi_u(z) + kappa}, z(0) = 0, integrated in the leaf arclength
    LeafMap out;
    out.leaf = hit.segment;
    out.kappa = kappa;
    const int n = samples;
    const double dtheta = theta_len / n;
    auto speed = [&](double z) {
        return std::exp(phi_u.sample_lift(out.leaf.lift_at(z)) + kappa);
    };
    double z = 0.0;
    out.thetas.push_back(0.0);
    out.arcs.push_back(0.0);
    out.points.push_back(project(out.leaf.lift_at(0.0)));
    const int sub = 4; // RK4 substeps per sample
    for (int i = 0; i < n; ++i) {
        for (int r = 0; r < sub; ++r) {
            double h = dtheta / sub;
            double k1 = speed(z);
            double k2 = speed(z + 0.5 * h * k1);
            double k3 = speed(z + 0.5 * h * k2);
            double k4 = speed(z + h * k3);
            z += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
        }
        out.thetas.push_back((i + 1) * dtheta);
        out.arcs.push_back(z);
        out.points.push_back(project(out.leaf.lift_at(z)));
    }
    out.anchor_miss = std::fabs(z - hit.s_b);
    if (out.anchor_miss > 1e-4)
        throw AnchorMismatch("leaf ODE endpoint misses the anchor by " +
                             std::to_string(out.anchor_miss));
    return out;
}

DensityMap density_ratio_conjugacy(const LeafDensity& rho_src, const LeafDensity& rho_dst,
                                   int samples) {
    DensityMap out;
    const double t0 = rho_src.segment.s.front(), t1 = rho_src.segment.s.back();
    const double x0 = rho_dst.segment.s.front(), x1 = rho_dst.segment.s.back();
    const double dt = (t1 - t0) / samples;
    double x = x0;
    out.t.push_back(t0);
    out.x.push_back(x0);
    out.points.push_back(project(rho_dst.segment.lift_at(x0)));

    auto slope = [&](double t, double xx) {
        double denom = rho_dst.value_at(std::clamp(xx, x0, x1));
        return rho_src.value_at(t) / std::max(denom, 1e-12);
    };
    const int sub = 4;
    for (int i = 0; i < samples; ++i) {
        double t = t0 + i * dt;
        for (int r = 0; r < sub; ++r) {
            double h = dt / sub;
            double tt = t + r * h;
            double k1 = slope(tt, x);
            double k2 = slope(tt + 0.5 * h, x + 0.5 * h * k1);
            double k3 = slope(tt + 0.5 * h, x + 0.5 * h * k2);
            double k4 = slope(tt + h, x + h * k3);
            x += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
        }
        out.t.push_back(t + dt);
        out.x.push_back(x);
        out.points.push_back(project(rho_dst.segment.lift_at(std::clamp(x, x0, x1))));
    }
    out.anchor_miss = std::fabs(x - x1);

    // mass transport check at the sample points
    auto cumulative = [](const LeafDensity& rho, double upto) {
        double acc = 0.0;
        const auto& s = rho.segment.s;
        for (std::size_t i = 0; i + 1 < s.size(); ++i) {
            double a = s[i], b = std::min(s[i + 1], upto);
            if (b <= a) break;
            double va = rho.values[i];
            double vb = rho.value_at(b);
            acc += 0.5 * (va + vb) * (b - a);
        }
        return acc;
    };
    double defect = 0.0;
    for (std::size_t i = 0; i < out.t.size(); i += std::max<std::size_t>(out.t.size() / 20, 1)) {
        double lhs = cumulative(rho_src, out.t[i]);
        double rhs = cumulative(rho_dst, out.x[i]);
        defect = std::max(defect, std::fabs(lhs - rhs));
    }
    out.transport_defect = defect;
    return out;
}

// ---------------------------------------------------------------------------

RegularityEstimate regularity_estimate(const ConjugacyMap& h, const ToralEndomorphism& f,
                                       DirectionField::Flag flag, int probes,
                                       std::uint64_t seed) {
    RegularityEstimate est;
    const Vec2 dir =
        (flag == DirectionField::Flag::Unstable) ? f.eigen().e_u : f.eigen().e_s;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<Vec2> anchors(static_cast<std::size_t>(probes));
    for (auto& a : anchors) a = {unif(rng), unif(rng)};

    for (int e = 3; e <= 10; ++e) {
        double d = std::pow(2.0, -e);
        double mean = 0.0;
        for (const Vec2& a : anchors) {
            Vec2 hi = h.apply_lift(a + dir * d);
            Vec2 lo = h.apply_lift(a - dir * d);
            // displacement field is periodic; the identity part carries 2d
            mean += (hi - lo).norm() / (2.0 * d);
        }
        est.scales.push_back(d);
        est.quotients.push_back(mean / probes);
    }
    est.derivative = est.quotients.back();

    // successive gaps ~ C * delta^alpha
    std::vector<double> lx, ly;
    bool all_tiny = true;
    for (std::size_t k = 0; k + 1 < est.quotients.size(); ++k) {
        double gap = std::fabs(est.quotients[k] - est.quotients[k + 1]);
        if (gap > 1e-10) all_tiny = false;
        if (gap > 1e-14) {
            lx.push_back(std::log(est.scales[k]));
            ly.push_back(std::log(gap));
        }
    }
    est.degenerate = all_tiny;
    if (!est.degenerate && lx.size() >= 3) {
        double n = double(lx.size());
        double sx = std::accumulate(lx.begin(), lx.end(), 0.0);
        double sy = std::accumulate(ly.begin(), ly.end(), 0.0);
        double sxx = 0, sxy = 0, syy = 0;
        for (std::size_t i = 0; i < lx.size(); ++i) {
            sxx += lx[i] * lx[i];
            sxy += lx[i] * ly[i];
            syy += ly[i] * ly[i];
        }
        double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        est.holder_exponent = slope;
        double denom = (n * sxx - sx * sx) * (n * syy - sy * sy);
        est.r2 = denom > 0 ? (n * sxy - sx * sy) * (n * sxy - sx * sy) / denom : 0.0;
        est.non_c1 = slope < 0.05 || est.r2 < 0.9;
    } else if (!est.degenerate) {
        est.non_c1 = true;
    }
    return est;
}

std::string RegularityEstimate::to_json() const {
    nlohmann::json j;
    j["scales"] = scales;
    j["quotients"] = quotients;
    j["derivative"] = derivative;
    j["holder_exponent"] = holder_exponent;
    j["r2"] = r2;
    j["degenerate"] = degenerate;
    j["non_c1"] = non_c1;
    return j.dump(2);
}

} // namespace anosov
