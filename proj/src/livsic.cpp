#include "anosov/livsic.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace anosov {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;

struct Cplx {
    double re{0.0}, im{0.0};
};
inline Cplx cmul(const Cplx& a, const Cplx& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}
inline Cplx cconj(const Cplx& a) { return {a.re, -a.im}; }

} // namespace

// ---- leaf tracing -----------------------------------------------------------

Vec2 LeafSegment::lift_at(double t) const {
    if (s.size() < 2) return lift_pts.empty() ? Vec2{} : lift_pts.front();
    auto it = std::upper_bound(s.begin(), s.end(), t);
    std::size_t i = (it == s.begin()) ? 0 : std::size_t(it - s.begin()) - 1;
    if (i >= s.size() - 1) i = s.size() - 2;
    double h = s[i + 1] - s[i];
    double u = (t - s[i]) / h;
    double u2 = u * u, u3 = u2 * u;
    double h00 = 2 * u3 - 3 * u2 + 1, h10 = u3 - 2 * u2 + u;
    double h01 = -2 * u3 + 3 * u2, h11 = u3 - u2;
    return lift_pts[i] * h00 + tangents[i] * (h10 * h) + lift_pts[i + 1] * h01 +
           tangents[i + 1] * (h11 * h);
}

Vec2 LeafSegment::tangent_at(double t) const {
    if (s.size() < 2) return tangents.empty() ? Vec2{} : tangents.front();
    auto it = std::upper_bound(s.begin(), s.end(), t);
    std::size_t i = (it == s.begin()) ? 0 : std::size_t(it - s.begin()) - 1;
    if (i >= s.size() - 1) i = s.size() - 2;
    double h = s[i + 1] - s[i];
    double u = (t - s[i]) / h;
    return (tangents[i] * (1.0 - u) + tangents[i + 1] * u).normalized();
}

namespace {

inline Vec2 rk4_step(const DirectionField& field, const Vec2& u, double h) {
    Vec2 k1 = field.at_lift(u);
    Vec2 k2 = field.at_lift(u + k1 * (h / 2));
    Vec2 k3 = field.at_lift(u + k2 * (h / 2));
    Vec2 k4 = field.at_lift(u + k3 * h);
    return u + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
}

} // namespace

LeafSegment trace_leaf(const ToralEndomorphism& /*f*/, const DirectionField& field,
                       const TorusPoint& start, double length, double step) {
    LeafSegment seg;
    seg.base = start;
    seg.flag = field.flag();
    seg.step = step;
    double sign = length >= 0 ? 1.0 : -1.0;
    double total = std::fabs(length);
    int nsteps = int(std::ceil(total / step));
    Vec2 u = start.lift();
    seg.s.push_back(0.0);
    seg.lift_pts.push_back(u);
    seg.tangents.push_back(field.at_lift(u) * sign);
    double s = 0.0;
    for (int i = 0; i < nsteps; ++i) {
        double h = std::min(step, total - s);
        u = rk4_step(field, u, sign * h);
        s += h;
        seg.s.push_back(sign * s);
        seg.lift_pts.push_back(u);
        seg.tangents.push_back(field.at_lift(u) * sign);
    }
    if (sign < 0) {
        std::reverse(seg.s.begin(), seg.s.end());
        std::reverse(seg.lift_pts.begin(), seg.lift_pts.end());
        std::reverse(seg.tangents.begin(), seg.tangents.end());
        for (Vec2& t : seg.tangents) t = -t;
    }
    return seg;
}

LeafSegment trace_leaf_window(const ToralEndomorphism& f, const DirectionField& field,
                              const TorusPoint& center, double half_length, double step) {
    LeafSegment neg = trace_leaf(f, field, center, -half_length, step);
    LeafSegment pos = trace_leaf(f, field, center, +half_length, step);
    LeafSegment w = std::move(neg);
    for (std::size_t k = 1; k < pos.s.size(); ++k) {
        w.s.push_back(pos.s[k]);
        w.lift_pts.push_back(pos.lift_pts[k]);
        w.tangents.push_back(pos.tangents[k]);
    }
    return w;
}

namespace {

// Walk from `a` in one orientation, trying to land on b. Returns the arclength
// of the hit if successful.
std::optional<double> walk_to(const DirectionField& field, const TorusPoint& a,
                              const TorusPoint& b, double sign, double max_length, double step,
                              LeafSegment* out) {
    LeafSegment seg;
    seg.base = a;
    seg.flag = field.flag();
    seg.step = step;
    Vec2 u = a.lift();
    seg.s.push_back(0.0);
    seg.lift_pts.push_back(u);
    seg.tangents.push_back(field.at_lift(u) * sign);
    double s = 0.0;

    auto try_refine = [&](Vec2 v, double sv) -> std::optional<double> {
        for (int it = 0; it < 40; ++it) {
            TorusPoint pv = project(v);
            Vec2 disp{wrap_half(b.x - pv.x), wrap_half(b.y - pv.y)};
            Vec2 t = field.at_lift(v) * sign;
            double ds = disp.dot(t);
            if (std::fabs(ds) < 1e-13) {
                double transversal = (disp - t * ds).norm();
                if (transversal < 1e-8) {
                    // keep the node list strictly increasing in s
                    while (seg.s.size() > 1 && seg.s.back() >= sv - 1e-12) {
                        seg.s.pop_back();
                        seg.lift_pts.pop_back();
                        seg.tangents.pop_back();
                    }
                    if (sv > seg.s.back() + 1e-12) {
                        seg.s.push_back(sv);
                        seg.lift_pts.push_back(v);
                        seg.tangents.push_back(t);
                    } else {
                        seg.s.back() = sv;
                        seg.lift_pts.back() = v;
                        seg.tangents.back() = t;
                    }
                    *out = seg;
                    return sv * sign;
                }
                return std::nullopt;
            }
            v = rk4_step(field, v, sign * ds);
            sv += ds;
        }
        return std::nullopt;
    };

    while (s < max_length) {
        TorusPoint pu = project(u);
        double d = torus_dist(pu, b);
        if (d < 1.5 * step) {
            if (auto hit = try_refine(u, s)) return hit;
        }
        u = rk4_step(field, u, sign * step);
        s += step;
        seg.s.push_back(s);
        seg.lift_pts.push_back(u);
        seg.tangents.push_back(field.at_lift(u) * sign);
    }
    return std::nullopt;
}

} // namespace

LeafHit trace_leaf_to(const ToralEndomorphism& /*f*/, const DirectionField& field,
                      const TorusPoint& a, const TorusPoint& b, double max_length, double step) {
    LeafSegment seg;
    if (auto s = walk_to(field, a, b, +1.0, max_length, step, &seg)) {
        return {std::move(seg), *s};
    }
    if (auto s = walk_to(field, a, b, -1.0, max_length, step, &seg)) {
        // re-orient: s becomes negative toward the far end, tangents flip back
        // to the +field orientation
        for (double& t : seg.s) t = -t;
        for (Vec2& t : seg.tangents) t = -t;
        std::reverse(seg.s.begin(), seg.s.end());
        std::reverse(seg.lift_pts.begin(), seg.lift_pts.end());
        std::reverse(seg.tangents.begin(), seg.tangents.end());
        return {std::move(seg), *s};
    }
    throw LeafTraceFailure("target point not found on the traced leaf within max length");
}

// ---- observable -------------------------------------------------------------

ObservableResult observable_log_unstable(const ToralEndomorphism& f,
                                         const DirectionField& unstable, int N,
                                         int orbit_periods) {
    auto orbits1 = find_periodic(f, 1);
    if (orbits1.empty()) throw ModelError("no fixed point found for the reference exponent");
    const double lambda_u = orbits1.front().lambda_u;

    GridField psi(N);
    const bool same_grid = (unstable.N() == N);
    for (int i = 0; i < N; ++i) {
        for (int j = 0; j < N; ++j) {
            TorusPoint p{i / double(N), j / double(N)};
            Vec2 e;
            if (same_grid)
                e = unit_from_angle(unstable.base_angle() + unstable.offsets().at(i, j));
            else
                e = unstable.at(p);
            psi.at(i, j) = std::log((f.jacobian(p) * e).norm()) - lambda_u;
        }
    }

    double worst = 0.0;
    for (int n = 1; n <= orbit_periods; ++n) {
        for (const auto& orb : find_periodic(f, n)) {
            if (orb.period != n) continue;
            double mean = 0.0;
            for (const auto& p : orb.points) {
                Vec2 e = unstable.at(p);
                mean += std::log((f.jacobian(p) * e).norm()) - lambda_u;
            }
            mean /= orb.period;
            worst = std::max(worst, std::fabs(mean));
        }
    }
    if (worst > 1e-4)
        throw ObstructionNonzero("periodic orbit average of the observable reaches " +
                                 std::to_string(worst));
    ObservableResult out{std::move(psi), lambda_u, worst};
    return out;
}

// ---- cohomology least squares ----------------------------------------------

namespace {

// Coefficient matrices are stored as raw re/im arrays of size (2F+1)^2 with
// index (m1+F)*(2F+1)+(m2+F), Hermitian symmetry maintained explicitly.
struct CoeffVec {
    int F{0};
    std::vector<double> re, im;

    explicit CoeffVec(int F_) : F(F_) {
        std::size_t n = std::size_t(2 * F + 1) * std::size_t(2 * F + 1);
        re.assign(n, 0.0);
        im.assign(n, 0.0);
    }
    std::size_t idx(int m1, int m2) const {
        return std::size_t(m1 + F) * std::size_t(2 * F + 1) + std::size_t(m2 + F);
    }
    void project() { // Hermitian + mean zero
        for (int m1 = 0; m1 <= F; ++m1)
            for (int m2 = -F; m2 <= F; ++m2) {
                if (m1 == 0 && m2 < 0) continue;
                std::size_t a = idx(m1, m2), b = idx(-m1, -m2);
                double r = 0.5 * (re[a] + re[b]);
                double i = 0.5 * (im[a] - im[b]);
                re[a] = r; im[a] = i;
                re[b] = r; im[b] = -i;
            }
        re[idx(0, 0)] = 0.0;
        im[idx(0, 0)] = 0.0;
    }
};

inline double rdot(const CoeffVec& a, const CoeffVec& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.re.size(); ++k) s += a.re[k] * b.re[k] + a.im[k] * b.im[k];
    return s;
}

struct PointTable {
    std::vector<Cplx> base1, base2; // exp(2 pi i y1), exp(2 pi i y2) per point
    std::size_t size() const { return base1.size(); }
};

PointTable make_point_table(const std::vector<Vec2>& pts) {
    PointTable t;
    t.base1.resize(pts.size());
    t.base2.resize(pts.size());
    for (std::size_t g = 0; g < pts.size(); ++g) {
        t.base1[g] = {std::cos(kTwoPi * pts[g].x), std::sin(kTwoPi * pts[g].x)};
        t.base2[g] = {std::cos(kTwoPi * pts[g].y), std::sin(kTwoPi * pts[g].y)};
    }
    return t;
}

// phi(y_g) for every tabulated point (Hermitian half-sum).
void eval_points(const CoeffVec& c, const PointTable& t, std::vector<double>& out) {
    const int F = c.F;
    const int W = 2 * F + 1;
    out.resize(t.size());
    std::vector<Cplx> P1(size_t(F + 1)), P2(size_t(F + 1));
    for (std::size_t g = 0; g < t.size(); ++g) {
        P1[0] = {1.0, 0.0};
        P2[0] = {1.0, 0.0};
        for (int k = 1; k <= F; ++k) {
            P1[size_t(k)] = cmul(P1[size_t(k - 1)], t.base1[g]);
            P2[size_t(k)] = cmul(P2[size_t(k - 1)], t.base2[g]);
        }
        double acc_re = 0.0, acc_im = 0.0;
        for (int m1 = 1; m1 <= F; ++m1) {
            const double* cr = &c.re[c.idx(m1, -F)];
            const double* ci = &c.im[c.idx(m1, -F)];
            double row_re = 0.0, row_im = 0.0;
            // m2 < 0 uses conj(P2[-m2])
            for (int m2 = -F; m2 < 0; ++m2) {
                const Cplx& e = P2[size_t(-m2)];
                double er = e.re, ei = -e.im;
                row_re += cr[m2 + F] * er - ci[m2 + F] * ei;
                row_im += cr[m2 + F] * ei + ci[m2 + F] * er;
            }
            for (int m2 = 0; m2 <= F; ++m2) {
                const Cplx& e = P2[size_t(m2)];
                row_re += cr[m2 + F] * e.re - ci[m2 + F] * e.im;
                row_im += cr[m2 + F] * e.im + ci[m2 + F] * e.re;
            }
            const Cplx& e1 = P1[size_t(m1)];
            acc_re += row_re * e1.re - row_im * e1.im;
            acc_im += row_re * e1.im + row_im * e1.re;
        }
        // m1 = 0 row, m2 >= 1
        {
            const double* cr = &c.re[c.idx(0, -F)];
            const double* ci = &c.im[c.idx(0, -F)];
            for (int m2 = 1; m2 <= F; ++m2) {
                const Cplx& e = P2[size_t(m2)];
                acc_re += cr[m2 + F] * e.re - ci[m2 + F] * e.im;
                acc_im += cr[m2 + F] * e.im + ci[m2 + F] * e.re;
            }
        }
        (void)W;
        out[g] = c.re[c.idx(0, 0)] + 2.0 * acc_re;
    }
}

// G_m += sum_g w_g conj(e_m(y_g)); fills the upper half then mirrors.
void accumulate_points(const PointTable& t, const std::vector<double>& w, CoeffVec& g) {
    const int F = g.F;
    std::vector<Cplx> Q1(size_t(F + 1)), Q2(size_t(F + 1));
    for (std::size_t p = 0; p < t.size(); ++p) {
        const double wg = w[p];
        if (wg == 0.0) continue;
        Q1[0] = {1.0, 0.0};
        Q2[0] = {1.0, 0.0};
        Cplx b1 = cconj(t.base1[p]), b2 = cconj(t.base2[p]);
        for (int k = 1; k <= F; ++k) {
            Q1[size_t(k)] = cmul(Q1[size_t(k - 1)], b1);
            Q2[size_t(k)] = cmul(Q2[size_t(k - 1)], b2);
        }
        for (int m1 = 0; m1 <= F; ++m1) {
            Cplx f1{wg * Q1[size_t(m1)].re, wg * Q1[size_t(m1)].im};
            double* gr = &g.re[g.idx(m1, -F)];
            double* gi = &g.im[g.idx(m1, -F)];
            int m2lo = (m1 == 0) ? 0 : -F;
            for (int m2 = m2lo; m2 <= F; ++m2) {
                double er, ei;
                if (m2 >= 0) { er = Q2[size_t(m2)].re; ei = Q2[size_t(m2)].im; }
                else { er = Q2[size_t(-m2)].re; ei = -Q2[size_t(-m2)].im; }
                gr[m2 + F] += f1.re * er - f1.im * ei;
                gi[m2 + F] += f1.re * ei + f1.im * er;
            }
        }
    }
    // mirror to the lower half
    for (int m1 = 0; m1 <= F; ++m1)
        for (int m2 = -F; m2 <= F; ++m2) {
            if (m1 == 0 && m2 <= 0) continue;
            std::size_t a = g.idx(m1, m2), b = g.idx(-m1, -m2);
            g.re[b] = g.re[a];
            g.im[b] = -g.im[a];
        }
}

// Grid-uniform transforms reuse TrigScalar's separable DFT.
TrigScalar to_trig(const CoeffVec& c) {
    TrigScalar t(c.F);
    for (std::size_t k = 0; k < c.re.size(); ++k) t.coeffs()[k] = {c.re[k], c.im[k]};
    return t;
}
CoeffVec from_trig(const TrigScalar& t) {
    CoeffVec c(t.F());
    for (std::size_t k = 0; k < c.re.size(); ++k) {
        c.re[k] = t.coeffs()[k].real();
        c.im[k] = t.coeffs()[k].imag();
    }
    return c;
}

struct LsqWorkspace {
    int N;
    int F;
    PointTable warped; // f(x_g)
    std::vector<double> diag; // preconditioner
    std::vector<double> tmp_vals, tmp_grid;

    // r_g = phi(f x_g) - phi(x_g)
    void forward(const CoeffVec& c, std::vector<double>& r) {
        eval_points(c, warped, r);
        TrigScalar t = to_trig(c);
        std::vector<double> on_grid = t.evaluate_grid(N);
        for (std::size_t k = 0; k < r.size(); ++k) r[k] -= on_grid[k];
    }
    // g = Adj(r)
    CoeffVec adjoint(const std::vector<double>& r) {
        CoeffVec g(F);
        accumulate_points(warped, r, g);
        TrigScalar gridpart = TrigScalar::fit_grid(r, N, F); // (1/N^2) sum r e^{-2 pi i m x}
        const double scale = double(N) * double(N);
        for (std::size_t k = 0; k < g.re.size(); ++k) {
            g.re[k] -= gridpart.coeffs()[k].real() * scale;
            g.im[k] -= gridpart.coeffs()[k].imag() * scale;
        }
        g.project();
        return g;
    }
};

} // namespace

CohomologySolution solve_cohomology(const ToralEndomorphism& f, const GridField& psi, int F,
                                    double sup_residual_gate) {
    const int N = psi.N();
    std::vector<Vec2> warped_pts(size_t(N) * size_t(N));
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
            TorusPoint y = f.apply(TorusPoint{i / double(N), j / double(N)});
            warped_pts[size_t(i) * size_t(N) + size_t(j)] = {y.x, y.y};
        }

    std::vector<int> levels;
    for (int lv : {8, 16, 32}) {
        if (lv < F) levels.push_back(lv);
    }
    levels.push_back(F);

    CoeffVec c(levels.front());
    int total_iters = 0;

    auto run_level = [&](int lf, CoeffVec start, int max_iter) -> CoeffVec {
        LsqWorkspace ws;
        ws.N = N;
        ws.F = lf;
        ws.warped = make_point_table(warped_pts);

        // diagonal of the normal matrix: d_m = 2 N^2 - 2 Re S(m) with
        // S(m) = sum_g e^{2 pi i m (y_g - x_g)}
        {
            std::vector<Vec2> diffs(warped_pts.size());
            for (int i = 0; i < N; ++i)
                for (int j = 0; j < N; ++j) {
                    std::size_t k = size_t(i) * size_t(N) + size_t(j);
                    diffs[k] = {warped_pts[k].x - i / double(N), warped_pts[k].y - j / double(N)};
                }
            CoeffVec s(lf);
            accumulate_points(make_point_table(diffs), std::vector<double>(diffs.size(), 1.0), s);
            ws.diag.assign(s.re.size(), 0.0);
            const double n2 = 2.0 * double(N) * double(N);
            for (std::size_t k = 0; k < s.re.size(); ++k)
                ws.diag[k] = std::max(n2 - 2.0 * s.re[k], 1e-8 * n2); // conj(S) has same Re
        }

        const std::vector<double>& rhs_field = psi.values();
        std::vector<double> r_grid;

        CoeffVec x = std::move(start);
        // residual of the normal equations: b - A x
        std::vector<double> fx;
        ws.forward(x, fx);
        std::vector<double> resid(fx.size());
        for (std::size_t k = 0; k < fx.size(); ++k) resid[k] = rhs_field[k] - fx[k];
        CoeffVec r = ws.adjoint(resid);
        CoeffVec z(lf);
        auto precond = [&](const CoeffVec& in, CoeffVec& out) {
            for (std::size_t k = 0; k < in.re.size(); ++k) {
                out.re[k] = in.re[k] / ws.diag[k];
                out.im[k] = in.im[k] / ws.diag[k];
            }
        };
        precond(r, z);
        CoeffVec p = z;
        double rho = rdot(r, z);
        const double rho0 = std::max(rho, 1e-300);

        for (int it = 0; it < max_iter && rho > 1e-26 * rho0; ++it) {
            // q = A p = Adj(Forward(p))
            std::vector<double> fp;
            ws.forward(p, fp);
            CoeffVec q = ws.adjoint(fp);
            double denom = rdot(p, q);
            if (denom <= 0.0) break;
            double alpha = rho / denom;
            for (std::size_t k = 0; k < x.re.size(); ++k) {
                x.re[k] += alpha * p.re[k];
                x.im[k] += alpha * p.im[k];
            }
            for (std::size_t k = 0; k < fp.size(); ++k) resid[k] -= alpha * fp[k];
            r = ws.adjoint(resid);
            precond(r, z);
            double rho_new = rdot(r, z);
            double beta = rho_new / rho;
            rho = rho_new;
            for (std::size_t k = 0; k < p.re.size(); ++k) {
                p.re[k] = z.re[k] + beta * p.re[k];
                p.im[k] = z.im[k] + beta * p.im[k];
            }
            ++total_iters;
        }
        return x;
    };

    for (std::size_t li = 0; li < levels.size(); ++li) {
        int lf = levels[li];
        CoeffVec start(lf);
        // inject previous level coefficients
        for (int m1 = -c.F; m1 <= c.F; ++m1)
            for (int m2 = -c.F; m2 <= c.F; ++m2) {
                start.re[start.idx(m1, m2)] = c.re[c.idx(m1, m2)];
                start.im[start.idx(m1, m2)] = c.im[c.idx(m1, m2)];
            }
        int iters = lf <= 8 ? 240 : (lf <= 16 ? 120 : 60);
        c = run_level(lf, std::move(start), iters);
    }

    // final residual on the grid
    LsqWorkspace ws;
    ws.N = N;
    ws.F = F;
    ws.warped = make_point_table(warped_pts);
    std::vector<double> fx;
    ws.forward(c, fx);
    double sup = 0.0, rms = 0.0;
    for (std::size_t k = 0; k < fx.size(); ++k) {
        double r = fx[k] - psi.values()[k];
        sup = std::max(sup, std::fabs(r));
        rms += r * r;
    }
    rms = std::sqrt(rms / double(fx.size()));

    if (sup > sup_residual_gate)
        throw ResidualTooLarge("cohomology residual " + std::to_string(sup) +
                               " exceeds the gate " + std::to_string(sup_residual_gate));

    TrigScalar coeffs = to_trig(c);
    GridField phi(N, coeffs.evaluate_grid(N));
    phi.set_coeffs(std::move(coeffs));
    CohomologySolution out{std::move(phi), sup, rms, total_iters, F};
    return out;
}

// ---- conformal metric --------------------------------------------------------

double conformal_length(const LeafSegment& seg, const GridField& phi_u, double s0, double s1) {
    if (s1 < s0) std::swap(s0, s1);
    // composite 4-point Gauss-Legendre over the tracer intervals
    static const double gl_x[4] = {0.069431844202973712, 0.330009478207571868,
                                   0.669990521792428132, 0.930568155797026288};
    static const double gl_w[4] = {0.173927422568726929, 0.326072577431273071,
                                   0.326072577431273071, 0.173927422568726929};
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < seg.s.size(); ++i) {
        double a = std::max(seg.s[i], s0), b = std::min(seg.s[i + 1], s1);
        if (b <= a) continue;
        double acc = 0.0;
        for (int k = 0; k < 4; ++k) {
            double t = a + (b - a) * gl_x[k];
            acc += gl_w[k] * std::exp(-phi_u.sample_lift(seg.lift_at(t)));
        }
        total += acc * (b - a);
    }
    return total;
}

double conformal_distance(const ToralEndomorphism& f, const GridField& phi_u,
                          const DirectionField& unstable, const TorusPoint& a,
                          const TorusPoint& b, double max_length) {
    LeafHit hit = trace_leaf_to(f, unstable, a, b, max_length);
    return conformal_length(hit.segment, phi_u, std::min(0.0, hit.s_b), std::max(0.0, hit.s_b));
}

} // namespace anosov
