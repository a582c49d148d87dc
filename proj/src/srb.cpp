#include "anosov/srb.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <unordered_set>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <json.hpp>

namespace anosov {

namespace {

double ju_at(const ToralEndomorphism& f, const DirectionField& unstable, const TorusPoint& p) {
    return (f.jacobian(p) * unstable.at(p)).norm();
}

double js_at(const ToralEndomorphism& f, const DirectionField& stable, const TorusPoint& p) {
    return (f.jacobian(p) * stable.at(p)).norm();
}

// log-linear fit of increment magnitudes -> geometric rate
double fit_theta(const std::vector<double>& increments) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t k = 0; k < increments.size(); ++k)
        if (increments[k] > 1e-14) pts.push_back({double(k), std::log(increments[k])});
    if (pts.size() < 3) return 0.0;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (auto& [x, y] : pts) {
        sx += x; sy += y; sxx += x * x; sxy += x * y;
    }
    double n = double(pts.size());
    double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return std::exp(slope);
}

} // namespace

DeltaResult delta_u(const ToralEndomorphism& f, const DirectionField& unstable,
                    const BackwardBranch& branch_x, const BackwardBranch& branch_y, int K) {
    if (branch_x.choices.size() < size_t(K) || branch_y.choices.size() < size_t(K))
        throw BranchMismatch("branches shallower than the requested truncation");
    for (int k = 0; k < K; ++k)
        if (branch_x.choices[size_t(k)] != branch_y.choices[size_t(k)])
            throw BranchMismatch("coset choices differ at step " + std::to_string(k));

    DeltaResult res;
    double logv = 0.0;
    std::vector<double> increments;
    for (int k = 1; k <= K; ++k) {
        double inc = std::log(ju_at(f, unstable, branch_x.points[size_t(k)])) -
                     std::log(ju_at(f, unstable, branch_y.points[size_t(k)]));
        logv += inc;
        increments.push_back(std::fabs(inc));
        res.terms = k;
        res.last_increment = std::fabs(inc);
        if (std::fabs(inc) < 1e-12 && k >= 3) break;
    }
    res.value = std::exp(logv);
    res.tail_theta = fit_theta(increments);
    return res;
}

DeltaResult delta_s(const ToralEndomorphism& f, const DirectionField& stable,
                    const TorusPoint& x, const TorusPoint& y, int K) {
    if (torus_dist(x, y) > 0.05)
        throw PairSeparation("points too far apart for a local stable pairing");
    // Forward iteration of the pair amplifies any off-leaf component of y by
    // lambda_u per step, so the companion point is tracked by its arclength on
    // the traced stable leaf of the x-orbit and reprojected every step.
    DeltaResult res;
    double logv = 0.0;
    TorusPoint cx = x;
    Vec2 disp0 = torus_displacement(x, y);
    double t = disp0.dot(stable.at(cx)); // signed arclength of y on W^s_loc(cx)
    LeafSegment win = trace_leaf_window(f, stable, cx, std::fabs(t) + 2e-3);
    std::vector<double> increments;
    for (int k = 0; k <= K; ++k) {
        if (std::fabs(t) > 0.2)
            throw PairSeparation("forward orbits separated; y is not on W^s(x)");
        TorusPoint cy = win.point_at(t);
        double inc = std::log(std::fabs(f.jacobian(cx).det())) -
                     std::log(std::fabs(f.jacobian(cy).det())) +
                     std::log(js_at(f, stable, cx)) - std::log(js_at(f, stable, cy));
        logv += inc;
        increments.push_back(std::fabs(inc));
        res.terms = k + 1;
        res.last_increment = std::fabs(inc);
        if (std::fabs(inc) < 1e-13 && k >= 3) break;

        // push the pair forward; reproject the companion onto the next leaf
        TorusPoint fy = f.apply(cy);
        cx = f.apply(cx);
        Vec2 d = torus_displacement(cx, fy);
        double tnext = d.dot(stable.at(cx));
        win = trace_leaf_window(f, stable, cx, std::fabs(tnext) + 2e-3);
        for (int it = 0; it < 6; ++it) {
            Vec2 p = win.lift_at(tnext);
            Vec2 dd{wrap_half(fy.x - p.x), wrap_half(fy.y - p.y)};
            double step = dd.dot(win.tangent_at(tnext));
            tnext += step;
            if (std::fabs(step) < 1e-14) break;
        }
        t = tnext;
    }
    res.value = std::exp(logv);
    res.tail_theta = fit_theta(increments);
    return res;
}

double LeafDensity::value_at(double s) const {
    const auto& sv = segment.s;
    if (sv.empty()) return 0.0;
    auto it = std::upper_bound(sv.begin(), sv.end(), s);
    std::size_t i = (it == sv.begin()) ? 0 : std::size_t(it - sv.begin()) - 1;
    if (i >= sv.size() - 1) i = sv.size() - 2;
    double u = (s - sv[i]) / (sv[i + 1] - sv[i]);
    return values[i] * (1.0 - u) + values[i + 1] * u;
}

LeafDensity unstable_leaf_density(const ToralEndomorphism& f, const DirectionField& unstable,
                                  const LeafSegment& segment, int K) {
    // Pull the whole segment back together: the base follows the zero-coset
    // branch, nodes follow by continuity of the lifted inverse (matched local
    // branch). Displacements from the base contract backward, so the pairing
    // stays local.
    const std::size_t n = segment.lift_pts.size();
    LeafDensity out;
    out.segment = segment;
    out.values.assign(n, 0.0);

    const Mat2 Ainv = f.linear_part().real().inverse();
    const auto& c0 = f.cosets()[0];
    const Vec2 c0vec{double(c0[0]), double(c0[1])};

    Vec2 b = segment.lift_at(0.0);
    std::vector<Vec2> delta(n);
    for (std::size_t i = 0; i < n; ++i) delta[i] = segment.lift_pts[i] - b;

    std::vector<double> logdelta(n, 0.0); // accumulates log Delta^u vs the base
    for (int k = 1; k <= K; ++k) {
        Vec2 target0 = project(b).lift() + c0vec;
        Vec2 bprev = f.invert_lift(target0, Ainv * target0);
        double logju_base = std::log(ju_at(f, unstable, project(bprev)));
        for (std::size_t i = 0; i < n; ++i) {
            Vec2 u = f.invert_lift(target0 + delta[i], bprev + Ainv * delta[i]);
            delta[i] = u - bprev;
            logdelta[i] += std::log(ju_at(f, unstable, project(u))) - logju_base;
        }
        b = bprev;
    }
    for (std::size_t i = 0; i < n; ++i) out.values[i] = std::exp(logdelta[i]);

    // normalize: trapezoid in arclength
    double mass = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i)
        mass += 0.5 * (out.values[i] + out.values[i + 1]) * (segment.s[i + 1] - segment.s[i]);
    out.normalizer = mass;
    for (double& v : out.values) v /= mass;
    return out;
}

// ---------------------------------------------------------------------------

InvariantDensity invariant_density(const ToralEndomorphism& f, int N, int F) {
    const double logk = std::log(double(f.degree()));
    GridField psi = make_grid_field(
        N, [&](const TorusPoint& p) { return std::log(std::fabs(f.jacobian(p).det())) - logk; });

    // periodic obstruction gate (log Jf sums must equal n log k)
    for (int n = 1; n <= 3; ++n) {
        for (const auto& orb : find_periodic(f, n)) {
            if (orb.period != n) continue;
            double mean = 0.0;
            for (const auto& pt : orb.points)
                mean += std::log(std::fabs(f.jacobian(pt).det())) - logk;
            mean /= orb.period;
            if (std::fabs(mean) > 1e-4)
                throw ObstructionNonzero("Jacobian periodic average " + std::to_string(mean) +
                                         " is nonzero; no absolutely continuous e^{-phi} measure");
        }
    }

    CohomologySolution sol = solve_cohomology(f, psi, F);
    GridField density(N);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) density.at(i, j) = std::exp(-sol.phi.at(i, j));
    double mass = density.mean();
    for (double& v : density.values()) v /= mass;

    InvariantDensity out{std::move(sol.phi), std::move(density), sol.sup_residual};
    return out;
}

double box_measure(const GridField& density, const Box& box, int subsamples) {
    double acc = 0.0;
    const double h = box.side / subsamples;
    for (int i = 0; i < subsamples; ++i)
        for (int j = 0; j < subsamples; ++j) {
            TorusPoint p{box.x0 + (i + 0.5) * h, box.y0 + (j + 0.5) * h};
            acc += density.sample(p);
        }
    return acc * h * h;
}

double box_measure_pullback(const ToralEndomorphism& f, const GridField& density,
                            const Box& box, int subsamples) {
    double acc = 0.0;
    const double h = box.side / subsamples;
    for (int i = 0; i < subsamples; ++i)
        for (int j = 0; j < subsamples; ++j) {
            TorusPoint y{box.x0 + (i + 0.5) * h, box.y0 + (j + 0.5) * h};
            for (const TorusPoint& q : f.preimages(y))
                acc += density.sample(q) / std::fabs(f.jacobian(q).det());
        }
    return acc * h * h;
}

// ---------------------------------------------------------------------------

double separated_set_entropy(const ToralEndomorphism& f, int n, int eps_inv, int sample_grid) {
    // itinerary hashes over the eps-box partition
    std::vector<std::uint64_t> codes;
    codes.reserve(size_t(sample_grid) * size_t(sample_grid));
    for (int i = 0; i < sample_grid; ++i) {
        for (int j = 0; j < sample_grid; ++j) {
            TorusPoint p{(i + 0.5) / sample_grid, (j + 0.5) / sample_grid};
            std::uint64_t h = 1469598103934665603ull;
            for (int t = 0; t < n; ++t) {
                std::uint64_t bx = std::uint64_t(p.x * eps_inv);
                std::uint64_t by = std::uint64_t(p.y * eps_inv);
                h = (h ^ (bx * 1099511628211ull + by)) * 1099511628211ull;
                p = f.apply(p);
            }
            codes.push_back(h);
        }
    }
    std::sort(codes.begin(), codes.end());
    std::size_t distinct = std::unique(codes.begin(), codes.end()) - codes.begin();
    return std::log(double(distinct)) / n;
}

EntropyReport entropy_report(const ToralEndomorphism& f, std::uint64_t seed, int orbit_length,
                             int burn_in, int sep_n, int sep_grid) {
    EntropyReport rep;
    rep.seed = seed;
    rep.orbit_length = orbit_length;
    rep.burn_in = burn_in;
    rep.sep_n = sep_n;
    rep.log_k = std::log(double(f.degree()));

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    TorusPoint p{unif(rng), unif(rng)};
    for (int t = 0; t < burn_in; ++t) p = f.apply(p);

    // forward pushed unstable vector for lambda_u; store the orbit to pull a
    // stable vector back afterwards
    std::vector<TorusPoint> orbit(static_cast<std::size_t>(orbit_length));
    Vec2 v = f.eigen().e_u;
    double su = 0.0;
    for (int t = 0; t < orbit_length; ++t) {
        orbit[size_t(t)] = p;
        Vec2 w = f.jacobian(p) * v;
        double g = w.norm();
        su += std::log(g);
        v = w * (1.0 / g);
        p = f.apply(p);
    }
    rep.lambda_u = su / orbit_length;

    Vec2 ws = f.eigen().e_s;
    double ss = 0.0;
    for (int t = orbit_length - 1; t >= 0; --t) {
        Mat2 Jinv = f.jacobian(orbit[size_t(t)]).inverse();
        Vec2 w = Jinv * ws;
        double g = w.norm();
        ss += std::log(g); // |Df^{-1}| along E^s grows by 1/|lambda_s|
        ws = w * (1.0 / g);
    }
    rep.lambda_s = -ss / orbit_length;

    rep.sum_defect = std::fabs(rep.lambda_u + rep.lambda_s - rep.log_k);
    rep.h_plus = rep.lambda_u;
    rep.h_minus = rep.log_k - rep.lambda_s;
    rep.balance_defect = std::fabs(rep.h_plus - rep.h_minus);
    rep.sep_entropy = separated_set_entropy(f, sep_n, 64, sep_grid);
    return rep;
}

std::string EntropyReport::to_json() const {
    nlohmann::json j;
    j["lambda_u"] = lambda_u;
    j["lambda_s"] = lambda_s;
    j["log_k"] = log_k;
    j["sum_defect"] = sum_defect;
    j["h_plus"] = h_plus;
    j["h_minus"] = h_minus;
    j["balance_defect"] = balance_defect;
    j["separated_set_entropy"] = sep_entropy;
    j["sep_n"] = sep_n;
    j["orbit_length"] = orbit_length;
    j["burn_in"] = burn_in;
    j["seed"] = seed;
    return j.dump(2);
}

// ---------------------------------------------------------------------------

SpectrumReport spectrum_diagnostics(const std::vector<std::vector<std::int64_t>>& matrix) {
    const int d = int(matrix.size());
    for (const auto& row : matrix)
        if (int(row.size()) != d) throw ModelError("matrix must be square");
    Eigen::MatrixXd M(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) M(i, j) = double(matrix[size_t(i)][size_t(j)]);

    SpectrumReport rep;
    rep.dim = d;
    Eigen::EigenSolver<Eigen::MatrixXd> es(M);
    for (int i = 0; i < d; ++i) {
        std::complex<double> ev = es.eigenvalues()(i);
        rep.eigenvalues.push_back({ev.real(), ev.imag()});
        double mod = std::abs(ev);
        rep.moduli.push_back(mod);
        if (mod > 1.0 + 1e-9) {
            ++rep.n_expanding;
            rep.sum_log_expanding += std::log(mod);
        } else if (mod < 1.0 - 1e-9) {
            ++rep.n_contracting;
        }
    }
    rep.hyperbolic = (rep.n_expanding + rep.n_contracting == d);
    rep.log_abs_det = std::log(std::fabs(M.determinant()));
    std::sort(rep.moduli.begin(), rep.moduli.end());
    return rep;
}

std::string SpectrumReport::to_json() const {
    nlohmann::json j;
    j["dim"] = dim;
    nlohmann::json evs = nlohmann::json::array();
    for (auto& [re, im] : eigenvalues) evs.push_back({{"re", re}, {"im", im}});
    j["eigenvalues"] = evs;
    j["moduli_sorted"] = moduli;
    j["n_expanding"] = n_expanding;
    j["n_contracting"] = n_contracting;
    j["hyperbolic"] = hyperbolic;
    j["sum_log_expanding"] = sum_log_expanding;
    j["log_abs_det"] = log_abs_det;
    return j.dump(2);
}

} // namespace anosov
