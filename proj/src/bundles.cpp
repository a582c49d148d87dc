#include "anosov/bundles.hpp"

#include <cmath>
#include <sstream>

#include <json.hpp>

namespace anosov {

BackwardBranch make_backward_branch(const ToralEndomorphism& f, const TorusPoint& base,
                                    const std::vector<int>& choices) {
    BackwardBranch br;
    br.base = base;
    br.choices = choices;
    br.points.reserve(choices.size() + 1);
    br.points.push_back(base);
    TorusPoint cur = base;
    for (int c : choices) {
        cur = f.preimage_branch(cur, c);
        br.points.push_back(cur);
    }
    return br;
}

BackwardBranch zero_branch(const ToralEndomorphism& f, const TorusPoint& base, int depth) {
    return make_backward_branch(f, base, std::vector<int>(size_t(depth), 0));
}

BackwardBranch random_branch(const ToralEndomorphism& f, const TorusPoint& base, int depth,
                             std::mt19937_64& rng) {
    std::uniform_int_distribution<int> pick(0, int(f.cosets().size()) - 1);
    std::vector<int> choices(static_cast<std::size_t>(depth));
    for (int& c : choices) c = pick(rng);
    return make_backward_branch(f, base, choices);
}

namespace {

Vec2 rotate(const Vec2& v, double a) {
    double c = std::cos(a), s = std::sin(a);
    return {c * v.x - s * v.y, s * v.x + c * v.y};
}

// push a seed vector from x_{-N} up to the base, normalizing each step
Vec2 push_forward(const ToralEndomorphism& f, const BackwardBranch& br, Vec2 v) {
    for (int j = br.depth(); j >= 1; --j)
        v = (f.jacobian(br.points[size_t(j)]) * v).normalized();
    return v;
}

} // namespace

UnstableDirection unstable_direction(const ToralEndomorphism& f, const BackwardBranch& branch) {
    if (branch.depth() < 1) throw DepthTooShallow("backward branch needs depth >= 1");
    const double seed_angle = 0.2;
    Vec2 seed = f.eigen().e_u;
    Vec2 v = push_forward(f, branch, seed);
    Vec2 w = push_forward(f, branch, rotate(seed, seed_angle));
    double moved = line_angle(v, w);
    UnstableDirection out;
    out.dir = v;
    out.seed_sensitivity = moved;
    out.contraction_estimate = moved / seed_angle;
    if (out.contraction_estimate > 0.5)
        throw DepthTooShallow("projective contraction estimate " +
                              std::to_string(out.contraction_estimate) +
                              " > 0.5; deepen the branch");
    return out;
}

Vec2 stable_direction(const ToralEndomorphism& f, const TorusPoint& p, int depth) {
    if (depth < 1) throw DepthTooShallow("stable direction needs depth >= 1");
    std::vector<Mat2> jacs;
    jacs.reserve(size_t(depth));
    TorusPoint cur = p;
    for (int j = 0; j < depth; ++j) {
        jacs.push_back(f.jacobian(cur));
        cur = f.apply(cur);
    }
    Vec2 v = f.eigen().e_s;
    for (int j = depth - 1; j >= 0; --j) v = (jacs[size_t(j)].inverse() * v).normalized();
    if (v.x < 0.0 || (v.x == 0.0 && v.y < 0.0)) v = -v;
    return v;
}

double specialness_spread(const ToralEndomorphism& f, const TorusPoint& p, int depth,
                          int trials, std::mt19937_64& rng) {
    if (trials < 2) throw ModelError("specialness spread needs at least two branches");
    std::vector<Vec2> dirs;
    dirs.reserve(size_t(trials));
    for (int t = 0; t < trials; ++t)
        dirs.push_back(unstable_direction(f, random_branch(f, p, depth, rng)).dir);
    double spread = 0.0;
    for (std::size_t i = 0; i < dirs.size(); ++i)
        for (std::size_t j = i + 1; j < dirs.size(); ++j)
            spread = std::max(spread, line_angle(dirs[i], dirs[j]));
    return spread;
}

// ---------------------------------------------------------------------------

namespace {

// min of |M v(theta)| over theta in [lo, hi] (exact: endpoints + interior
// critical angles of the quadratic form)
double min_growth_on_arc(const Mat2& M, double lo, double hi) {
    Mat2 S = M.transpose() * M;
    double avg = 0.5 * (S.a + S.d);
    double c2 = 0.5 * (S.a - S.d);
    double s2 = S.b; // S is symmetric: S.b == S.c
    auto g = [&](double th) { return avg + c2 * std::cos(2 * th) + s2 * std::sin(2 * th); };
    double best = std::min(g(lo), g(hi));
    double crit = 0.5 * std::atan2(s2, c2); // maximum of the form; min is +pi/2
    for (int k = -3; k <= 3; ++k) {
        double th = crit + 0.5 * M_PI * k;
        if (th > lo && th < hi) best = std::min(best, g(th));
    }
    return std::sqrt(std::max(best, 0.0));
}

} // namespace

ConeCertificate certify_cones(const ToralEndomorphism& f, const ConeParams& params, int grid) {
    ConeCertificate cert;
    cert.params = params;
    cert.grid = grid;
    const Vec2 eu = f.eigen().e_u;
    const Vec2 es = f.eigen().e_s;
    const double au = std::atan2(eu.y, eu.x);
    const double as = std::atan2(es.y, es.x);

    double min_gu = 1e300, min_gs = 1e300, max_du = 0.0, max_ds = 0.0;
    int wi = -1, wj = -1;
    auto track_worst = [&](bool worse, int i, int j) {
        if (worse) { wi = i; wj = j; }
    };

    for (int i = 0; i < grid; ++i) {
        for (int j = 0; j < grid; ++j) {
            Vec2 u{i / double(grid), j / double(grid)};
            Mat2 J = f.lift_jacobian(u);
            Mat2 Jinv = J.inverse();

            // unstable cone: boundary images span the image cone
            Vec2 b1 = J * unit_from_angle(au - params.half_angle_u);
            Vec2 b2 = J * unit_from_angle(au + params.half_angle_u);
            double dev = std::max(line_angle(b1, eu), line_angle(b2, eu));
            double gu = min_growth_on_arc(J, au - params.half_angle_u, au + params.half_angle_u);
            bool worse = gu < min_gu || dev > max_du;
            if (dev > max_du) max_du = dev;
            if (gu < min_gu) min_gu = gu;
            track_worst(worse, i, j);

            // stable cone under the pointwise inverse
            Vec2 c1 = Jinv * unit_from_angle(as - params.half_angle_s);
            Vec2 c2 = Jinv * unit_from_angle(as + params.half_angle_s);
            double devs = std::max(line_angle(c1, es), line_angle(c2, es));
            double gs = min_growth_on_arc(Jinv, as - params.half_angle_s,
                                          as + params.half_angle_s);
            worse = gs < min_gs || devs > max_ds;
            if (devs > max_ds) max_ds = devs;
            if (gs < min_gs) min_gs = gs;
            track_worst(worse, i, j);
        }
    }

    cert.min_growth_u = min_gu;
    cert.min_growth_s_inv = min_gs;
    cert.max_image_angle_u = max_du;
    cert.max_image_angle_s = max_ds;
    cert.margin_u = params.half_angle_u - max_du;
    cert.margin_s = params.half_angle_s - max_ds;
    cert.worst_cell_i = wi;
    cert.worst_cell_j = wj;

    cert.passed = true;
    if (cert.margin_u <= 0.0) { cert.passed = false; cert.failure = "unstable cone not strictly invariant"; }
    else if (cert.margin_s <= 0.0) { cert.passed = false; cert.failure = "stable cone not strictly invariant under Df^{-1}"; }
    else if (min_gu < params.lambda) { cert.passed = false; cert.failure = "unstable growth below lambda"; }
    else if (min_gs <= 1.0) { cert.passed = false; cert.failure = "stable cone not expanded by Df^{-1}"; }
    return cert;
}

void require_certified(const ToralEndomorphism& f, const ConeParams& params, int grid) {
    ConeCertificate c = certify_cones(f, params, grid);
    if (!c.passed)
        throw CertificationFailed(c.failure + " at grid cell (" + std::to_string(c.worst_cell_i) +
                                  "," + std::to_string(c.worst_cell_j) + ")");
}

std::string ConeCertificate::to_json() const {
    nlohmann::json j;
    j["passed"] = passed;
    j["grid"] = grid;
    j["cone_params"] = {{"half_angle_u", params.half_angle_u},
                        {"half_angle_s", params.half_angle_s},
                        {"lambda", params.lambda},
                        {"C", params.C}};
    j["min_growth_u"] = min_growth_u;
    j["min_growth_s_inv"] = min_growth_s_inv;
    j["max_image_angle_u"] = max_image_angle_u;
    j["max_image_angle_s"] = max_image_angle_s;
    j["margin_u"] = margin_u;
    j["margin_s"] = margin_s;
    j["worst_cell"] = {worst_cell_i, worst_cell_j};
    if (!failure.empty()) j["failure"] = failure;
    return j.dump(2);
}

// ---------------------------------------------------------------------------

DirectionField DirectionField::compute(const ToralEndomorphism& f, Flag flag, int N, int depth,
                                       int fit_F) {
    DirectionField df;
    df.flag_ = flag;
    const Vec2 axis = (flag == Flag::Unstable) ? f.eigen().e_u : f.eigen().e_s;
    df.base_angle_ = std::atan2(axis.y, axis.x);

    GridField offs(N);
    for (int i = 0; i < N; ++i) {
        for (int j = 0; j < N; ++j) {
            TorusPoint p{i / double(N), j / double(N)};
            Vec2 v;
            if (flag == Flag::Unstable)
                v = unstable_direction(f, zero_branch(f, p, depth)).dir;
            else
                v = stable_direction(f, p, depth);
            // signed offset in (-pi/2, pi/2] relative to the linear axis
            double off = std::atan2(axis.cross(v), axis.dot(v));
            if (off > M_PI / 2) off -= M_PI;
            if (off <= -M_PI / 2) off += M_PI;
            offs.at(i, j) = off;
        }
    }
    offs.fit_trig(std::min(fit_F, (N - 1) / 2));
    df.offsets_ = std::move(offs);
    return df;
}

Vec2 DirectionField::at_lift(const Vec2& u) const {
    double ang = base_angle_ + offsets_.sample_lift(u);
    return unit_from_angle(ang);
}

double DirectionField::invariance_residual(const ToralEndomorphism& f, int samples,
                                           std::mt19937_64& rng) const {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double worst = 0.0;
    for (int t = 0; t < samples; ++t) {
        TorusPoint p{unif(rng), unif(rng)};
        Vec2 v = at(p);
        Vec2 w = (f.jacobian(p) * v).normalized();
        worst = std::max(worst, line_angle(w, at(f.apply(p))));
    }
    return worst;
}

} // namespace anosov
