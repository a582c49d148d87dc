#include "anosov/shadowing.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "anosov/livsic.hpp"

namespace anosov {

std::vector<double> PseudoOrbit::jumps(const ToralEndomorphism& f) const {
    std::vector<double> out(points.size());
    for (std::size_t i = 0; i < points.size(); ++i)
        out[i] = torus_dist(f.apply(points[i]), points[(i + 1) % points.size()]);
    return out;
}

double PseudoOrbit::max_jump(const ToralEndomorphism& f) const {
    double m = 0.0;
    for (double j : jumps(f)) m = std::max(m, j);
    return m;
}

namespace {

// Solve the cyclic Newton system by splitting corrections along approximate
// unstable/stable directions: unstable coefficients propagate backward
// (contraction 1/lambda_u), stable ones forward (contraction |lambda_s|).
std::vector<Vec2> refine_cycle_split(const ToralEndomorphism& f, std::vector<Vec2> u,
                                     const std::vector<std::array<std::int64_t, 2>>& offs,
                                     double tol, int max_iter, int* iters_out) {
    const int m = int(u.size());
    std::vector<Mat2> jac(static_cast<std::size_t>(m));
    std::vector<Vec2> eu(static_cast<std::size_t>(m)), es(static_cast<std::size_t>(m));
    std::vector<Vec2> r(static_cast<std::size_t>(m));
    const std::size_t mm = static_cast<std::size_t>(m);
    std::vector<double> au(mm), bs(mm), ru(mm), rs(mm);
    std::vector<double> alpha(mm, 0.0), beta(mm, 0.0);

    double prev_rmax = 1e300;
    for (int it = 0; it < max_iter; ++it) {
        double rmax = 0.0;
        for (int i = 0; i < m; ++i) {
            int ip = (i + 1) % m;
            jac[size_t(i)] = f.lift_jacobian(u[size_t(i)]);
            r[size_t(i)] = f.lift_apply(u[size_t(i)]) - u[size_t(ip)] -
                           Vec2(double(offs[size_t(i)][0]), double(offs[size_t(i)][1]));
            rmax = std::max(rmax, r[size_t(i)].norm_inf());
        }
        if (iters_out) *iters_out = it;
        if (rmax < tol) return u;
        if (rmax > 4.0 * prev_rmax)
            throw NewtonDivergence("cycle refinement residual diverges");
        prev_rmax = rmax;

        // invariant directions along the current cycle (two wrap sweeps)
        Vec2 v = f.eigen().e_u;
        for (int pass = 0; pass < 2; ++pass)
            for (int i = 0; i < m; ++i) {
                v = (jac[size_t(i)] * v).normalized();
                eu[size_t((i + 1) % m)] = v;
            }
        Vec2 w = f.eigen().e_s;
        for (int pass = 0; pass < 2; ++pass)
            for (int i = m - 1; i >= 0; --i) {
                w = (jac[size_t(i)].inverse() * w).normalized();
                es[size_t(i)] = w;
            }

        for (int i = 0; i < m; ++i) {
            int ip = (i + 1) % m;
            // residual and cocycle coefficients in the basis at i+1
            Mat2 B{eu[size_t(ip)].x, es[size_t(ip)].x, eu[size_t(ip)].y, es[size_t(ip)].y};
            Mat2 Binv = B.inverse();
            Vec2 rc = Binv * r[size_t(i)];
            ru[size_t(i)] = rc.x;
            rs[size_t(i)] = rc.y;
            Vec2 du = Binv * (jac[size_t(i)] * eu[size_t(i)]);
            Vec2 ds = Binv * (jac[size_t(i)] * es[size_t(i)]);
            au[size_t(i)] = du.x; // expansion along e_u (cross term dropped)
            bs[size_t(i)] = ds.y;
        }
        // delta_{i+1} = Df delta_i + r_i
        for (int pass = 0; pass < 3; ++pass)
            for (int i = m - 1; i >= 0; --i)
                alpha[size_t(i)] = (alpha[size_t((i + 1) % m)] - ru[size_t(i)]) / au[size_t(i)];
        for (int pass = 0; pass < 3; ++pass)
            for (int i = 0; i < m; ++i)
                beta[size_t((i + 1) % m)] = bs[size_t(i)] * beta[size_t(i)] + rs[size_t(i)];

        for (int i = 0; i < m; ++i)
            u[size_t(i)] += eu[size_t(i)] * alpha[size_t(i)] + es[size_t(i)] * beta[size_t(i)];
    }
    throw NewtonDivergence("cycle refinement did not reach tolerance");
}

int least_period(const std::vector<TorusPoint>& pts, double tol = 1e-9) {
    const int m = int(pts.size());
    for (int d = 1; d <= m; ++d) {
        if (m % d != 0) continue;
        bool ok = true;
        for (int i = 0; ok && i + d < m; ++i)
            if (torus_dist(pts[size_t(i)], pts[size_t(i + d)]) > tol) ok = false;
        if (ok) return d;
    }
    return m;
}

} // namespace

ShadowResult closing_lemma_shadow(const ToralEndomorphism& f, const PseudoOrbit& seg,
                                  double gamma) {
    const int m = int(seg.points.size());
    if (m < 1) throw ModelError("empty pseudo-orbit");
    double jump = seg.max_jump(f);
    if (jump > gamma)
        throw ModelError("pseudo-orbit jump " + std::to_string(jump) +
                         " exceeds gamma = " + std::to_string(gamma));

    // deck offsets from the lifted pseudo-orbit
    std::vector<Vec2> u(static_cast<std::size_t>(m));
    std::vector<std::array<std::int64_t, 2>> offs(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) u[size_t(i)] = seg.points[size_t(i)].lift();
    for (int i = 0; i < m; ++i) {
        int ip = (i + 1) % m;
        Vec2 d = f.lift_apply(u[size_t(i)]) - u[size_t(ip)];
        offs[size_t(i)] = {std::llround(d.x), std::llround(d.y)};
    }

    int iters = 0;
    std::vector<Vec2> sol;
    if (m <= 128) {
        sol = refine_periodic_lift(f, u, offs, 1e-12, 60);
    } else {
        sol = refine_cycle_split(f, u, offs, 1e-11, 80, &iters);
    }

    ShadowResult res;
    res.cycle_length = m;
    res.iterations = iters;
    double dist = 0.0, resid = 0.0;
    res.cycle.reserve(size_t(m));
    for (int i = 0; i < m; ++i) {
        TorusPoint pt = project(sol[size_t(i)]);
        res.cycle.push_back(pt);
        dist = std::max(dist, torus_dist(pt, seg.points[size_t(i)]));
    }
    for (int i = 0; i < m; ++i) {
        int ip = (i + 1) % m;
        resid = std::max(resid, torus_dist(f.apply(res.cycle[size_t(i)]), res.cycle[size_t(ip)]));
    }
    res.shadow_distance = dist;
    res.residual = resid;

    int lp = least_period(res.cycle);
    res.orbit.period = lp;
    res.orbit.points.assign(res.cycle.begin(), res.cycle.begin() + lp);
    auto [lu, ls] = lyapunov_at(f, res.orbit);
    res.orbit.lambda_u = lu;
    res.orbit.lambda_s = ls;
    return res;
}

// ---------------------------------------------------------------------------

std::vector<int> lemma71_schedule(int first_block, int gap, int total_cap) {
    std::vector<int> ks{first_block};
    long long total = first_block;
    for (;;) {
        long long sum_k = 0;
        for (int k : ks) sum_k += k;
        long long next = (sum_k + (long long)ks.size() * gap);
        next = next * next;
        if (total + next + gap > total_cap) break;
        ks.push_back(int(next));
        total += next + gap;
    }
    return ks;
}

namespace {

struct Crossing {
    double s; // position on the unstable window
    double t; // position on the stable trace
    Vec2 z_lift;
};

// z on W^u_loc(a) with z on W^s(b): 2D Newton on the traced curves.
std::optional<Crossing> find_crossing(const LeafSegment& useg, const LeafSegment& sseg,
                                      double s0, double t0) {
    double s = s0, t = t0;
    for (int it = 0; it < 40; ++it) {
        Vec2 pu = useg.lift_at(s);
        Vec2 ps = sseg.lift_at(t);
        Vec2 g{wrap_half(pu.x - ps.x), wrap_half(pu.y - ps.y)};
        if (g.norm_inf() < 1e-12) {
            if (s < useg.s.front() - 1e-9 || s > useg.s.back() + 1e-9) return std::nullopt;
            if (t < sseg.s.front() - 1e-9 || t > sseg.s.back() + 1e-9) return std::nullopt;
            return Crossing{s, t, pu};
        }
        Vec2 tu = useg.tangent_at(s);
        Vec2 ts = sseg.tangent_at(t);
        Mat2 J{tu.x, -ts.x, tu.y, -ts.y};
        if (std::fabs(J.det()) < 1e-8) return std::nullopt;
        Vec2 d = J.inverse() * g;
        s -= d.x;
        t -= d.y;
        s = std::clamp(s, useg.s.front() - 0.01, useg.s.back() + 0.01);
        t = std::clamp(t, sseg.s.front() - 0.01, sseg.s.back() + 0.01);
    }
    return std::nullopt;
}

// Heteroclinic bridge point: W^u window at `tail` crossed with the growing
// stable trace of `head_preimage`.
Vec2 bridge_point(const ToralEndomorphism& f, const DirectionField& unstable,
                  const DirectionField& stable, const TorusPoint& tail,
                  const TorusPoint& head_preimage, double eps) {
    LeafSegment window = trace_leaf_window(f, unstable, tail, eps);

    std::optional<Crossing> best;
    for (double L : {2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0}) {
        LeafSegment strace = trace_leaf_window(f, stable, head_preimage, L);
        for (std::size_t k = 0; k < strace.lift_pts.size(); ++k) {
            TorusPoint node = project(strace.lift_pts[k]);
            double d = torus_dist(node, tail);
            if (d > 0.9 * eps) continue;
            Vec2 disp = torus_displacement(tail, node);
            double s_seed = disp.dot(window.tangent_at(0.0));
            auto hit = find_crossing(window, strace, s_seed, strace.s[k]);
            if (hit && std::fabs(hit->s) <= eps) {
                if (!best || std::fabs(hit->s) < std::fabs(best->s)) best = hit;
            }
        }
        if (best) break;
    }
    if (!best)
        throw LeafTraceFailure("no unstable/stable crossing found for the specification bridge");
    return best->z_lift;
}

} // namespace

SpecificationResult specification_concatenate(const ToralEndomorphism& f,
                                              const DirectionField& unstable,
                                              const DirectionField& stable,
                                              const PeriodicOrbit& p, const PeriodicOrbit& q,
                                              const std::vector<int>& block_lengths, int gap,
                                              double eps) {
    if (block_lengths.empty()) throw ModelError("no blocks given");
    long long total = 0;
    for (int k : block_lengths) total += k;
    total += (long long)block_lengths.size() * gap;
    if (total > 10000) throw ModelError("total specification length exceeds the 10^4 cap");

    PseudoOrbit pseudo;
    pseudo.points.reserve(size_t(total));
    std::vector<SpecBlock> blocks;

    const int B = int(block_lengths.size());
    for (int j = 0; j < B; ++j) {
        const PeriodicOrbit& orb = (j % 2 == 0) ? p : q;
        const PeriodicOrbit& next = (((j + 1) % B) % 2 == 0) ? p : q;
        SpecBlock blk;
        blk.label = (j % 2 == 0) ? 'p' : 'q';
        blk.start = int(pseudo.points.size());
        blk.length = block_lengths[size_t(j)];
        blk.lambda_u_ref = orb.lambda_u;
        blocks.push_back(blk);
        for (int t = 0; t < block_lengths[size_t(j)]; ++t)
            pseudo.points.push_back(orb.points[size_t(t % orb.period)]);

        // bridge toward the next block's head (cyclically back to block 0)
        TorusPoint tail_image =
            orb.points[size_t(block_lengths[size_t(j)] % orb.period)];
        TorusPoint head_preimage =
            next.points[size_t(((-gap) % next.period + next.period) % next.period)];
        Vec2 z = bridge_point(f, unstable, stable, tail_image, head_preimage, eps);
        TorusPoint w = project(z);
        for (int r = 0; r < gap; ++r) {
            pseudo.points.push_back(w);
            w = f.apply(w);
        }
    }

    SpecificationResult out;
    out.gap = gap;
    out.eps = eps;
    out.max_seam_jump = pseudo.max_jump(f);
    out.shadow = closing_lemma_shadow(f, pseudo, std::max(eps * 1.2, 1e-6));

    // Birkhoff block averages along the closed orbit
    const auto& cyc = out.shadow.cycle;
    const int m = int(cyc.size());
    std::vector<Mat2> jac(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) jac[size_t(i)] = f.jacobian(cyc[size_t(i)]);
    std::vector<Vec2> eu(static_cast<std::size_t>(m));
    Vec2 v = f.eigen().e_u;
    for (int pass = 0; pass < 2; ++pass)
        for (int i = 0; i < m; ++i) {
            v = (jac[size_t(i)] * v).normalized();
            eu[size_t((i + 1) % m)] = v;
        }
    for (auto& blk : blocks) {
        double acc = 0.0;
        for (int t = 0; t < blk.length; ++t) {
            int i = blk.start + t;
            acc += std::log((jac[size_t(i)] * eu[size_t(i)]).norm());
        }
        blk.birkhoff_u = acc / blk.length;
    }
    out.blocks = std::move(blocks);
    return out;
}

std::string SpecificationResult::to_json() const {
    nlohmann::json j;
    j["gap"] = gap;
    j["eps"] = eps;
    j["max_seam_jump"] = max_seam_jump;
    j["cycle_length"] = shadow.cycle_length;
    j["shadow_distance"] = shadow.shadow_distance;
    j["residual"] = shadow.residual;
    j["orbit_least_period"] = shadow.orbit.period;
    nlohmann::json bl = nlohmann::json::array();
    for (const auto& b : blocks)
        bl.push_back({{"label", std::string(1, b.label)},
                      {"start", b.start},
                      {"length", b.length},
                      {"birkhoff_u", b.birkhoff_u},
                      {"lambda_u_ref", b.lambda_u_ref}});
    j["blocks"] = bl;
    return j.dump(2);
}

} // namespace anosov
