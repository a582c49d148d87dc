#include "anosov/periodic.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <Eigen/Dense>

#include "anosov/errors.hpp"

namespace anosov {

std::int64_t linear_periodic_count(const IMat2& A, int n) {
    IMat2 M = ipow(A, n) - IMat2::identity();
    std::int64_t dt = M.det();
    if (dt == 0) throw DegenerateMatrix("A^n - I is singular");
    return std::llabs(dt);
}

namespace {

std::int64_t imod(std::int64_t a, std::int64_t m) {
    std::int64_t r = a % m;
    return r < 0 ? r + m : r;
}

} // namespace

std::vector<LatticeOrbit> linear_periodic_orbits(const IMat2& A, int n) {
    IMat2 M = ipow(A, n) - IMat2::identity();
    std::int64_t dt = M.det();
    if (dt == 0) throw DegenerateMatrix("A^n - I is singular");
    const std::int64_t D = std::llabs(dt);
    IMat2 adj = M.adjugate();
    std::int64_t sign = dt > 0 ? 1 : -1;

    // fixed points of A^n: x = M^{-1} c = sign * adj(M) c / D over cosets c
    std::map<std::array<std::int64_t, 2>, bool> seen;
    std::vector<LatticeOrbit> orbits;
    for (const auto& c : coset_representatives(M)) {
        auto w = adj.apply(c[0], c[1]);
        std::array<std::int64_t, 2> x{imod(sign * w[0], D), imod(sign * w[1], D)};
        if (seen.count(x)) continue;
        // walk the A-orbit in (Z/D)^2
        LatticeOrbit orb;
        orb.den = D;
        std::array<std::int64_t, 2> cur = x;
        do {
            seen[cur] = true;
            orb.nums.push_back(cur);
            auto nx = A.apply(cur[0], cur[1]);
            cur = {imod(nx[0], D), imod(nx[1], D)};
        } while (!(cur == x));
        if (int(orb.nums.size()) == n) orbits.push_back(std::move(orb));
    }
    return orbits;
}

std::vector<Vec2> refine_periodic_lift(const ToralEndomorphism& f,
                                       const std::vector<Vec2>& seed,
                                       const std::vector<std::array<std::int64_t, 2>>& offsets,
                                       double tol, int max_iter) {
    const int m = int(seed.size());
    if (int(offsets.size()) != m) throw ModelError("offsets must match orbit length");
    std::vector<Vec2> u = seed;

    Eigen::MatrixXd J(2 * m, 2 * m);
    Eigen::VectorXd R(2 * m);
    for (int it = 0; it < max_iter; ++it) {
        J.setZero();
        double rmax = 0.0;
        for (int i = 0; i < m; ++i) {
            int ip = (i + 1) % m;
            Vec2 r = f.lift_apply(u[size_t(i)]) - u[size_t(ip)] -
                     Vec2(double(offsets[size_t(i)][0]), double(offsets[size_t(i)][1]));
            R(2 * i) = r.x;
            R(2 * i + 1) = r.y;
            rmax = std::max(rmax, r.norm_inf());
            Mat2 D = f.lift_jacobian(u[size_t(i)]);
            J(2 * i, 2 * i) = D.a;
            J(2 * i, 2 * i + 1) = D.b;
            J(2 * i + 1, 2 * i) = D.c;
            J(2 * i + 1, 2 * i + 1) = D.d;
            J(2 * i, 2 * ip) -= 1.0;
            J(2 * i + 1, 2 * ip + 1) -= 1.0;
        }
        if (rmax < tol) return u;
        Eigen::VectorXd delta = J.partialPivLu().solve(R);
        for (int i = 0; i < m; ++i) {
            u[size_t(i)].x -= delta(2 * i);
            u[size_t(i)].y -= delta(2 * i + 1);
        }
    }
    throw NewtonDivergence("periodic orbit Newton did not converge");
}

OrbitBundle periodic_bundle(const ToralEndomorphism& f, const std::vector<TorusPoint>& points) {
    const int m = int(points.size());
    std::vector<Mat2> jac(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) jac[size_t(i)] = f.jacobian(points[size_t(i)]);

    OrbitBundle b;
    b.e_u.resize(size_t(m));
    b.e_s.resize(size_t(m));

    if (m <= 60) {
        // exact route: eigenvectors of the period-return derivative
        Mat2 ret = Mat2::identity();
        for (int i = 0; i < m; ++i) ret = jac[size_t(i)] * ret; // Df^m at points[0]
        EigenSplit es = eig_hyperbolic(ret);
        b.e_u[0] = es.e_u;
        b.e_s[0] = es.e_s;
        for (int i = 0; i < m - 1; ++i) {
            b.e_u[size_t(i + 1)] = (jac[size_t(i)] * b.e_u[size_t(i)]).normalized();
            b.e_s[size_t(i + 1)] = (jac[size_t(i)] * b.e_s[size_t(i)]).normalized();
        }
        return b;
    }

    // long cycles: normalized power iteration around the loop (the raw return
    // matrix would overflow)
    int wraps = std::max(2, int(80 / m) + 2);
    Vec2 v = f.eigen().e_u;
    for (int w = 0; w < wraps; ++w)
        for (int i = 0; i < m; ++i) {
            v = (jac[size_t(i)] * v).normalized();
            b.e_u[size_t((i + 1) % m)] = v;
        }
    Vec2 ws = f.eigen().e_s;
    for (int w = 0; w < wraps; ++w)
        for (int i = m - 1; i >= 0; --i) {
            ws = (jac[size_t(i)].inverse() * ws).normalized();
            b.e_s[size_t(i)] = ws;
        }
    return b;
}

std::pair<double, double> lyapunov_at(const ToralEndomorphism& f, const PeriodicOrbit& orbit) {
    const int m = orbit.period;
    OrbitBundle b = periodic_bundle(f, orbit.points);
    double su = 0.0, ss = 0.0, sj = 0.0;
    for (int i = 0; i < m; ++i) {
        Mat2 J = f.jacobian(orbit.points[size_t(i)]);
        su += std::log((J * b.e_u[size_t(i)]).norm());
        ss += std::log((J * b.e_s[size_t(i)]).norm());
        sj += std::log(std::fabs(J.det()));
    }
    double lu = su / m, ls = ss / m;
    if (std::fabs(lu + ls - sj / m) > 1e-9)
        throw ModelError("exponent sum disagrees with the Jacobian average");
    return {lu, ls};
}

std::vector<PeriodicOrbit> find_periodic(const ToralEndomorphism& f, int n) {
    const IMat2& A = f.linear_part();
    std::vector<PeriodicOrbit> found;

    for (int m = 1; m <= n; ++m) {
        if (n % m != 0) continue;
        for (const auto& lat : linear_periodic_orbits(A, m)) {
            // seed lifts in [0,1)^2 and the deck offsets of the linear orbit
            std::vector<Vec2> seed(lat.nums.size());
            std::vector<std::array<std::int64_t, 2>> offs(lat.nums.size());
            for (std::size_t i = 0; i < lat.nums.size(); ++i)
                seed[i] = {lat.nums[i][0] / double(lat.den), lat.nums[i][1] / double(lat.den)};
            for (std::size_t i = 0; i < lat.nums.size(); ++i) {
                std::size_t ip = (i + 1) % lat.nums.size();
                // c_i = A x_i - x_{i+1}, exact in units of 1/den
                auto ax = A.apply(lat.nums[i][0], lat.nums[i][1]);
                offs[i] = {(ax[0] - lat.nums[ip][0]) / lat.den,
                           (ax[1] - lat.nums[ip][1]) / lat.den};
            }
            std::vector<Vec2> u = refine_periodic_lift(f, seed, offs);
            PeriodicOrbit orb;
            orb.period = int(u.size());
            for (const Vec2& p : u) orb.points.push_back(project(p));
            auto [lu, ls] = lyapunov_at(f, orb);
            orb.lambda_u = lu;
            orb.lambda_s = ls;
            found.push_back(std::move(orb));
        }
    }

    // dedupe (continuation should never merge distinct orbits)
    for (std::size_t i = 0; i < found.size(); ++i)
        for (std::size_t j = i + 1; j < found.size(); ++j)
            for (const auto& p : found[i].points)
                for (const auto& q : found[j].points)
                    if (torus_dist(p, q) < 1e-7)
                        throw CountMismatch("two continued orbits collapsed");

    std::int64_t expect = linear_periodic_count(A, n);
    std::int64_t got = 0;
    for (const auto& o : found) got += o.period;
    if (got != expect)
        throw CountMismatch("found " + std::to_string(got) + " periodic points, expected " +
                            std::to_string(expect));
    return found;
}

double periodic_data_defect(const ToralEndomorphism& f,
                            const std::vector<PeriodicOrbit>& orbits) {
    double lu_A = f.eigen().lambda_u();
    double ls_A = f.eigen().lambda_s();
    double defect = 0.0;
    for (const auto& o : orbits) {
        defect = std::max(defect, std::fabs(o.lambda_u - lu_A));
        defect = std::max(defect, std::fabs(o.lambda_s - ls_A));
    }
    return defect;
}

} // namespace anosov
