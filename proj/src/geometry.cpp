#include "anosov/geometry.hpp"

#include <algorithm>
#include <cstdlib>

namespace anosov {

IMat2 ipow(IMat2 base, int n) {
    IMat2 r = IMat2::identity();
    while (n > 0) {
        if (n & 1) r = r * base;
        base = base * base;
        n >>= 1;
    }
    return r;
}

EigenSplit eig_hyperbolic(const Mat2& m) {
    double tr = m.a + m.d;
    double dt = m.det();
    double disc = tr * tr - 4.0 * dt;
    if (disc <= 0.0)
        throw DegenerateMatrix("complex or repeated eigenvalues; matrix is not hyperbolic over R");
    double s = std::sqrt(disc);
    // avoid cancellation in the small eigenvalue: mu_small = det / mu_big
    double m1 = (tr >= 0.0) ? (tr + s) / 2.0 : (tr - s) / 2.0;
    double m2 = dt / m1;
    if (std::fabs(m1) < std::fabs(m2)) std::swap(m1, m2);
    if (std::fabs(m1) <= 1.0 || std::fabs(m2) >= 1.0)
        throw DegenerateMatrix("eigenvalue of modulus one; matrix is not hyperbolic");

    auto eigvec = [&](double mu) {
        // (m - mu I) v = 0; pick the better-conditioned row.
        Vec2 r1{m.a - mu, m.b};
        Vec2 r2{m.c, m.d - mu};
        Vec2 v = (r1.norm() >= r2.norm()) ? Vec2{-r1.y, r1.x} : Vec2{-r2.y, r2.x};
        v = v.normalized();
        // orient with positive x (or positive y on the vertical)
        if (v.x < 0.0 || (v.x == 0.0 && v.y < 0.0)) v = -v;
        return v;
    };

    EigenSplit e;
    e.mu_u = m1;
    e.mu_s = m2;
    e.e_u = eigvec(m1);
    e.e_s = eigvec(m2);
    return e;
}

bool in_lattice(const IMat2& m, std::int64_t cx, std::int64_t cy) {
    std::int64_t dt = m.det();
    if (dt == 0) throw DegenerateMatrix("singular matrix in lattice test");
    IMat2 adj = m.adjugate();
    auto w = adj.apply(cx, cy);
    return (w[0] % dt == 0) && (w[1] % dt == 0);
}

IMat2 hnf_lower(const IMat2& m) {
    if (m.det() == 0) throw DegenerateMatrix("singular matrix has no Hermite form here");
    // columns (a,c) and (b,d); kill the top entry of the second column by
    // integer column operations (Euclid on the top row).
    std::int64_t a = m.a, b = m.b, c = m.c, d = m.d;
    while (b != 0) {
        std::int64_t q = a / b;
        std::int64_t na = b, nc = d;
        std::int64_t nb = a - q * b, nd = c - q * d;
        a = na; c = nc; b = nb; d = nd;
    }
    if (a < 0) { a = -a; c = -c; }
    if (d < 0) { d = -d; }
    return {a, 0, c, d};
}

std::vector<std::array<std::int64_t, 2>> coset_representatives(const IMat2& m) {
    IMat2 h = hnf_lower(m);
    std::vector<std::array<std::int64_t, 2>> reps;
    reps.reserve(static_cast<std::size_t>(h.a * h.d));
    for (std::int64_t i = 0; i < h.a; ++i)
        for (std::int64_t j = 0; j < h.d; ++j)
            reps.push_back({i, j});
    return reps;
}

} // namespace anosov
