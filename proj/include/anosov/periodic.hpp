#pragma once

#include <cstdint>
#include <vector>

#include "anosov/model.hpp"

namespace anosov {

struct PeriodicOrbit {
    int period{0};                  // least period
    std::vector<TorusPoint> points; // f(points[i]) = points[(i+1) mod period]
    double lambda_u{0.0};
    double lambda_s{0.0};
};

// |det(A^n - I)|: the number of n-periodic points of A on T^2.
std::int64_t linear_periodic_count(const IMat2& A, int n);

// Rational orbit of the linear model: numerators over a common denominator.
struct LatticeOrbit {
    std::int64_t den{1};
    std::vector<std::array<std::int64_t, 2>> nums; // length = least period
};

// All A-orbits of least period exactly n (exact integer arithmetic).
std::vector<LatticeOrbit> linear_periodic_orbits(const IMat2& A, int n);

// Newton refinement of a cyclic orbit seed. `offsets` are the integer deck
// transformations c_i with lift f(u_i) = u_{i+1} + c_i.
std::vector<Vec2> refine_periodic_lift(const ToralEndomorphism& f,
                                       const std::vector<Vec2>& seed,
                                       const std::vector<std::array<std::int64_t, 2>>& offsets,
                                       double tol = 1e-12, int max_iter = 50);

// Continuation of every A-orbit with least period dividing n into an f-orbit.
// Lyapunov data is filled in. Throws CountMismatch if the census disagrees
// with |det(A^n - I)|.
std::vector<PeriodicOrbit> find_periodic(const ToralEndomorphism& f, int n);

// Per-step unstable/stable directions along a periodic orbit (eigenvectors of
// the period-return derivative, transported by Df).
struct OrbitBundle {
    std::vector<Vec2> e_u;
    std::vector<Vec2> e_s;
};
OrbitBundle periodic_bundle(const ToralEndomorphism& f, const std::vector<TorusPoint>& points);

// (lambda_u, lambda_s) at a periodic orbit; also verifies
// lambda_u + lambda_s = (1/n) sum log |det Df| to 1e-9.
std::pair<double, double> lyapunov_at(const ToralEndomorphism& f, const PeriodicOrbit& orbit);

// max over orbits of |lambda*_f - lambda*_A|: the periodic-data defect.
double periodic_data_defect(const ToralEndomorphism& f, const std::vector<PeriodicOrbit>& orbits);

} // namespace anosov
