#pragma once

#include <optional>
#include <vector>

#include "anosov/bundles.hpp"
#include "anosov/grid_field.hpp"
#include "anosov/periodic.hpp"

namespace anosov {

// Arclength-parametrized segment of a stable/unstable leaf. Nodes are spaced
// by the tracer step; tangents stored for dense (Hermite) evaluation.
struct LeafSegment {
    TorusPoint base;
    DirectionField::Flag flag{DirectionField::Flag::Unstable};
    double step{1e-3};
    std::vector<double> s;        // arclength parameters, s[0] = 0
    std::vector<Vec2> lift_pts;   // lifted points along the traced curve
    std::vector<Vec2> tangents;   // unit tangents at the nodes

    double length() const { return s.empty() ? 0.0 : s.back() - s.front(); }
    TorusPoint point_at(double t) const { return project(lift_at(t)); }
    Vec2 lift_at(double t) const;    // cubic Hermite between nodes
    Vec2 tangent_at(double t) const;
};

// Trace the leaf through `start` following the direction field for a signed
// arclength `length` (orientation = sign). Fixed-step RK4, step 1e-3.
LeafSegment trace_leaf(const ToralEndomorphism& f, const DirectionField& field,
                       const TorusPoint& start, double length, double step = 1e-3);

// Two-sided window [-half_length, +half_length] through `center`.
LeafSegment trace_leaf_window(const ToralEndomorphism& f, const DirectionField& field,
                              const TorusPoint& center, double half_length,
                              double step = 1e-3);

// Trace from `a` (both orientations if needed) until hitting `b`; returns the
// segment from a to b and the signed arclength of b. Throws LeafTraceFailure
// if b is not met within max_length or misses the leaf transversally.
struct LeafHit {
    LeafSegment segment;
    double s_b;
};
LeafHit trace_leaf_to(const ToralEndomorphism& f, const DirectionField& field,
                      const TorusPoint& a, const TorusPoint& b, double max_length = 5.0,
                      double step = 1e-3);

// psi(x) = log |Df(x)| E^u(x)| - lambda_u on an N x N grid; checks the Livsic
// obstruction (zero means over periodic orbits up to `orbit_periods`).
struct ObservableResult {
    GridField psi;
    double lambda_u;                     // common periodic value used
    double max_periodic_mean;            // worst |orbit mean| seen
};
ObservableResult observable_log_unstable(const ToralEndomorphism& f,
                                         const DirectionField& unstable, int N,
                                         int orbit_periods = 3);

// Least-squares trig-polynomial solve of  phi(f x) - phi(x) = psi(x)  over the
// sample grid, mean-zero normalization. Multi-level warm start + CGNR.
struct CohomologySolution {
    GridField phi;        // spectral-backed
    double sup_residual;  // max |phi(f x) - phi(x) - psi(x)| on the grid
    double rms_residual;
    int iterations;
    int F;
};
CohomologySolution solve_cohomology(const ToralEndomorphism& f, const GridField& psi, int F,
                                    double sup_residual_gate = 1e-3);

// d^u(a,b) = integral of e^{-phi_u} over the traced leaf arc from a to b.
double conformal_distance(const ToralEndomorphism& f, const GridField& phi_u,
                          const DirectionField& unstable, const TorusPoint& a,
                          const TorusPoint& b, double max_length = 5.0);

// Same integral along a pre-traced segment between arclength bounds.
double conformal_length(const LeafSegment& seg, const GridField& phi_u, double s0, double s1);

} // namespace anosov
