#pragma once

#include <string>
#include <vector>

#include "anosov/bundles.hpp"
#include "anosov/grid_field.hpp"
#include "anosov/livsic.hpp"

namespace anosov {

struct DeltaResult {
    double value{1.0};
    int terms{0};
    double tail_theta{0.0};   // measured geometric rate of the increments
    double last_increment{0.0};
};

// Delta^u(x~, y~) = prod_{k=1..K} J^u f(x_{-k}) / J^u f(y_{-k}) along matched
// backward branches (same coset choices). Early-exits once increments drop
// below 1e-12.
DeltaResult delta_u(const ToralEndomorphism& f, const DirectionField& unstable,
                    const BackwardBranch& branch_x, const BackwardBranch& branch_y, int K);

// Delta^s(x, y) = prod_{k>=0} [Jf(f^k x)/Jf(f^k y)] [J^s f(f^k x)/J^s f(f^k y)]
// for y on the local stable leaf of x.
DeltaResult delta_s(const ToralEndomorphism& f, const DirectionField& stable,
                    const TorusPoint& x, const TorusPoint& y, int K);

// Conditional SRB density on a leaf segment: Delta against the segment base,
// normalized to unit mass in arclength.
struct LeafDensity {
    LeafSegment segment;
    std::vector<double> values; // at the segment nodes, integral = 1
    double normalizer{1.0};     // L: integral of the raw Delta values

    double value_at(double s) const; // linear interpolation between nodes
};
LeafDensity unstable_leaf_density(const ToralEndomorphism& f, const DirectionField& unstable,
                                  const LeafSegment& segment, int K);

// Absolutely continuous invariant measure e^{-phi} dm with
// log Jf - log k = phi o f - phi (requires vanishing periodic obstructions).
struct InvariantDensity {
    GridField phi;      // transfer function, mean zero, spectral-backed
    GridField density;  // e^{-phi}, normalized to total mass 1
    double solver_residual{0.0};
};
InvariantDensity invariant_density(const ToralEndomorphism& f, int N = 256, int F = 32);

struct Box {
    double x0, y0, side;
};
// nu(B) by bicubic-density quadrature (64^2 midpoint subsamples).
double box_measure(const GridField& density, const Box& box, int subsamples = 64);
// nu(f^{-1} B) by summing the k preimage branches with the Jacobian change of
// variables.
double box_measure_pullback(const ToralEndomorphism& f, const GridField& density,
                            const Box& box, int subsamples = 64);

// Distinct orbit itineraries over the 1/eps_inv box partition up to time n:
// grid-based (n, eps)-entropy estimate.
double separated_set_entropy(const ToralEndomorphism& f, int n, int eps_inv, int sample_grid);

struct EntropyReport {
    double lambda_u{0.0};       // Birkhoff average along a long orbit
    double lambda_s{0.0};
    double log_k{0.0};
    double sum_defect{0.0};     // |lambda_u + lambda_s - log k|
    double h_plus{0.0};         // = lambda_u (Pesin)
    double h_minus{0.0};        // = log k - lambda_s (inverse Pesin)
    double balance_defect{0.0}; // |h_plus - h_minus|
    double sep_entropy{0.0};    // grid-based estimate, n = sep_n, eps = 1/64
    int sep_n{12};
    int orbit_length{10000};
    int burn_in{100};
    std::uint64_t seed{0};
    std::string to_json() const;
};
EntropyReport entropy_report(const ToralEndomorphism& f, std::uint64_t seed = 7,
                             int orbit_length = 10000, int burn_in = 100, int sep_n = 12,
                             int sep_grid = 2048);

// d >= 3 linear diagnostics: eigenvalue splitting of an integer matrix and
// entropy-style sums over expanding moduli.
struct SpectrumReport {
    int dim{0};
    std::vector<std::pair<double, double>> eigenvalues; // (re, im)
    std::vector<double> moduli;
    int n_expanding{0};
    int n_contracting{0};
    bool hyperbolic{false}; // no modulus within 1e-9 of 1
    double sum_log_expanding{0.0}; // sum of log^+ |beta_i|
    double log_abs_det{0.0};
    std::string to_json() const;
};
SpectrumReport spectrum_diagnostics(const std::vector<std::vector<std::int64_t>>& matrix);

} // namespace anosov
