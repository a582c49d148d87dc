#pragma once

#include <string>
#include <vector>

#include "anosov/bundles.hpp"
#include "anosov/periodic.hpp"

namespace anosov {

// Cyclic pseudo-orbit: jump errors are d(f(x_i), x_{i+1 mod m}).
struct PseudoOrbit {
    std::vector<TorusPoint> points;

    std::vector<double> jumps(const ToralEndomorphism& f) const;
    double max_jump(const ToralEndomorphism& f) const;
};

struct ShadowResult {
    PeriodicOrbit orbit;      // least period extracted
    int cycle_length{0};      // length of the solved cyclic system
    double shadow_distance{0.0};
    double residual{0.0};
    int iterations{0};
    std::vector<TorusPoint> cycle; // the full refined cycle (length = cycle_length)
};

// Refine a nearly-closed pseudo-orbit into a true periodic orbit (Anosov
// closing lemma, constructive). Dense Newton for short cycles, a stable/
// unstable splitting solver for long ones.
ShadowResult closing_lemma_shadow(const ToralEndomorphism& f, const PseudoOrbit& seg,
                                  double gamma = 0.05);

struct SpecBlock {
    char label{'p'};
    int start{0};
    int length{0};
    double birkhoff_u{0.0}; // block average of log |Df restricted to E^u|
    double lambda_u_ref{0.0};
};

struct SpecificationResult {
    ShadowResult shadow;
    std::vector<SpecBlock> blocks;
    int gap{0};
    double eps{0.0};
    double max_seam_jump{0.0};
    std::string to_json() const;
};

// Lemma-7.1 style concatenation: orbit blocks at p and q (alternating, lengths
// as given) joined by bridges of length `gap` found on W^u(tail) cap W^s(head),
// then closed into one true periodic orbit. Total length capped at 10^4.
SpecificationResult specification_concatenate(const ToralEndomorphism& f,
                                              const DirectionField& unstable,
                                              const DirectionField& stable,
                                              const PeriodicOrbit& p, const PeriodicOrbit& q,
                                              const std::vector<int>& block_lengths, int gap,
                                              double eps = 0.05);

// Squared block-length schedule of Lemma 7.1 truncated to the length cap.
std::vector<int> lemma71_schedule(int first_block, int gap, int total_cap = 10000);

} // namespace anosov
