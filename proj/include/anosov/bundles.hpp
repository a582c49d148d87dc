#pragma once

#include <random>
#include <string>
#include <vector>

#include "anosov/grid_field.hpp"
#include "anosov/model.hpp"

namespace anosov {

// A finite backward orbit x_0, x_{-1}, ..., x_{-N}: one inverse-branch choice
// (coset index) per step. Truncation of an inverse-limit point.
struct BackwardBranch {
    TorusPoint base;
    std::vector<int> choices;      // choices[j] selects the preimage of x_{-j}
    std::vector<TorusPoint> points; // points[j] = x_{-j}, points[0] = base

    int depth() const { return int(choices.size()); }
};

BackwardBranch make_backward_branch(const ToralEndomorphism& f, const TorusPoint& base,
                                    const std::vector<int>& choices);
BackwardBranch zero_branch(const ToralEndomorphism& f, const TorusPoint& base, int depth);
BackwardBranch random_branch(const ToralEndomorphism& f, const TorusPoint& base, int depth,
                             std::mt19937_64& rng);

struct UnstableDirection {
    Vec2 dir;                 // unit vector at the branch base
    double seed_sensitivity;  // angle moved when the depth-N seed is rotated
    double contraction_estimate;
};

// Push the linear unstable eigendirection forward along the branch.
UnstableDirection unstable_direction(const ToralEndomorphism& f, const BackwardBranch& branch);

// Pull the linear stable eigendirection back through Df^{-1} along the
// forward orbit of p. Depends only on p.
Vec2 stable_direction(const ToralEndomorphism& f, const TorusPoint& p, int depth);

// Max pairwise angle between unstable directions over `trials` random branches.
double specialness_spread(const ToralEndomorphism& f, const TorusPoint& p, int depth,
                          int trials, std::mt19937_64& rng);

struct ConeCertificate {
    bool passed{false};
    ConeParams params;
    int grid{0};
    double min_growth_u{0.0};      // min |Df v| over the unstable cone
    double min_growth_s_inv{0.0};  // min |Df^{-1} v| over the stable cone
    double max_image_angle_u{0.0}; // max angle of Df(cone_u) to the unstable axis
    double max_image_angle_s{0.0};
    double margin_u{0.0}; // half_angle_u - max_image_angle_u
    double margin_s{0.0};
    int worst_cell_i{-1}, worst_cell_j{-1};
    std::string failure;

    std::string to_json() const;
};

// Grid check that Df maps the unstable cone strictly inside itself with
// growth >= params.lambda and that the pointwise inverse does the same for
// the stable cone (with growth > 1). Never throws; inspect `passed`.
ConeCertificate certify_cones(const ToralEndomorphism& f, const ConeParams& params,
                              int grid = 256);

// Throwing wrapper used by operations whose preconditions demand an Anosov
// certificate.
void require_certified(const ToralEndomorphism& f, const ConeParams& params, int grid = 256);

// Invariant direction field sampled on a grid with a spectral fit of the
// angle offset for off-grid queries.
class DirectionField {
public:
    enum class Flag { Unstable, Stable };

    static DirectionField compute(const ToralEndomorphism& f, Flag flag, int N, int depth,
                                  int fit_F = 16);

    Vec2 at(const TorusPoint& p) const { return at_lift(p.lift()); }
    Vec2 at_lift(const Vec2& u) const;

    Flag flag() const { return flag_; }
    int N() const { return offsets_.N(); }
    double base_angle() const { return base_angle_; }
    const GridField& offsets() const { return offsets_; }

    // sup over sample points of angle(Df E(x), E(f x))
    double invariance_residual(const ToralEndomorphism& f, int samples,
                               std::mt19937_64& rng) const;

private:
    Flag flag_{Flag::Unstable};
    double base_angle_{0.0}; // angle of the linear eigendirection
    GridField offsets_;      // angle offset from base_angle_, spectral-backed
};

} // namespace anosov
