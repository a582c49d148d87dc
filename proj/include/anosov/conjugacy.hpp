#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "anosov/grid_field.hpp"
#include "anosov/livsic.hpp"
#include "anosov/srb.hpp"

namespace anosov {

// h = id + u with h o A = f o h; u is the Z^2-periodic displacement sampled on
// an odd lattice (the lattice is invariant under A when gcd(det A, N) = 1, so
// the fixed-point sweeps need no interpolation).
class ConjugacyMap {
public:
    ConjugacyMap() = default;
    ConjugacyMap(GridField ux, GridField uy, double residual, int sweeps);

    Vec2 displacement(const TorusPoint& p) const {
        return {ux_.sample(p), uy_.sample(p)};
    }
    Vec2 apply_lift(const Vec2& x) const {
        TorusPoint p = project(x);
        return x + Vec2{ux_.sample(p), uy_.sample(p)};
    }
    TorusPoint apply(const TorusPoint& p) const { return project(apply_lift(p.lift())); }

    int N() const { return ux_.N(); }
    double residual() const { return residual_; }
    int sweeps() const { return sweeps_; }
    double displacement_sup() const;
    const GridField& ux() const { return ux_; }
    const GridField& uy() const { return uy_; }

    void save(const std::string& path_prefix) const;
    static ConjugacyMap load(const std::string& path_prefix);

private:
    GridField ux_, uy_;
    double residual_{0.0};
    int sweeps_{0};
};

struct ConjugacyOptions {
    int N = 257;             // odd, coprime to det A
    int max_sweeps = 500;
    double tol = 1e-10;      // sup-norm of the sweep update
    int fit_F = 24;          // spectral fit order for off-lattice queries
    int residual_grid = 512; // residual check resolution
    double init_amplitude = 0.0; // random initial displacement (uniqueness probes)
    std::uint64_t init_seed = 0;
};

// Fixed-point construction: stable/unstable split of the displacement along
// A's eigenbasis, forward/backward substitution sweeps on the lattice.
ConjugacyMap base_conjugacy(const ToralEndomorphism& f, const ConjugacyOptions& opts = {});

// Map of an A-leaf interval onto the f-leaf through b0 = h(a0) built from the
// arclength ODE z' = e^{phi_u(z) + kappa}; kappa normalizes d^u(b0, b1) to the
// Euclidean anchor spacing.
struct LeafMap {
    std::vector<double> thetas; // parameter along the A-leaf, from a0
    std::vector<double> arcs;   // arclength position on the traced f-leaf
    std::vector<TorusPoint> points;
    LeafSegment leaf;
    double kappa{0.0};
    double anchor_miss{0.0};    // |z(theta_end) - arc(b1)|
};
LeafMap leaf_ode_conjugacy(const ToralEndomorphism& f, const GridField& phi_u,
                           const DirectionField& unstable, const TorusPoint& b0,
                           const TorusPoint& b1, double theta_len, int samples = 200);

// Theorem-A style transport: x' = rho_src(t) / rho_dst(x) between matched
// unstable segments carrying normalized conditional densities.
struct DensityMap {
    std::vector<double> t;   // arclength on the source segment
    std::vector<double> x;   // arclength on the target segment
    std::vector<TorusPoint> points;
    double transport_defect{0.0}; // sup over samples of the mass mismatch
    double anchor_miss{0.0};
};
DensityMap density_ratio_conjugacy(const LeafDensity& rho_src, const LeafDensity& rho_dst,
                                   int samples = 200);

struct RegularityEstimate {
    std::vector<double> scales;    // dyadic probe scales
    std::vector<double> quotients; // mean |H(c+d) - H(c-d)| / 2d over probes
    double derivative{0.0};        // finest-scale quotient
    double holder_exponent{0.0};   // log-log fit of successive quotient gaps
    double r2{0.0};
    bool degenerate{false}; // gaps at the noise floor
    bool non_c1{false};     // quotients fail to stabilize
    std::string to_json() const;
};

// Leafwise difference quotients of h along an A-eigendirection at dyadic
// scales 2^-3 .. 2^-10.
RegularityEstimate regularity_estimate(const ConjugacyMap& h, const ToralEndomorphism& f,
                                       DirectionField::Flag flag, int probes = 24,
                                       std::uint64_t seed = 11);

} // namespace anosov
