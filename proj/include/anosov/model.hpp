#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "anosov/geometry.hpp"

namespace anosov {

// One real trigonometric term with vector amplitudes:
//   cos_amp * cos(2 pi m.x) + sin_amp * sin(2 pi m.x)
struct TrigTerm {
    std::array<int, 2> freq{0, 0};
    Vec2 cos_amp;
    Vec2 sin_amp;
};

// Finite real trigonometric polynomial R^2 -> R^2, Z^2-periodic.
class TrigVecPoly {
public:
    TrigVecPoly() = default;
    explicit TrigVecPoly(std::vector<TrigTerm> terms) : terms_(std::move(terms)) {}

    Vec2 eval(const Vec2& u) const;
    Mat2 jacobian(const Vec2& u) const;

    bool empty() const { return terms_.empty(); }
    const std::vector<TrigTerm>& terms() const { return terms_; }

    // crude sup bound for ||D (this)||_inf from coefficient sizes
    double deriv_bound() const;

private:
    std::vector<TrigTerm> terms_;
};

enum class MapKind { Linear, TrigPerturbation, Conjugated };

struct ConeParams {
    double half_angle_u{0.3};
    double half_angle_s{0.3};
    double lambda{1.0}; // required minimal expansion on the unstable cone
    double C{1.0};
};

// A degree-k endomorphism of T^2: integer linear part A plus either a
// trigonometric perturbation (f = A x + p(x)) or a conjugated model
// f = h0 o A o h0^{-1} with h0 = id + warp a small trig-polynomial diffeo.
class ToralEndomorphism {
public:
    static ToralEndomorphism linear(const IMat2& A, std::string name = "linear");
    static ToralEndomorphism trig(const IMat2& A, TrigVecPoly pert, std::string name = "trig");
    static ToralEndomorphism conjugated(const IMat2& A, TrigVecPoly warp,
                                        std::string name = "conjugated");

    // --- evaluation -----------------------------------------------------
    Vec2 lift_apply(const Vec2& u) const;
    TorusPoint apply(const TorusPoint& p) const;
    Mat2 lift_jacobian(const Vec2& u) const;
    Mat2 jacobian(const TorusPoint& p) const { return lift_jacobian(p.lift()); }

    // Newton inverse of the lift; seed must sit near the wanted preimage.
    Vec2 invert_lift(const Vec2& q, const Vec2& seed) const;

    // All k preimages of p, ordered by the canonical coset list.
    std::vector<TorusPoint> preimages(const TorusPoint& p) const;
    // The single preimage selected by a coset index (same ordering).
    TorusPoint preimage_branch(const TorusPoint& p, int coset_index) const;

    // --- warp access (Conjugated only) -----------------------------------
    Vec2 warp_forward(const Vec2& u) const;  // h0 lift
    Vec2 warp_inverse(const Vec2& u) const;  // h0^{-1} lift, Newton
    Mat2 warp_jacobian(const Vec2& u) const; // D h0

    // --- inspection -------------------------------------------------------
    const IMat2& linear_part() const { return A_; }
    MapKind kind() const { return kind_; }
    std::int64_t degree() const { return degree_; }
    const EigenSplit& eigen() const { return eig_; }
    const std::vector<std::array<std::int64_t, 2>>& cosets() const { return cosets_; }
    const std::string& name() const { return name_; }
    const TrigVecPoly& perturbation() const { return pert_; }
    const TrigVecPoly& warp() const { return warp_; }

    // --- serialization (documented schema, exact round-trip) --------------
    std::string to_json() const;
    static ToralEndomorphism from_json(const std::string& text);
    static ToralEndomorphism load_file(const std::string& path);
    void save_file(const std::string& path) const;

    static constexpr int kNewtonCap = 50;
    static constexpr double kNewtonTol = 1e-12;

private:
    ToralEndomorphism() = default;
    void finish_construction();
    void validate() const;

    IMat2 A_;
    MapKind kind_{MapKind::Linear};
    TrigVecPoly pert_;
    TrigVecPoly warp_;
    std::int64_t degree_{0};
    EigenSplit eig_;
    std::vector<std::array<std::int64_t, 2>> cosets_;
    std::string name_;
};

} // namespace anosov
