#include "anosov/model.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

namespace anosov {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

Vec2 TrigVecPoly::eval(const Vec2& u) const {
    Vec2 r;
    for (const auto& t : terms_) {
        double ph = kTwoPi * (t.freq[0] * u.x + t.freq[1] * u.y);
        double c = std::cos(ph), s = std::sin(ph);
        r.x += t.cos_amp.x * c + t.sin_amp.x * s;
        r.y += t.cos_amp.y * c + t.sin_amp.y * s;
    }
    return r;
}

Mat2 TrigVecPoly::jacobian(const Vec2& u) const {
    Mat2 j{0, 0, 0, 0};
    for (const auto& t : terms_) {
        double ph = kTwoPi * (t.freq[0] * u.x + t.freq[1] * u.y);
        double c = std::cos(ph), s = std::sin(ph);
        // d/dx_k of [cos_amp*cos + sin_amp*sin] = 2 pi m_k [-cos_amp*sin + sin_amp*cos]
        double gx = kTwoPi * t.freq[0];
        double gy = kTwoPi * t.freq[1];
        double fx = -t.cos_amp.x * s + t.sin_amp.x * c;
        double fy = -t.cos_amp.y * s + t.sin_amp.y * c;
        j.a += fx * gx;
        j.b += fx * gy;
        j.c += fy * gx;
        j.d += fy * gy;
    }
    return j;
}

double TrigVecPoly::deriv_bound() const {
    double b = 0.0;
    for (const auto& t : terms_) {
        double amp = std::hypot(t.cos_amp.norm(), t.sin_amp.norm());
        double fmax = std::max(std::abs(t.freq[0]), std::abs(t.freq[1]));
        b += kTwoPi * fmax * amp;
    }
    return b;
}

// ---------------------------------------------------------------------------

ToralEndomorphism ToralEndomorphism::linear(const IMat2& A, std::string name) {
    ToralEndomorphism f;
    f.A_ = A;
    f.kind_ = MapKind::Linear;
    f.name_ = std::move(name);
    f.finish_construction();
    return f;
}

ToralEndomorphism ToralEndomorphism::trig(const IMat2& A, TrigVecPoly pert, std::string name) {
    ToralEndomorphism f;
    f.A_ = A;
    f.kind_ = pert.empty() ? MapKind::Linear : MapKind::TrigPerturbation;
    f.pert_ = std::move(pert);
    f.name_ = std::move(name);
    f.finish_construction();
    return f;
}

ToralEndomorphism ToralEndomorphism::conjugated(const IMat2& A, TrigVecPoly warp,
                                                std::string name) {
    ToralEndomorphism f;
    f.A_ = A;
    f.kind_ = MapKind::Conjugated;
    f.warp_ = std::move(warp);
    f.name_ = std::move(name);
    if (f.warp_.deriv_bound() >= 0.3)
        throw ModelError("warp displacement derivative bound must stay below 0.3");
    f.finish_construction();
    return f;
}

void ToralEndomorphism::finish_construction() {
    std::int64_t dt = A_.det();
    degree_ = std::llabs(dt);
    if (degree_ < 2)
        throw ModelError("|det A| must be >= 2 for a non-invertible Anosov endomorphism");
    eig_ = eig_hyperbolic(A_.real()); // throws if an eigenvalue sits on the unit circle
    cosets_ = coset_representatives(A_);
    validate();
}

void ToralEndomorphism::validate() const {
    // local diffeomorphism: Jacobian determinant keeps one sign on a 512^2 grid
    const int n = 512;
    double ref = lift_jacobian({0.0, 0.0}).det();
    if (ref == 0.0) throw ModelError("singular Jacobian at the origin");
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            double dt = lift_jacobian({i / double(n), j / double(n)}).det();
            if (dt == 0.0 || (dt > 0) != (ref > 0))
                throw ModelError("Jacobian determinant vanishes: not a local diffeomorphism");
        }
    }
    // homotopy class: lifted map commutes with deck translations up to A
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        Vec2 u{unif(rng) * 4.0 - 2.0, unif(rng) * 4.0 - 2.0};
        for (std::int64_t cx = -2; cx <= 2; ++cx) {
            for (std::int64_t cy = -2; cy <= 2; ++cy) {
                Vec2 lhs = lift_apply(u + Vec2(double(cx), double(cy)));
                auto ac = A_.apply(cx, cy);
                Vec2 rhs = lift_apply(u) + Vec2(double(ac[0]), double(ac[1]));
                if ((lhs - rhs).norm_inf() > 1e-9)
                    throw ModelError("lift does not satisfy f(u+c) = f(u) + A c");
            }
        }
    }
}

Vec2 ToralEndomorphism::warp_forward(const Vec2& u) const { return u + warp_.eval(u); }

Vec2 ToralEndomorphism::warp_inverse(const Vec2& u) const {
    // Newton for v + warp(v) = u; the displacement is a contraction so the
    // seed u - warp(u) is already close.
    Vec2 v = u - warp_.eval(u);
    for (int it = 0; it < kNewtonCap; ++it) {
        Vec2 r = v + warp_.eval(v) - u;
        if (r.norm_inf() < 1e-13) return v;
        Mat2 j = Mat2::identity() + warp_.jacobian(v);
        v -= j.inverse() * r;
    }
    throw NewtonDivergence("warp inverse did not converge");
}

Mat2 ToralEndomorphism::warp_jacobian(const Vec2& u) const {
    return Mat2::identity() + warp_.jacobian(u);
}

Vec2 ToralEndomorphism::lift_apply(const Vec2& u) const {
    switch (kind_) {
        case MapKind::Linear:
            return A_.real() * u;
        case MapKind::TrigPerturbation:
            return A_.real() * u + pert_.eval(u);
        case MapKind::Conjugated: {
            Vec2 v = warp_inverse(u);
            return warp_forward(A_.real() * v);
        }
    }
    return {};
}

TorusPoint ToralEndomorphism::apply(const TorusPoint& p) const {
    return project(lift_apply(p.lift()));
}

Mat2 ToralEndomorphism::lift_jacobian(const Vec2& u) const {
    switch (kind_) {
        case MapKind::Linear:
            return A_.real();
        case MapKind::TrigPerturbation:
            return A_.real() + pert_.jacobian(u);
        case MapKind::Conjugated: {
            // D(h0 o A o h0^{-1}) = Dh0(A v) A Dh0(v)^{-1},  v = h0^{-1}(u)
            Vec2 v = warp_inverse(u);
            Mat2 inner = warp_jacobian(v).inverse();
            return warp_jacobian(A_.real() * v) * A_.real() * inner;
        }
    }
    return {};
}

Vec2 ToralEndomorphism::invert_lift(const Vec2& q, const Vec2& seed) const {
    if (kind_ == MapKind::Linear) return A_.real().inverse() * q;
    Vec2 u = seed;
    for (int it = 0; it < kNewtonCap; ++it) {
        Vec2 r = lift_apply(u) - q;
        if (r.norm_inf() < kNewtonTol) return u;
        u -= lift_jacobian(u).inverse() * r;
    }
    Vec2 r = lift_apply(u) - q;
    if (r.norm_inf() < kNewtonTol) return u;
    throw NewtonDivergence("lifted inverse Newton exceeded " + std::to_string(kNewtonCap) +
                           " iterations");
}

std::vector<TorusPoint> ToralEndomorphism::preimages(const TorusPoint& p) const {
    std::vector<TorusPoint> out;
    out.reserve(cosets_.size());
    for (int i = 0; i < static_cast<int>(cosets_.size()); ++i)
        out.push_back(preimage_branch(p, i));
    for (std::size_t i = 0; i < out.size(); ++i)
        for (std::size_t j = i + 1; j < out.size(); ++j)
            if (torus_dist(out[i], out[j]) <= 1e-8)
                throw ModelError("preimages collapse; model badly conditioned");
    return out;
}

TorusPoint ToralEndomorphism::preimage_branch(const TorusPoint& p, int coset_index) const {
    const auto& c = cosets_.at(static_cast<std::size_t>(coset_index));
    Vec2 target = p.lift() + Vec2(double(c[0]), double(c[1]));
    Vec2 seed = A_.real().inverse() * target;
    return project(invert_lift(target, seed));
}

// ---- serialization ----------------------------------------------------------

namespace {

nlohmann::json poly_to_json(const TrigVecPoly& p) {
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& t : p.terms()) {
        terms.push_back({{"freq", {t.freq[0], t.freq[1]}},
                         {"cos_amp", {t.cos_amp.x, t.cos_amp.y}},
                         {"sin_amp", {t.sin_amp.x, t.sin_amp.y}}});
    }
    return terms;
}

TrigVecPoly poly_from_json(const nlohmann::json& j) {
    std::vector<TrigTerm> terms;
    for (const auto& t : j) {
        TrigTerm term;
        term.freq = {t.at("freq")[0].get<int>(), t.at("freq")[1].get<int>()};
        term.cos_amp = {t.at("cos_amp")[0].get<double>(), t.at("cos_amp")[1].get<double>()};
        term.sin_amp = {t.at("sin_amp")[0].get<double>(), t.at("sin_amp")[1].get<double>()};
        terms.push_back(term);
    }
    return TrigVecPoly(std::move(terms));
}

} // namespace

std::string ToralEndomorphism::to_json() const {
    nlohmann::json j;
    j["name"] = name_;
    j["linear_part"] = {{A_.a, A_.b}, {A_.c, A_.d}};
    switch (kind_) {
        case MapKind::Linear:
            j["kind"] = "linear";
            break;
        case MapKind::TrigPerturbation:
            j["kind"] = "trig_perturbation";
            j["coefficients"] = poly_to_json(pert_);
            break;
        case MapKind::Conjugated:
            j["kind"] = "conjugated";
            j["warp"] = poly_to_json(warp_);
            break;
    }
    return j.dump(2);
}

ToralEndomorphism ToralEndomorphism::from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    IMat2 A{j.at("linear_part")[0][0].get<std::int64_t>(),
            j.at("linear_part")[0][1].get<std::int64_t>(),
            j.at("linear_part")[1][0].get<std::int64_t>(),
            j.at("linear_part")[1][1].get<std::int64_t>()};
    std::string kind = j.at("kind").get<std::string>();
    std::string name = j.value("name", kind);
    if (kind == "linear") return ToralEndomorphism::linear(A, name);
    if (kind == "trig_perturbation")
        return ToralEndomorphism::trig(A, poly_from_json(j.at("coefficients")), name);
    if (kind == "conjugated")
        return ToralEndomorphism::conjugated(A, poly_from_json(j.at("warp")), name);
    throw ModelError("unknown model kind: " + kind);
}

ToralEndomorphism ToralEndomorphism::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ModelError("cannot open model file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

void ToralEndomorphism::save_file(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw ModelError("cannot write model file: " + path);
    out << to_json() << "\n";
}

} // namespace anosov
