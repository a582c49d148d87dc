#pragma once

#include <cmath>
#include <map>
#include <string>

#include "anosov/bundles.hpp"
#include "anosov/model.hpp"

namespace fixture {

inline std::string model_path(const std::string& name) {
    return std::string(ANOSOV_MODELS_DIR) + "/" + name + ".json";
}

inline const anosov::ToralEndomorphism& linear() {
    static anosov::ToralEndomorphism f =
        anosov::ToralEndomorphism::load_file(model_path("linear"));
    return f;
}

inline const anosov::ToralEndomorphism& trig_eps000() {
    static anosov::ToralEndomorphism f =
        anosov::ToralEndomorphism::load_file(model_path("trig_eps000"));
    return f;
}

inline const anosov::ToralEndomorphism& trig_eps002() {
    static anosov::ToralEndomorphism f =
        anosov::ToralEndomorphism::load_file(model_path("trig_eps002"));
    return f;
}

inline const anosov::ToralEndomorphism& trig_eps005() {
    static anosov::ToralEndomorphism f =
        anosov::ToralEndomorphism::load_file(model_path("trig_eps005"));
    return f;
}

inline const anosov::ToralEndomorphism& conjugated_ref() {
    static anosov::ToralEndomorphism f =
        anosov::ToralEndomorphism::load_file(model_path("conjugated_ref"));
    return f;
}

// eigen data of A = [[3,1],[1,1]]: mu = 2 +- sqrt(2)
inline double mu_u() { return 2.0 + std::sqrt(2.0); }
inline double mu_s() { return 2.0 - std::sqrt(2.0); }
inline double lambda_u() { return std::log(mu_u()); }
inline double lambda_s() { return std::log(mu_s()); }

// direction fields are expensive for the warped models; build once
inline const anosov::DirectionField& unstable_field(const anosov::ToralEndomorphism& f,
                                                    int N = 64, int depth = 24) {
    static std::map<std::string, anosov::DirectionField> cache;
    std::string key = f.name() + "_u_" + std::to_string(N);
    auto it = cache.find(key);
    if (it == cache.end())
        it = cache
                 .emplace(key, anosov::DirectionField::compute(
                                   f, anosov::DirectionField::Flag::Unstable, N, depth))
                 .first;
    return it->second;
}

inline const anosov::DirectionField& stable_field(const anosov::ToralEndomorphism& f,
                                                  int N = 64, int depth = 32) {
    static std::map<std::string, anosov::DirectionField> cache;
    std::string key = f.name() + "_s_" + std::to_string(N);
    auto it = cache.find(key);
    if (it == cache.end())
        it = cache
                 .emplace(key, anosov::DirectionField::compute(
                                   f, anosov::DirectionField::Flag::Stable, N, depth))
                 .first;
    return it->second;
}

} // namespace fixture
