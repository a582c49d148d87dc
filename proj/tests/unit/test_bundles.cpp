#include <doctest.h>

#include <random>

#include "anosov/bundles.hpp"
#include "models_fixture.hpp"

using namespace anosov;

TEST_CASE("unstable direction of the linear model is the eigenvector") {
    const auto& f = fixture::linear();
    std::mt19937_64 rng(1);
    for (int t = 0; t < 5; ++t) {
        TorusPoint p{t * 0.17, t * 0.31};
        auto br = random_branch(f, p, 30, rng);
        auto d = unstable_direction(f, br);
        CHECK(line_angle(d.dir, f.eigen().e_u) < 1e-12);
    }
}

TEST_CASE("unstable direction of the conjugated model matches the chain rule") {
    const auto& f = fixture::conjugated_ref();
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int t = 0; t < 10; ++t) {
        Vec2 q{unif(rng), unif(rng)};
        TorusPoint p = project(f.warp_forward(q));
        // E^u at h0(q) is Dh0(q) e_u(A), normalized
        Vec2 expect = (f.warp_jacobian(q) * f.eigen().e_u).normalized();
        auto d = unstable_direction(f, zero_branch(f, p, 30));
        CHECK(line_angle(d.dir, expect) < 1e-9);
    }
}

TEST_CASE("two branches at one base agree for special models") {
    std::mt19937_64 rng(3);
    for (const ToralEndomorphism* f : {&fixture::linear(), &fixture::conjugated_ref()}) {
        TorusPoint p{0.23, 0.71};
        auto d1 = unstable_direction(*f, random_branch(*f, p, 30, rng));
        auto d2 = unstable_direction(*f, random_branch(*f, p, 30, rng));
        CHECK(line_angle(d1.dir, d2.dir) < 1e-10);
    }
}

TEST_CASE("specialness spread: linear < 1e-10, conjugated < 1e-6 at depth 30") {
    std::mt19937_64 rng(4);
    CHECK(specialness_spread(fixture::linear(), {0.4, 0.9}, 30, 6, rng) < 1e-10);
    CHECK(specialness_spread(fixture::conjugated_ref(), {0.4, 0.9}, 30, 6, rng) < 1e-6);
    // generic model: exploratory, just has to produce a finite number
    double s = specialness_spread(fixture::trig_eps005(), {0.4, 0.9}, 30, 6, rng);
    CHECK(s >= 0.0);
    CHECK(s < 1.0);
}

TEST_CASE("stable direction: linear eigenvector, branch-free, invariant") {
    const auto& fl = fixture::linear();
    CHECK(line_angle(stable_direction(fl, {0.2, 0.6}, 40), fl.eigen().e_s) < 1e-12);

    const auto& f = fixture::conjugated_ref();
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int t = 0; t < 10; ++t) {
        TorusPoint p{unif(rng), unif(rng)};
        Vec2 v40 = stable_direction(f, p, 40);
        Vec2 v55 = stable_direction(f, p, 55);
        CHECK(line_angle(v40, v55) < 1e-10); // depth independence
        // Df-invariance
        Vec2 w = (f.jacobian(p) * v40).normalized();
        CHECK(line_angle(w, stable_direction(f, f.apply(p), 40)) < 1e-8);
    }
}

TEST_CASE("stable direction of the conjugated model via the chain rule") {
    const auto& f = fixture::conjugated_ref();
    Vec2 q{0.35, 0.62};
    TorusPoint p = project(f.warp_forward(q));
    Vec2 expect = (f.warp_jacobian(q) * f.eigen().e_s).normalized();
    CHECK(line_angle(stable_direction(f, p, 45), expect) < 1e-9);
}

TEST_CASE("seed independence inside the certified cone") {
    const auto& f = fixture::conjugated_ref();
    TorusPoint p{0.15, 0.85};
    auto br = zero_branch(f, p, 30);
    auto base = unstable_direction(f, br);
    CHECK(base.seed_sensitivity < 1e-8);
    CHECK(base.contraction_estimate < 0.5);
}

TEST_CASE("cone certificate: linear model passes with lambda >= 3") {
    ConeParams params{0.3, 0.3, 3.0, 1.0};
    auto cert = certify_cones(fixture::linear(), params, 64);
    CHECK(cert.passed);
    CHECK(cert.min_growth_u >= 3.0);
    CHECK(cert.min_growth_s_inv > 1.0);
    CHECK(cert.margin_u > 0.0);
    // zero-amplitude trig model certifies with the same margins
    auto cert0 = certify_cones(fixture::trig_eps000(), params, 64);
    CHECK(cert0.min_growth_u == doctest::Approx(cert.min_growth_u).epsilon(1e-12));
    CHECK(cert0.max_image_angle_u == doctest::Approx(cert.max_image_angle_u).epsilon(1e-9));
}

TEST_CASE("cone certificate: eps = 0.05 passes, large amplitude fails") {
    ConeParams params{0.3, 0.3, 3.0, 1.0};
    auto cert = certify_cones(fixture::trig_eps005(), params, 64);
    CHECK(cert.passed);

    // scale the same perturbation ten times harder: growth drops under lambda
    std::vector<TrigTerm> big;
    for (const auto& t : fixture::trig_eps005().perturbation().terms()) {
        TrigTerm s = t;
        s.cos_amp = s.cos_amp * 10.0;
        s.sin_amp = s.sin_amp * 10.0;
        big.push_back(s);
    }
    auto fbig = ToralEndomorphism::trig(IMat2{3, 1, 1, 1}, TrigVecPoly(big), "eps050");
    auto cbig = certify_cones(fbig, params, 64);
    CHECK_FALSE(cbig.passed);
    CHECK(cbig.worst_cell_i >= 0);
    CHECK_THROWS_AS(require_certified(fbig, params, 64), CertificationFailed);
}

TEST_CASE("growth along computed bundles obeys the certified rates") {
    const auto& f = fixture::trig_eps002();
    ConeParams params{0.3, 0.3, 3.0, 1.0};
    auto cert = certify_cones(f, params, 64);
    REQUIRE(cert.passed);
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int t = 0; t < 10; ++t) {
        TorusPoint p{unif(rng), unif(rng)};
        Vec2 vu = unstable_direction(f, zero_branch(f, p, 24)).dir;
        Vec2 vs = stable_direction(f, p, 40);
        TorusPoint cur = p;
        Vec2 wu = vu, ws = vs;
        double gu = 1.0, gs = 1.0;
        for (int n = 1; n <= 20; ++n) {
            Mat2 J = f.jacobian(cur);
            wu = J * wu;
            ws = J * ws;
            gu = wu.norm();
            gs = ws.norm();
            wu = wu.normalized();
            ws = ws.normalized();
            // per-step rates certified over the cones give C^{-1} lambda^n
            // along the orbit with C = 1
            CHECK(gu >= cert.min_growth_u - 1e-9);
            CHECK(gs <= 1.0 / cert.min_growth_s_inv + 1e-9);
            cur = f.apply(cur);
        }
    }
}

TEST_CASE("direction field queries agree with pointwise computations") {
    const auto& f = fixture::conjugated_ref();
    const auto& du = fixture::unstable_field(f);
    const auto& ds = fixture::stable_field(f);
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int t = 0; t < 12; ++t) {
        TorusPoint p{unif(rng), unif(rng)};
        CHECK(line_angle(du.at(p), unstable_direction(f, zero_branch(f, p, 24)).dir) < 1e-8);
        CHECK(line_angle(ds.at(p), stable_direction(f, p, 32)) < 1e-8);
    }
    CHECK(du.invariance_residual(f, 200, rng) < 1e-8);
    CHECK(ds.invariance_residual(f, 200, rng) < 1e-8);
}
