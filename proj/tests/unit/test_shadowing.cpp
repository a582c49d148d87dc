#include <doctest.h>

#include <random>

#include "anosov/shadowing.hpp"
#include "models_fixture.hpp"

using namespace anosov;

namespace {

PseudoOrbit noisy_orbit(const PeriodicOrbit& orbit, int copies, double noise,
                        std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> jitter(-noise, noise);
    PseudoOrbit po;
    for (int c = 0; c < copies; ++c)
        for (const auto& p : orbit.points)
            po.points.push_back({p.x + jitter(rng), p.y + jitter(rng)});
    return po;
}

} // namespace

TEST_CASE("an exact periodic orbit shadows itself at distance zero") {
    const auto& f = fixture::conjugated_ref();
    auto orbits = find_periodic(f, 3);
    for (const auto& o : orbits) {
        if (o.period != 3) continue;
        PseudoOrbit po;
        po.points = o.points;
        auto res = closing_lemma_shadow(f, po);
        CHECK(res.shadow_distance < 1e-10);
        CHECK(res.residual < 1e-10);
        CHECK(res.orbit.period == 3);
        break;
    }
}

TEST_CASE("noisy orbits close to true periodic orbits within 1e-2") {
    const auto& f = fixture::trig_eps002();
    auto orbits = find_periodic(f, 3);
    const PeriodicOrbit* o3 = nullptr;
    for (const auto& o : orbits)
        if (o.period == 3) { o3 = &o; break; }
    REQUIRE(o3 != nullptr);
    auto po = noisy_orbit(*o3, 1, 1e-3, 99);
    auto res = closing_lemma_shadow(f, po);
    CHECK(res.shadow_distance <= 1e-2);
    CHECK(res.residual < 1e-10);
    // it recovered the true orbit
    CHECK(torus_dist(res.orbit.points[0], o3->points[0]) < 5e-3);
}

TEST_CASE("shadowing distance scales linearly with the noise") {
    const auto& f = fixture::conjugated_ref();
    auto orbits = find_periodic(f, 2);
    const PeriodicOrbit* o2 = nullptr;
    for (const auto& o : orbits)
        if (o.period == 2) { o2 = &o; break; }
    REQUIRE(o2 != nullptr);
    // same noise vector scaled across three levels
    std::vector<double> dists;
    for (double level : {4e-3, 2e-3, 1e-3}) {
        std::mt19937_64 rng(1234);
        std::uniform_real_distribution<double> jitter(-1.0, 1.0);
        PseudoOrbit po;
        for (int c = 0; c < 3; ++c)
            for (const auto& p : o2->points)
                po.points.push_back({p.x + level * jitter(rng), p.y + level * jitter(rng)});
        dists.push_back(closing_lemma_shadow(f, po).shadow_distance);
    }
    CHECK(dists[1] <= 0.5 * dists[0] * 1.1);
    CHECK(dists[2] <= 0.5 * dists[1] * 1.1);
}

TEST_CASE("closing rejects pseudo-orbits with jumps over gamma") {
    const auto& f = fixture::linear();
    PseudoOrbit po;
    po.points = {{0.0, 0.0}, {0.3, 0.4}};
    CHECK_THROWS(closing_lemma_shadow(f, po, 0.05));
}

TEST_CASE("long cycles go through the splitting solver") {
    const auto& f = fixture::trig_eps002();
    auto orbits = find_periodic(f, 2);
    const PeriodicOrbit* o2 = nullptr;
    for (const auto& o : orbits)
        if (o.period == 2) { o2 = &o; break; }
    REQUIRE(o2 != nullptr);
    auto po = noisy_orbit(*o2, 150, 5e-4, 7); // length 300 > dense threshold
    auto res = closing_lemma_shadow(f, po);
    CHECK(res.cycle_length == 300);
    CHECK(res.residual < 1e-9);
    CHECK(res.shadow_distance < 5e-3);
}

TEST_CASE("lemma 7.1 block schedule: squared lengths under the cap") {
    auto ks = lemma71_schedule(1, 20, 10000);
    REQUIRE(ks.size() >= 2);
    CHECK(ks[0] == 1);
    CHECK(ks[1] == (1 + 20) * (1 + 20));
    long long total = 0;
    for (int k : ks) total += k;
    total += 20ll * ks.size();
    CHECK(total <= 10000);
}

TEST_CASE("specification: same-orbit blocks give flat Birkhoff averages") {
    const auto& f = fixture::conjugated_ref();
    const auto& du = fixture::unstable_field(f);
    const auto& ds = fixture::stable_field(f);
    auto orbits = find_periodic(f, 2);
    const PeriodicOrbit* o2 = nullptr;
    for (const auto& o : orbits)
        if (o.period == 2) { o2 = &o; break; }
    REQUIRE(o2 != nullptr);
    // block lengths and the gap are multiples of the period, so the
    // concatenation continues the orbit seamlessly
    auto res = specification_concatenate(f, du, ds, *o2, *o2, {40, 40}, 20, 0.05);
    for (const auto& blk : res.blocks)
        CHECK(std::fabs(blk.birkhoff_u - o2->lambda_u) < 1e-6);
}

TEST_CASE("specification on the linear model: constant cocycle averages") {
    const auto& f = fixture::linear();
    const auto& du = fixture::unstable_field(f);
    const auto& ds = fixture::stable_field(f);
    auto orbits1 = find_periodic(f, 1);
    auto orbits2 = find_periodic(f, 2);
    const PeriodicOrbit* q = nullptr;
    for (const auto& o : orbits2)
        if (o.period == 2) { q = &o; break; }
    REQUIRE(q != nullptr);
    auto res = specification_concatenate(f, du, ds, orbits1[0], *q, {30, 30, 30, 30}, 12, 0.05);
    CHECK(res.max_seam_jump <= 0.05 + 1e-12);
    for (const auto& blk : res.blocks)
        CHECK(blk.birkhoff_u == doctest::Approx(fixture::lambda_u()).epsilon(1e-9));
}
