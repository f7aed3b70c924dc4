#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "cachemiss/simulate.hpp"
#include "cachemiss/single_cache.hpp"

using namespace cachemiss;

TEST_CASE("lru cache evicts the least recently used rank") {
    SplitMix64 rng(1);
    CacheState c(Policy::lru, 2, 5);
    CHECK_FALSE(c.access(1, rng));
    CHECK_FALSE(c.access(2, rng));
    CHECK(c.access(1, rng));          // refreshes rank 1
    CHECK_FALSE(c.access(3, rng));    // evicts rank 2
    CHECK(c.contains(1));
    CHECK_FALSE(c.contains(2));
    CHECK(c.contains(3));
    CHECK_FALSE(c.access(2, rng));    // evicts rank 1 (3 was touched later)
    CHECK_FALSE(c.contains(1));
    CHECK(c.contains(3));
    CHECK(c.occupancy() == 2);
}

TEST_CASE("fifo cache evicts in insertion order regardless of hits") {
    SplitMix64 rng(1);
    CacheState c(Policy::fifo, 2, 6);
    c.access(1, rng);
    c.access(2, rng);
    CHECK(c.access(1, rng));          // hit must not refresh insertion order
    CHECK_FALSE(c.access(3, rng));    // evicts rank 1
    CHECK_FALSE(c.contains(1));
    CHECK(c.contains(2));
    CHECK_FALSE(c.access(4, rng));    // evicts rank 2
    CHECK_FALSE(c.contains(2));
    CHECK(c.contains(3));
    CHECK(c.contains(4));
}

TEST_CASE("random eviction keeps occupancy at capacity") {
    SplitMix64 rng(99);
    CacheState c(Policy::rnd, 3, 10);
    for (std::uint32_t i = 0; i < 400; ++i) c.access(i % 10 + 1, rng);
    CHECK(c.occupancy() == 3);
    int resident = 0;
    for (std::uint32_t r = 1; r <= 10; ++r) resident += c.contains(r) ? 1 : 0;
    CHECK(resident == 3);
}

TEST_CASE("capacity zero always misses and holds nothing") {
    SplitMix64 rng(3);
    CacheState c(Policy::lru, 0, 4);
    for (int i = 0; i < 8; ++i) CHECK_FALSE(c.access(1, rng));
    CHECK(c.occupancy() == 0);
}

TEST_CASE("capacity is clamped to the catalog") {
    SplitMix64 rng(3);
    CacheState c(Policy::rnd, 100, 4);
    CHECK(c.capacity() == 4);
    for (std::uint32_t r = 1; r <= 4; ++r) CHECK_FALSE(c.access(r, rng));
    for (std::uint32_t r = 1; r <= 4; ++r) CHECK(c.access(r, rng));  // nothing evicted
}

TEST_CASE("topology validation") {
    TopologySpec bad;
    bad.level_policies = {Policy::rnd};
    bad.level_sizes = {10, 20};
    CHECK_THROWS_AS(validate_topology(bad), std::invalid_argument);

    TopologySpec unnormalized;
    unnormalized.level_policies = {Policy::rnd};
    unnormalized.level_sizes = {10};
    unnormalized.leaf_weights = {0.5, 0.4};
    CHECK_THROWS_AS(validate_topology(unnormalized), std::invalid_argument);

    TopologySpec ok;
    ok.level_policies = {Policy::rnd, Policy::lru};
    ok.level_sizes = {10, 20};
    ok.leaf_weights = {0.5, 0.5};
    CHECK_NOTHROW(validate_topology(ok));
}

TEST_CASE("single-run counters are conserved") {
    auto d = make_zipf(1.5, 500);
    RunConfig cfg;
    cfg.warmup = 20000;
    cfg.measure = 200000;
    cfg.seed = 11;
    cfg.rank_cap = 50;
    auto rep = run_single(Policy::rnd, 20, d, cfg);

    CHECK(rep.arrivals[0] == cfg.measure);
    CHECK(rep.measured_requests == cfg.measure);
    CHECK(rep.warmup_requests == cfg.warmup);
    CHECK(rep.misses[0] <= rep.arrivals[0]);

    std::uint64_t arr = 0, mis = 0;
    for (std::size_t i = 0; i <= rep.rank_cap; ++i) {
        arr += rep.rank_arrivals[0][i];
        mis += rep.rank_misses[0][i];
        CHECK(rep.rank_misses[0][i] <= rep.rank_arrivals[0][i]);
    }
    CHECK(arr == rep.arrivals[0]);
    CHECK(mis == rep.misses[0]);
    CHECK(rep.local_miss(0) == doctest::Approx(double(rep.misses[0]) / rep.arrivals[0]));
    CHECK(rep.global_miss(0) == rep.local_miss(0));
}

TEST_CASE("tree arrivals chain through leaf misses") {
    TopologySpec spec;
    spec.level_policies = {Policy::rnd, Policy::rnd};
    spec.level_sizes = {10, 30};
    spec.leaf_weights = {0.6, 0.4};
    auto d = make_zipf(1.5, 500);
    RunConfig cfg;
    cfg.warmup = 20000;
    cfg.measure = 150000;
    cfg.seed = 5;
    cfg.rank_cap = 20;
    auto rep = run_topology(spec, d, cfg);

    REQUIRE(rep.arrivals.size() == 2);
    CHECK(rep.arrivals[0] == cfg.measure);
    CHECK(rep.arrivals[1] == rep.misses[0]);  // each leaf miss walks up
    CHECK(rep.misses[1] <= rep.arrivals[1]);
    CHECK(rep.global_miss(1) ==
          doctest::Approx(double(rep.misses[1]) / cfg.measure).epsilon(1e-15));
}

TEST_CASE("runs are bitwise reproducible for a fixed seed") {
    TopologySpec spec;
    spec.level_policies = {Policy::lru, Policy::rnd};
    spec.level_sizes = {8, 16};
    auto d = make_zipf(1.7, 300);
    RunConfig cfg;
    cfg.warmup = 5000;
    cfg.measure = 50000;
    cfg.seed = 31;
    auto a = run_topology(spec, d, cfg);
    auto b = run_topology(spec, d, cfg);
    CHECK(a.misses == b.misses);
    CHECK(a.rank_misses == b.rank_misses);

    cfg.seed = 32;
    auto c = run_topology(spec, d, cfg);
    CHECK(a.rank_misses != c.rank_misses);
}

TEST_CASE("replications reuse the per-seed runs and summarize them") {
    auto d = make_zipf(1.5, 400);
    TopologySpec spec;
    spec.level_policies = {Policy::rnd};
    spec.level_sizes = {15};
    RunConfig cfg;
    cfg.warmup = 10000;
    cfg.measure = 60000;
    cfg.seed = 100;
    auto sum = run_replications(spec, d, cfg, 4);
    REQUIRE(sum.runs.size() == 4);

    for (std::uint32_t i = 0; i < 4; ++i) {
        RunConfig one = cfg;
        one.seed = cfg.seed + i;
        one.replication_id = i;
        auto solo = run_topology(spec, d, one);
        CHECK(sum.runs[i].misses == solo.misses);
        CHECK(sum.runs[i].seed == one.seed);
        CHECK(sum.runs[i].replication_id == i);
    }

    double mean = 0.0;
    for (const auto& r : sum.runs) mean += r.local_miss(0);
    mean /= 4.0;
    CHECK(sum.local[0].mean == doctest::Approx(mean).epsilon(1e-14));
    CHECK(sum.local[0].stddev > 0.0);
    CHECK(sum.local[0].stderr_mean == doctest::Approx(sum.local[0].stddev / 2.0).epsilon(1e-14));
}

TEST_CASE("default warmup is generous") {
    TopologySpec spec;
    spec.level_policies = {Policy::rnd};
    spec.level_sizes = {25};
    auto d = make_zipf(1.7, 20000);
    CHECK(default_warmup(spec, d) >= 1000000);
    RunConfig cfg;
    cfg.warmup = 0;
    cfg.measure = 1000;
    auto rep = run_single(Policy::rnd, 25, d, cfg);
    CHECK(rep.warmup_requests == default_warmup(spec, d));
}

TEST_CASE("simulated miss rate agrees with the exact formula") {
    auto d = make_zipf(1.7, 2000);
    double exact = miss_rate_exact(d, 20);
    RunConfig cfg;
    cfg.warmup = 200000;
    cfg.measure = 1000000;
    cfg.seed = 8675309;
    auto rep = run_single(Policy::rnd, 20, d, cfg);
    double se = std::sqrt(exact * (1.0 - exact) / double(cfg.measure));
    CHECK(std::abs(rep.local_miss(0) - exact) < 5.0 * se);
}

TEST_CASE("per-rank miss concentrates on unpopular ranks") {
    auto d = make_zipf(1.7, 2000);
    RunConfig cfg;
    cfg.warmup = 100000;
    cfg.measure = 400000;
    cfg.seed = 4;
    cfg.rank_cap = 100;
    auto rep = run_single(Policy::lru, 20, d, cfg);
    double head = rep.local_miss_rank(0, 1);
    double tail = rep.local_miss_rank(0, 90);
    CHECK(head < 0.05);
    CHECK(tail > 0.5);
}
