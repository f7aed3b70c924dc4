#ifndef CACHEMISS_SIMULATE_HPP
#define CACHEMISS_SIMULATE_HPP

#include "cachemiss/policy.hpp"
#include "cachemiss/popularity.hpp"
#include "cachemiss/rng.hpp"

#include <cstdint>
#include <vector>

namespace cachemiss {

/* One cache under a replacement policy, O(1) per access for all policies.
 * Membership is tracked by rank, ranks being 1..catalog. */
class CacheState {
public:
    CacheState(Policy policy, std::uint64_t capacity, std::uint64_t catalog);

    /* True on hit.  On a miss the object is inserted, evicting per policy
     * once the cache is full.  Capacity 0 always misses. */
    bool access(std::uint32_t rank, SplitMix64& rng);

    bool contains(std::uint32_t rank) const;
    std::uint64_t occupancy() const { return used_; }
    std::uint64_t capacity() const { return capacity_; }
    Policy policy() const { return policy_; }

private:
    Policy policy_;
    std::uint64_t capacity_ = 0;
    std::uint64_t used_ = 0;
    std::vector<std::int32_t> pos_;    // rank-1 -> slot, -1 if absent
    std::vector<std::uint32_t> slot_;  // slot -> rank
    /* lru recency links (slot indexed), fifo uses next_victim_ */
    std::vector<std::int32_t> prev_, next_;
    std::int32_t head_ = -1, tail_ = -1;
    std::uint64_t next_victim_ = 0;

    void touch(std::int32_t s);
    void unlink(std::int32_t s);
    void push_front(std::int32_t s);
};

/* Request fan-in topology: J leaf caches (level 1) sharing one cache per
 * upper level.  J == 1 gives a plain line, L == 1 a single cache.  A request
 * lands on leaf j with probability leaf_weights[j]; a miss walks up the
 * shared chain and a copy is installed at every level that missed. */
struct TopologySpec {
    std::vector<Policy> level_policies;
    std::vector<std::uint64_t> level_sizes;
    std::vector<double> leaf_weights = {1.0};

    std::size_t levels() const { return level_sizes.size(); }
    std::size_t leaves() const { return leaf_weights.size(); }
};

void validate_topology(const TopologySpec& spec);

struct RunConfig {
    std::uint64_t warmup = 0;    // 0: sized from the analytic miss estimate
    std::uint64_t measure = 1000000;
    std::uint64_t seed = 1;
    std::uint32_t rank_cap = 500;  // per-rank counters; higher ranks pool
    std::uint32_t replication_id = 0;
};

/* Counts from one run.  Leaf-level counters aggregate the sibling caches.
 * Index [level][rank-1] for rank <= rank_cap; index [level][rank_cap] pools
 * everything beyond. */
struct MissReport {
    std::vector<std::uint64_t> arrivals;  // per level
    std::vector<std::uint64_t> misses;    // per level
    std::vector<std::vector<std::uint64_t>> rank_arrivals;
    std::vector<std::vector<std::uint64_t>> rank_misses;
    std::uint64_t warmup_requests = 0;
    std::uint64_t measured_requests = 0;
    std::uint64_t seed = 0;
    std::uint32_t rank_cap = 0;
    std::uint32_t replication_id = 0;

    /* misses at `level` / arrivals at `level` */
    double local_miss(std::size_t level) const;
    /* misses at `level` / requests entering the hierarchy */
    double global_miss(std::size_t level) const;
    double local_miss_rank(std::size_t level, std::uint32_t rank) const;
};

MissReport run_topology(const TopologySpec& spec, const PopularityDistribution& dist,
                        const RunConfig& config);

/* Single cache convenience wrapper. */
MissReport run_single(Policy policy, std::uint64_t size, const PopularityDistribution& dist,
                      const RunConfig& config);

struct ReplicationStats {
    double mean = 0.0;
    double stddev = 0.0;
    double stderr_mean = 0.0;
};

/* reps runs seeded seed, seed+1, ...; bitwise reproducible. */
struct ReplicationSummary {
    std::vector<MissReport> runs;
    std::vector<ReplicationStats> local;   // per level
    std::vector<ReplicationStats> global;  // per level
};

ReplicationSummary run_replications(const TopologySpec& spec, const PopularityDistribution& dist,
                                    const RunConfig& config, std::uint32_t reps);

/* Stats over already-collected runs (takes ownership). */
ReplicationSummary summarize_runs(const TopologySpec& spec, std::vector<MissReport> runs);

/* Warmup length used when RunConfig.warmup == 0. */
std::uint64_t default_warmup(const TopologySpec& spec, const PopularityDistribution& dist);

} // namespace cachemiss

#endif
