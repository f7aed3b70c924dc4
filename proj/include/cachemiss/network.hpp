#ifndef CACHEMISS_NETWORK_HPP
#define CACHEMISS_NETWORK_HPP

#include "cachemiss/policy.hpp"

#include <cstdint>
#include <vector>

namespace cachemiss {

/* Level description for a copy-back hierarchy driven by an infinite Zipf
 * stream.  Within a level every cache sees a statistically identical stream,
 * so one (policy, size) pair per level is enough for the analytic model.
 * Level 1 is closest to the requesters. */
struct NetworkLevel {
    Policy policy = Policy::rnd;
    std::uint64_t size = 0;
};

struct NetworkPlan {
    std::vector<NetworkLevel> levels;
    double alpha = 2.0;
};

/* Throws std::invalid_argument on an unusable plan.  Size-0 levels are
 * accepted: they forward every request and drop out of the sums. */
void validate_plan(const NetworkPlan& plan);

/* Probability that a rank-r request misses at every level up to `level`
 * (1-based), for a line of rnd or fifo caches.  Adding a level augments the
 * effective size: M_r = rho r^a / (rho r^a + sum_j C_j^a). */
double global_miss_per_object(const NetworkPlan& plan, std::size_t level, double rank);

/* Miss probability at `level` given the request reached it: the ratio of
 * consecutive global rates.  Their product over levels telescopes back to
 * the global rate. */
double local_miss_per_object(const NetworkPlan& plan, std::size_t level, double rank);

/* Request-averaged global miss rate out of `level`, power-law estimate
 * A rho / (sum_j C_j^a)^(1-1/a), clamped to [0, 1]. */
double average_global_miss(const NetworkPlan& plan, std::size_t level);

/* Same average taken literally as sum_{r<=catalog} q_r M_r; no tail term,
 * so it converges to the estimate from below as catalog grows. */
double average_global_miss_catalog(const NetworkPlan& plan, std::size_t level,
                                   std::uint64_t catalog);

struct TandemMiss {
    double level1_global = 1.0;
    double level2_global = 1.0;
    double level2_local = 1.0;
};

/* Two-level tandems mixing policies; only exactly two levels are supported.
 * rnd-then-lru: the first level absorbs rho r^a / (rho r^a + C1^a) and the
 * surviving stream drives an lru stage.  lru-then-rnd: the lru filter thins
 * rank r by exp(-C1^a / (a lambda r^a)) before the rnd stage. */
TandemMiss mixed_tandem_rnd_then_lru(const NetworkPlan& plan, double rank);
TandemMiss mixed_tandem_lru_then_rnd(const NetworkPlan& plan, double rank);

/* Line of lru caches, handled level by level: each level sees the stream
 * thinned by the previous ones, assumed independent across caches.  Each
 * level's time constant T solves sum_r (1 - exp(-rate_r T)) = C, with the
 * far tail of the catalog integrated in closed form. */
struct LruLineProfile {
    std::vector<double> time_constant;              // one per level
    std::vector<std::vector<double>> local_miss;    // [level][i] for ranks[i]
    std::vector<double> global_miss;                // out of the last level
};

LruLineProfile lru_line_profile(const NetworkPlan& plan, const std::vector<double>& ranks);

} // namespace cachemiss

#endif
