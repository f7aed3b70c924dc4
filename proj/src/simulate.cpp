#include "cachemiss/simulate.hpp"

#include "cachemiss/numeric.hpp"
#include "cachemiss/single_cache.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cachemiss {

CacheState::CacheState(Policy policy, std::uint64_t capacity, std::uint64_t catalog)
    : policy_(policy), capacity_(capacity) {
    if (catalog == 0 || catalog > (std::uint64_t(1) << 31))
        throw std::invalid_argument("cache: catalog out of range");
    capacity_ = std::min(capacity_, catalog);  // more slots than objects is inert
    pos_.assign(catalog, -1);
    slot_.assign(capacity_, 0);
    if (policy_ == Policy::lru) {
        prev_.assign(capacity_, -1);
        next_.assign(capacity_, -1);
    }
}

void CacheState::unlink(std::int32_t s) {
    if (prev_[s] >= 0) next_[prev_[s]] = next_[s]; else head_ = next_[s];
    if (next_[s] >= 0) prev_[next_[s]] = prev_[s]; else tail_ = prev_[s];
}

void CacheState::push_front(std::int32_t s) {
    prev_[s] = -1;
    next_[s] = head_;
    if (head_ >= 0) prev_[head_] = s;
    head_ = s;
    if (tail_ < 0) tail_ = s;
}

void CacheState::touch(std::int32_t s) {
    if (head_ == s)
        return;
    unlink(s);
    push_front(s);
}

bool CacheState::contains(std::uint32_t rank) const {
    return pos_[rank - 1] >= 0;
}

bool CacheState::access(std::uint32_t rank, SplitMix64& rng) {
    if (capacity_ == 0)
        return false;
    std::int32_t s = pos_[rank - 1];
    if (s >= 0) {
        if (policy_ == Policy::lru)
            touch(s);
        return true;
    }
    if (used_ < capacity_) {
        s = std::int32_t(used_++);
    } else {
        switch (policy_) {
        case Policy::rnd:
            s = std::int32_t(rng.below(std::uint32_t(capacity_)));
            break;
        case Policy::fifo:
            s = std::int32_t(next_victim_);
            next_victim_ = (next_victim_ + 1) % capacity_;
            break;
        case Policy::lru:
            s = tail_;
            break;
        }
        pos_[slot_[s] - 1] = -1;
        if (policy_ == Policy::lru)
            unlink(s);
    }
    slot_[s] = rank;
    pos_[rank - 1] = s;
    if (policy_ == Policy::lru)
        push_front(s);
    return false;
}

void validate_topology(const TopologySpec& spec) {
    if (spec.level_sizes.empty() || spec.level_policies.size() != spec.level_sizes.size())
        throw std::invalid_argument("topology: need one policy per level");
    if (spec.leaf_weights.empty())
        throw std::invalid_argument("topology: need at least one leaf");
    double w = 0.0;
    for (double x : spec.leaf_weights) {
        if (!(x > 0.0))
            throw std::invalid_argument("topology: leaf weights must be positive");
        w += x;
    }
    if (std::fabs(w - 1.0) > 1e-12)
        throw std::invalid_argument("topology: leaf weights must sum to 1");
}

std::uint64_t default_warmup(const TopologySpec& spec, const PopularityDistribution& dist) {
    double total = 0.0;
    for (auto c : spec.level_sizes)
        total += double(c);
    double miss = 0.05;
    switch (dist.kind()) {
    case PopularityDistribution::Kind::ZipfFinite:
    case PopularityDistribution::Kind::ZipfInfinite: {
        double al = dist.alpha();
        double sa = 0.0;
        for (auto c : spec.level_sizes)
            sa += std::pow(double(c), al);
        if (sa > 0.0) {
            double est = miss_rate_asymptotic(Policy::rnd, al, std::pow(sa, 1.0 / al)).value;
            miss = std::clamp(est, 1e-4, 1.0);
        } else {
            miss = 1.0;
        }
        break;
    }
    case PopularityDistribution::Kind::Geometric:
        miss = std::clamp(miss_rate_geometric(dist.kappa(), std::uint64_t(total)), 1e-4, 1.0);
        break;
    case PopularityDistribution::Kind::Explicit:
        miss = 0.05;
        break;
    }
    double want = 200.0 * total / miss;
    return std::uint64_t(std::max(1e6, want));
}

namespace {

struct Counters {
    std::vector<std::uint64_t> arrivals, misses;
    std::vector<std::vector<std::uint64_t>> rank_arrivals, rank_misses;

    Counters(std::size_t levels, std::uint32_t cap) {
        arrivals.assign(levels, 0);
        misses.assign(levels, 0);
        rank_arrivals.assign(levels, std::vector<std::uint64_t>(cap + 1, 0));
        rank_misses.assign(levels, std::vector<std::uint64_t>(cap + 1, 0));
    }
};

} // namespace

MissReport run_topology(const TopologySpec& spec, const PopularityDistribution& dist,
                        const RunConfig& config) {
    validate_topology(spec);
    if (!dist.finite())
        throw std::invalid_argument("simulate: needs a finite catalog");
    if (config.measure == 0)
        throw std::invalid_argument("simulate: measure must be positive");

    std::uint64_t catalog = *dist.support();
    std::size_t levels = spec.levels();
    std::size_t leaves = spec.leaves();

    std::vector<CacheState> caches;
    caches.reserve(leaves + levels - 1);
    for (std::size_t j = 0; j < leaves; ++j)
        caches.emplace_back(spec.level_policies[0], spec.level_sizes[0], catalog);
    for (std::size_t l = 1; l < levels; ++l)
        caches.emplace_back(spec.level_policies[l], spec.level_sizes[l], catalog);

    RequestSampler sampler(dist);
    SplitMix64 rng(config.seed);

    std::vector<double> leaf_cdf(leaves);
    double acc = 0.0;
    for (std::size_t j = 0; j < leaves; ++j) {
        acc += spec.leaf_weights[j];
        leaf_cdf[j] = acc;
    }
    leaf_cdf.back() = 1.0;

    std::uint64_t warmup = config.warmup ? config.warmup : default_warmup(spec, dist);
    std::uint32_t cap = config.rank_cap;

    Counters counts(levels, cap);
    bool recording = false;

    auto step = [&]() {
        std::uint32_t rank = sampler.sample(rng);
        std::size_t leaf = 0;
        if (leaves > 1) {
            double u = rng.next_double();
            while (leaf + 1 < leaves && u >= leaf_cdf[leaf])
                ++leaf;
        }
        std::uint32_t slot = std::min(rank - 1, cap);
        for (std::size_t l = 0; l < levels; ++l) {
            if (recording) {
                ++counts.arrivals[l];
                ++counts.rank_arrivals[l][slot];
            }
            CacheState& cache = caches[l == 0 ? leaf : leaves + l - 1];
            if (cache.access(rank, rng))
                return;
            if (recording) {
                ++counts.misses[l];
                ++counts.rank_misses[l][slot];
            }
        }
    };

    for (std::uint64_t i = 0; i < warmup; ++i)
        step();
    recording = true;
    for (std::uint64_t i = 0; i < config.measure; ++i)
        step();

    MissReport rep;
    rep.arrivals = std::move(counts.arrivals);
    rep.misses = std::move(counts.misses);
    rep.rank_arrivals = std::move(counts.rank_arrivals);
    rep.rank_misses = std::move(counts.rank_misses);
    rep.warmup_requests = warmup;
    rep.measured_requests = config.measure;
    rep.seed = config.seed;
    rep.rank_cap = cap;
    rep.replication_id = config.replication_id;
    return rep;
}

MissReport run_single(Policy policy, std::uint64_t size, const PopularityDistribution& dist,
                      const RunConfig& config) {
    TopologySpec spec;
    spec.level_policies = {policy};
    spec.level_sizes = {size};
    return run_topology(spec, dist, config);
}

double MissReport::local_miss(std::size_t level) const {
    if (level >= arrivals.size() || arrivals[level] == 0)
        return 0.0;
    return double(misses[level]) / double(arrivals[level]);
}

double MissReport::global_miss(std::size_t level) const {
    if (level >= misses.size() || measured_requests == 0)
        return 0.0;
    return double(misses[level]) / double(measured_requests);
}

double MissReport::local_miss_rank(std::size_t level, std::uint32_t rank) const {
    std::uint32_t slot = std::min(rank - 1, rank_cap);
    std::uint64_t arr = rank_arrivals[level][slot];
    if (arr == 0)
        return 0.0;
    return double(rank_misses[level][slot]) / double(arr);
}

ReplicationSummary summarize_runs(const TopologySpec& spec, std::vector<MissReport> runs) {
    if (runs.empty())
        throw std::invalid_argument("simulate: no runs to summarize");
    ReplicationSummary out;
    out.runs = std::move(runs);
    std::size_t levels = spec.levels();
    double reps = double(out.runs.size());
    auto summarize = [&](auto&& get) {
        std::vector<ReplicationStats> stats(levels);
        for (std::size_t l = 0; l < levels; ++l) {
            double mean = 0.0;
            for (const auto& r : out.runs)
                mean += get(r, l);
            mean /= reps;
            double var = 0.0;
            for (const auto& r : out.runs) {
                double d = get(r, l) - mean;
                var += d * d;
            }
            var = reps > 1.0 ? var / (reps - 1.0) : 0.0;
            stats[l].mean = mean;
            stats[l].stddev = std::sqrt(var);
            stats[l].stderr_mean = stats[l].stddev / std::sqrt(reps);
        }
        return stats;
    };
    out.local = summarize([](const MissReport& r, std::size_t l) { return r.local_miss(l); });
    out.global = summarize([](const MissReport& r, std::size_t l) { return r.global_miss(l); });
    return out;
}

ReplicationSummary run_replications(const TopologySpec& spec, const PopularityDistribution& dist,
                                    const RunConfig& config, std::uint32_t reps) {
    if (reps == 0)
        throw std::invalid_argument("simulate: reps must be positive");
    std::vector<MissReport> runs;
    runs.reserve(reps);
    for (std::uint32_t i = 0; i < reps; ++i) {
        RunConfig c = config;
        c.seed = config.seed + i;
        c.replication_id = i;
        runs.push_back(run_topology(spec, dist, c));
    }
    return summarize_runs(spec, std::move(runs));
}

} // namespace cachemiss
