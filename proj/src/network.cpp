#include "cachemiss/network.hpp"

#include "cachemiss/errors.hpp"
#include "cachemiss/numeric.hpp"
#include "cachemiss/single_cache.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cachemiss {
namespace {

void require_level(const NetworkPlan& plan, std::size_t level) {
    if (level < 1 || level > plan.levels.size())
        throw std::invalid_argument("network: level out of range");
}

void require_rank(double rank) {
    if (!(rank >= 1.0) || !std::isfinite(rank))
        throw std::invalid_argument("network: rank must be >= 1");
}

/* sum_{j<=level} C_j^a, the effective size term of an rnd/fifo line. */
double size_sum(const NetworkPlan& plan, std::size_t level) {
    double s = 0.0;
    for (std::size_t j = 0; j < level; ++j) {
        if (plan.levels[j].policy == Policy::lru)
            throw std::invalid_argument("network: closed form needs rnd or fifo levels");
        s += std::pow(double(plan.levels[j].size), plan.alpha);
    }
    return s;
}

void require_tandem(const NetworkPlan& plan, Policy first, Policy second) {
    validate_plan(plan);
    if (plan.levels.size() != 2)
        throw std::invalid_argument("network: mixed tandem needs exactly two levels");
    auto ok = [](Policy got, Policy want) {
        if (want == Policy::rnd)
            return got == Policy::rnd || got == Policy::fifo;
        return got == want;
    };
    if (!ok(plan.levels[0].policy, first) || !ok(plan.levels[1].policy, second))
        throw std::invalid_argument("network: tandem policies do not match this model");
}

/* Lower incomplete gamma for 0 < s < 1 and small x, via the power series
 * x^s sum (-x)^n / (n! (s+n)). */
double lower_gamma_series(double s, double x) {
    double pw = 1.0;  // (-x)^n / n!
    double acc = 1.0 / s;
    for (int n = 1; n < 60; ++n) {
        pw *= -x / double(n);
        double t = pw / (s + double(n));
        acc += t;
        if (std::fabs(t) < 1e-16 * std::fabs(acc))
            break;
    }
    return std::pow(x, s) * acc;
}

/* integral_{r0}^{inf} (1 - exp(-c x^-a)) dx for c r0^-a reasonably small:
 * c^(1/a) (gamma_lower(1 - 1/a, u0) - (1 - e^-u0) u0^(-1/a)), u0 = c r0^-a. */
double tail_mass(double c, double alpha, double r0) {
    if (c <= 0.0)
        return 0.0;
    double u0 = c * std::pow(r0, -alpha);
    double s = 1.0 - 1.0 / alpha;
    double g = lower_gamma_series(s, u0);
    double head = -std::expm1(-u0) * std::pow(u0, -1.0 / alpha);
    return std::pow(c, 1.0 / alpha) * (g - head);
}

} // namespace

void validate_plan(const NetworkPlan& plan) {
    if (plan.levels.empty())
        throw std::invalid_argument("network: at least one level");
    if (!(plan.alpha > 1.0) || !std::isfinite(plan.alpha))
        throw std::invalid_argument("network: alpha must be > 1");
    for (const auto& lv : plan.levels)
        if (lv.size > (std::uint64_t(1) << 40))
            throw std::invalid_argument("network: level size too large");
}

double global_miss_per_object(const NetworkPlan& plan, std::size_t level, double rank) {
    validate_plan(plan);
    require_level(plan, level);
    require_rank(rank);
    double rho = prefactor_rnd(plan.alpha);
    double num = rho * std::pow(rank, plan.alpha);
    return num / (num + size_sum(plan, level));
}

double local_miss_per_object(const NetworkPlan& plan, std::size_t level, double rank) {
    double up = global_miss_per_object(plan, level, rank);
    if (level == 1)
        return up;
    double down = global_miss_per_object(plan, level - 1, rank);
    return up / down;
}

double average_global_miss(const NetworkPlan& plan, std::size_t level) {
    validate_plan(plan);
    require_level(plan, level);
    double s = size_sum(plan, level);
    if (s <= 0.0)
        return 1.0;
    double a = 1.0 / riemann_zeta(plan.alpha);
    double rho = prefactor_rnd(plan.alpha);
    double m = a * rho * std::pow(s, 1.0 / plan.alpha - 1.0);
    return std::clamp(m, 0.0, 1.0);
}

double average_global_miss_catalog(const NetworkPlan& plan, std::size_t level,
                                   std::uint64_t catalog) {
    validate_plan(plan);
    require_level(plan, level);
    if (catalog == 0)
        throw std::invalid_argument("network: catalog must be positive");
    double a = 1.0 / riemann_zeta(plan.alpha);
    double rho = prefactor_rnd(plan.alpha);
    double s = size_sum(plan, level);
    KahanSum acc;
    for (std::uint64_t r = 1; r <= catalog; ++r) {
        double num = rho * std::pow(double(r), plan.alpha);
        acc.add(a * std::pow(double(r), -plan.alpha) * num / (num + s));
    }
    return acc.value();
}

TandemMiss mixed_tandem_rnd_then_lru(const NetworkPlan& plan, double rank) {
    require_tandem(plan, Policy::rnd, Policy::lru);
    require_rank(rank);
    double al = plan.alpha;
    double rho = prefactor_rnd(al);
    double lam = prefactor_lru(al);
    double ra = rho * std::pow(rank, al);
    double d = ra + std::pow(double(plan.levels[0].size), al);
    TandemMiss out;
    out.level1_global = ra / d;
    out.level2_local = std::exp(-rho * std::pow(double(plan.levels[1].size), al) / (al * lam * d));
    out.level2_global = out.level1_global * out.level2_local;
    return out;
}

TandemMiss mixed_tandem_lru_then_rnd(const NetworkPlan& plan, double rank) {
    require_tandem(plan, Policy::lru, Policy::rnd);
    require_rank(rank);
    double al = plan.alpha;
    double rho = prefactor_rnd(al);
    double lam = prefactor_lru(al);
    double ra = rho * std::pow(rank, al);
    double x = std::pow(double(plan.levels[0].size) / rank, al) / (al * lam);
    TandemMiss out;
    out.level1_global = std::exp(-x);
    out.level2_global = ra / (ra * std::exp(x) + std::pow(double(plan.levels[1].size), al));
    out.level2_local = out.level2_global / out.level1_global;
    return out;
}

LruLineProfile lru_line_profile(const NetworkPlan& plan, const std::vector<double>& ranks) {
    validate_plan(plan);
    for (const auto& lv : plan.levels)
        if (lv.policy != Policy::lru)
            throw std::invalid_argument("network: lru line needs lru at every level");
    for (double r : ranks)
        require_rank(r);

    double al = plan.alpha;
    double a = 1.0 / riemann_zeta(al);
    std::size_t nl = plan.levels.size();

    /* Accumulated exponents log M_r(global) are kept per head rank; the tail
     * past r0 is effectively unfiltered once r0 clears every level's
     * characteristic scale. */
    std::vector<double> tc(nl, 0.0);

    /* rate of rank r entering level `lv` given solved constants tc[0..lv) */
    auto rate = [&](double r, std::size_t lv) {
        double q = a * std::pow(r, -al);
        double logm = 0.0;
        double lam = q;
        for (std::size_t j = 0; j < lv; ++j) {
            logm -= lam * tc[j];
            lam = q * std::exp(logm);
        }
        return lam;
    };

    LruLineProfile out;
    out.time_constant.resize(nl, 0.0);
    out.local_miss.assign(nl, std::vector<double>(ranks.size(), 1.0));
    out.global_miss.assign(ranks.size(), 1.0);

    for (std::size_t lv = 0; lv < nl; ++lv) {
        double cap = double(plan.levels[lv].size);
        if (cap <= 0.0) {
            out.time_constant[lv] = 0.0;
            tc[lv] = 0.0;
            continue;
        }
        /* occupancy(T) = head sum + analytic tail, monotone in T */
        auto occupancy = [&](double t) {
            double scale = std::pow(a * t, 1.0 / al);
            double r0 = std::max(64.0, 8.0 * scale);
            KahanSum head;
            for (double r = 1.0; r <= r0; r += 1.0)
                head.add(-std::expm1(-rate(r, lv) * t));
            return head.value() + tail_mass(a * t, al, r0 + 0.5);
        };
        double hi = 1.0;
        while (occupancy(hi) < cap) {
            hi *= 2.0;
            if (hi > 1e300)
                throw PrecisionError("lru line: time constant out of range");
        }
        double lo = 0.0;
        for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; ++it) {
            double mid = 0.5 * (lo + hi);
            (occupancy(mid) < cap ? lo : hi) = mid;
        }
        tc[lv] = 0.5 * (lo + hi);
        out.time_constant[lv] = tc[lv];
    }

    for (std::size_t i = 0; i < ranks.size(); ++i) {
        double q = a * std::pow(ranks[i], -al);
        double lam = q;
        double logm = 0.0;
        for (std::size_t lv = 0; lv < nl; ++lv) {
            double local = std::exp(-lam * tc[lv]);
            out.local_miss[lv][i] = local;
            logm += -lam * tc[lv];
            lam = q * std::exp(logm);
        }
        out.global_miss[i] = std::exp(logm);
    }
    return out;
}

} // namespace cachemiss
