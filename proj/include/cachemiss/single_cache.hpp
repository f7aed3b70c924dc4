#ifndef CACHEMISS_SINGLE_CACHE_HPP
#define CACHEMISS_SINGLE_CACHE_HPP

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "cachemiss/policy.hpp"
#include "cachemiss/popularity.hpp"

namespace cachemiss {

namespace detail {
struct CoeffChain;
}

/* G(0..c_max), the elementary symmetric functions of the popularity weights.
 * G(C) normalizes the stationary law of a size-C cache under random
 * eviction, and consecutive ratios give the miss probability.
 *
 * Finite-support distributions use an all-positive subset DP. Analytic
 * distributions (infinite Zipf, geometric) use Newton's identities over
 * closed-form power sums; the alternating signs there cancel catastrophically
 * (the surviving G(C) sits hundreds to thousands of bits below the largest
 * term), so that path runs in MPFR at a precision sized in advance from the
 * known decay of the coefficients, with a post-hoc cancellation monitor and a
 * retry ladder behind it. */
class SymmetricCoefficients {
public:
    SymmetricCoefficients(const PopularityDistribution& dist, int c_max);

    int c_max() const { return c_max_; }

    double value(int c) const;      // G(c); underflows to 0 in double for deep c
    double log_value(int c) const;  // ln G(c); -inf where G(c) = 0
    double ratio(int c_hi, int c_lo) const;  // G(c_hi)/G(c_lo)

    /* (c+1) G(c+1)/G(c); requires c < c_max. Zero beyond a finite support. */
    double miss_rate(int c) const;

    const std::string& source() const { return source_; }
    const PopularityDistribution& distribution() const { return *dist_; }

private:
    std::shared_ptr<const detail::CoeffChain> chain_;
    std::shared_ptr<const PopularityDistribution> dist_;
    std::string source_;
    int c_max_ = 0;

    friend double per_object_miss_exact(const SymmetricCoefficients&, int, std::uint64_t);
    friend std::vector<double> per_object_miss_profile(const SymmetricCoefficients&, int,
                                                       const std::vector<std::uint64_t>&);
};

/* Stationary miss probability M(C) = (C+1) G(C+1)/G(C) of a size-C cache
 * under random eviction (FIFO has the same law). */
double miss_rate_exact(const PopularityDistribution& dist, int c);

/* Per-object miss probability M_r(C) = G_r(C)/G(C), where G_r collects the
 * subsets avoiding rank r. Computed by the division recurrence
 * G_r(C) = G(C) - q_r G_r(C-1); if that recurrence loses too many bits the
 * finite-support path falls back to a subset DP excluding r, and the
 * multiprecision path re-runs the recurrence on the retained MPFR chain. */
double per_object_miss_exact(const PopularityDistribution& dist, int c, std::uint64_t rank);
double per_object_miss_exact(const SymmetricCoefficients& coeffs, int c, std::uint64_t rank);
std::vector<double> per_object_miss_profile(const SymmetricCoefficients& coeffs, int c,
                                            const std::vector<std::uint64_t>& ranks);

/* Closed forms for the miss probability. */
double miss_rate_geometric(double kappa, int c);
double miss_rate_zipf_closed(int alpha, int c);  // alpha in {2, 4, 6}

/* Large-cache prefactors: random eviction rho_a = ((pi/a)/sin(pi/a))^a,
 * LRU lambda_a = (1/a) Gamma(1 - 1/a)^a. */
double prefactor_rnd(double alpha);
double prefactor_lru(double alpha);

struct AsymptoticEstimate {
    double value = 0.0;
    std::string regime_note;
};

/* M(C) ~ A * prefactor / C^(alpha-1) for Zipf with A = 1/zeta(alpha);
 * policy picks the prefactor (FIFO shares the random-eviction law). */
AsymptoticEstimate miss_rate_asymptotic(Policy policy, double alpha, int c);

/* Per-object large-cache estimates:
 * random eviction  M_r(C) ~ rho r^a / (C^a + rho r^a),
 * LRU              M_r(C) ~ exp(-C^a / (a lambda r^a)). */
AsymptoticEstimate per_object_miss_asymptotic(Policy policy, double alpha, int c, double rank);

/* LRU asymptotic for light-tailed popularity q_r = a exp(-b r^beta):
 * M(C) ~ (e^gamma / (beta b)) C^(1-beta) q_C. */
AsymptoticEstimate miss_rate_lru_light_tail(double a, double b, double beta, int c);

struct SaddlePoint {
    double theta = 0.0;
    double residual = 0.0;
};

/* Unique positive root theta_C of g(z) = sum_r q_r z/(1 + q_r z) = C.
 * Monotone Newton/bisection hybrid; infinite Zipf evaluates g by a head sum
 * plus an Euler-Maclaurin tail expansion. Requires C < support size. */
SaddlePoint saddle_point(const PopularityDistribution& dist, int c);

/* Large-C expansion theta_C = C^a/(A rho_a) + A1 C^(a-1) + ... for Zipf;
 * diagnostic companion to the root finder (second term absent at alpha = 2,
 * where the correction is logarithmic). */
double saddle_point_expansion(double alpha, int c);

/* M_r(C) ~ 1/(1 + q_r theta_C), the distribution-generic per-object form. */
double per_object_miss_saddle(const PopularityDistribution& dist, int c, std::uint64_t rank);
double per_object_miss_saddle(const PopularityDistribution& dist, const SaddlePoint& sp,
                              std::uint64_t rank);

/* Weighted average sum_r q_r / (1 + q_r theta_C) of the saddle estimates. */
double miss_rate_saddle(const PopularityDistribution& dist, int c);

} // namespace cachemiss

#endif
