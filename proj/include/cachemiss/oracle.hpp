#ifndef CACHEMISS_ORACLE_HPP
#define CACHEMISS_ORACLE_HPP

#include "cachemiss/popularity.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace cachemiss {

/* Exact finite-state treatment of one rnd cache: the occupancy process on
 * C-subsets of a finite catalog.  Small instances only; the state count
 * binomial(N, C) is capped at 100000. */
struct OracleChain {
    std::vector<std::vector<std::uint32_t>> states;  // sorted subsets, colex order
    std::vector<double> weights;                     // q_1..q_N
    std::uint32_t catalog = 0;
    std::uint32_t cache_size = 0;

    std::size_t size() const { return states.size(); }
    std::size_t index_of(const std::vector<std::uint32_t>& subset) const;
};

OracleChain build_chain_rnd(const PopularityDistribution& dist, std::uint32_t cache_size);

/* Row-major transition matrix P (row = from).  Refused above 2000 states. */
std::vector<double> transition_matrix(const OracleChain& chain);

/* Stationary distribution: dense linear solve below 2000 states, implicit
 * power iteration above. */
struct StationaryResult {
    std::vector<double> pi;
    std::string method;
    double solve_residual = 0.0;  // max_s |sum_s' pi(s') P(s',s) - pi(s)|
};

StationaryResult stationary_distribution(const OracleChain& chain);

/* pi(s) proportional to prod_{j in s} q_j. */
std::vector<double> product_form(const OracleChain& chain);

double total_variation(const std::vector<double>& a, const std::vector<double>& b);

/* max_s |(pi P)(s) - pi(s)| under the chain's own transitions. */
double balance_residual(const OracleChain& chain, const std::vector<double>& pi);

/* Expected miss rate, summed literally over states:
 * sum_s pi(s) (1 - sum_{j in s} q_j). */
double subset_miss_rate(const OracleChain& chain, const std::vector<double>& pi);

/* P(rank not cached) under pi. */
double object_absence(const OracleChain& chain, const std::vector<double>& pi,
                      std::uint32_t rank);

/* Detailed balance pi(s) P(s,s') = pi(s') P(s',s) over an explicit matrix,
 * so tests can also feed deliberately corrupted transitions. */
struct ReversibilityReport {
    double worst_violation = 0.0;
    bool reversible = false;
};

ReversibilityReport check_detailed_balance(const OracleChain& chain,
                                           const std::vector<double>& transition,
                                           const std::vector<double>& pi,
                                           double tolerance = 1e-12);

} // namespace cachemiss

#endif
