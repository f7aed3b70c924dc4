#ifndef CACHEMISS_POPULARITY_HPP
#define CACHEMISS_POPULARITY_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "cachemiss/rng.hpp"

namespace cachemiss {

/* Request popularity over ranks 1, 2, 3, ...
 * Probabilities are strictly positive and non-increasing in rank.
 * Instances are immutable after construction and safe to share. */
class PopularityDistribution {
public:
    enum class Kind { ZipfFinite, ZipfInfinite, Geometric, Explicit };

    Kind kind() const { return kind_; }

    /* Support size; empty for infinite support. */
    std::optional<std::uint64_t> support() const { return support_; }
    bool finite() const { return support_.has_value(); }

    /* q_r for rank r >= 1.  For finite kinds, ranks beyond the support
     * have probability zero. */
    double prob(std::uint64_t rank) const;

    double alpha() const { return alpha_; }   // Zipf kinds only
    double kappa() const { return kappa_; }   // Geometric only
    /* Normalizer: q_r = normalizer * r^-alpha for Zipf kinds. */
    double normalizer() const { return norm_; }

    /* Materialized weights, finite kinds only. */
    std::vector<double> weights() const;

    /* k-th power sum  p_k = sum_r q_r^k  (k >= 1).  Closed forms for the
     * analytic kinds, full summation for finite support. */
    double power_sum(unsigned k) const;

    static PopularityDistribution zipf_finite(double alpha, std::uint64_t n);
    static PopularityDistribution zipf_infinite(double alpha);
    static PopularityDistribution geometric(double kappa);
    static PopularityDistribution explicit_weights(std::vector<double> weights);

private:
    PopularityDistribution() = default;

    Kind kind_ = Kind::Explicit;
    std::optional<std::uint64_t> support_;
    double alpha_ = 0.0;
    double kappa_ = 0.0;
    double norm_ = 0.0;                 // A (Zipf) or 1-kappa (geometric)
    std::vector<double> explicit_weights_;
};

PopularityDistribution make_zipf(double alpha, std::uint64_t n);
PopularityDistribution make_zipf(double alpha);                       // infinite
PopularityDistribution make_geometric(double kappa);
PopularityDistribution make_explicit(std::vector<double> weights);

/* Popularity of the stream surviving a cache: w_r proportional to
 * q_r * per_object_miss(r) / avg_miss.  Requires finite support.
 * avg_miss must equal sum_r q_r * per_object_miss(r) to within 1e-9. */
PopularityDistribution miss_filtered(const PopularityDistribution& dist,
                                     const std::function<double(std::uint64_t)>& per_object_miss,
                                     double avg_miss);

/* O(1) IRM rank sampler (Walker-Vose alias table).  Finite support only. */
class RequestSampler {
public:
    explicit RequestSampler(const PopularityDistribution& dist);

    /* Rank in [1, N]. */
    std::uint32_t sample(SplitMix64& rng) const
    {
        std::uint32_t i = rng.below(n_);
        return (rng.next_double() < accept_[i]) ? i + 1 : alias_[i] + 1;
    }

    std::uint32_t support() const { return n_; }

private:
    std::uint32_t n_;
    std::vector<double> accept_;
    std::vector<std::uint32_t> alias_;
};

} // namespace cachemiss

#endif
