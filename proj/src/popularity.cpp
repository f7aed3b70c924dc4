#include "cachemiss/popularity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cachemiss/numeric.hpp"

namespace cachemiss {

PopularityDistribution PopularityDistribution::zipf_finite(double alpha, std::uint64_t n)
{
    if (!(alpha > 1.0))
        throw std::invalid_argument("zipf: alpha must be > 1");
    if (n < 1)
        throw std::invalid_argument("zipf: support must be >= 1");
    PopularityDistribution d;
    d.kind_ = Kind::ZipfFinite;
    d.support_ = n;
    d.alpha_ = alpha;
    KahanSum s;
    for (std::uint64_t r = 1; r <= n; ++r)
        s.add(std::pow(double(r), -alpha));
    d.norm_ = 1.0 / s.value();
    return d;
}

PopularityDistribution PopularityDistribution::zipf_infinite(double alpha)
{
    if (!(alpha > 1.0))
        throw std::invalid_argument("zipf: alpha must be > 1");
    PopularityDistribution d;
    d.kind_ = Kind::ZipfInfinite;
    d.alpha_ = alpha;
    d.norm_ = 1.0 / riemann_zeta(alpha);
    return d;
}

PopularityDistribution PopularityDistribution::geometric(double kappa)
{
    if (!(kappa > 0.0 && kappa < 1.0))
        throw std::invalid_argument("geometric: kappa must be in (0, 1)");
    PopularityDistribution d;
    d.kind_ = Kind::Geometric;
    d.kappa_ = kappa;
    d.norm_ = 1.0 - kappa;
    return d;
}

PopularityDistribution PopularityDistribution::explicit_weights(std::vector<double> weights)
{
    if (weights.empty())
        throw std::invalid_argument("explicit distribution: no weights");
    double total = 0.0;
    for (double w : weights) {
        if (!(w > 0.0) || !std::isfinite(w))
            throw std::invalid_argument("explicit distribution: weights must be positive and finite");
        total += w;
    }
    // Sort non-increasing so rank semantics (rank 1 = most popular) hold.
    std::sort(weights.begin(), weights.end(), std::greater<double>());
    for (double& w : weights)
        w /= total;
    PopularityDistribution d;
    d.kind_ = Kind::Explicit;
    d.support_ = weights.size();
    d.explicit_weights_ = std::move(weights);
    return d;
}

double PopularityDistribution::prob(std::uint64_t rank) const
{
    if (rank < 1)
        throw std::invalid_argument("prob: ranks start at 1");
    switch (kind_) {
    case Kind::ZipfFinite:
        if (rank > *support_)
            return 0.0;
        [[fallthrough]];
    case Kind::ZipfInfinite:
        return norm_ * std::pow(double(rank), -alpha_);
    case Kind::Geometric:
        return norm_ * std::pow(kappa_, double(rank - 1));
    case Kind::Explicit:
        if (rank > explicit_weights_.size())
            return 0.0;
        return explicit_weights_[rank - 1];
    }
    return 0.0;
}

std::vector<double> PopularityDistribution::weights() const
{
    if (!finite())
        throw std::invalid_argument("weights: infinite support cannot be materialized");
    if (kind_ == Kind::Explicit)
        return explicit_weights_;
    std::vector<double> w(*support_);
    for (std::uint64_t r = 1; r <= *support_; ++r)
        w[r - 1] = prob(r);
    return w;
}

double PopularityDistribution::power_sum(unsigned k) const
{
    if (k < 1)
        throw std::invalid_argument("power_sum: k must be >= 1");
    switch (kind_) {
    case Kind::ZipfInfinite:
        return std::pow(norm_, double(k)) * riemann_zeta(alpha_ * k);
    case Kind::Geometric: {
        // sum_r ((1-kappa) kappa^(r-1))^k = (1-kappa)^k / (1 - kappa^k)
        double kap_k = std::pow(kappa_, double(k));
        return std::pow(norm_, double(k)) / (1.0 - kap_k);
    }
    case Kind::ZipfFinite: {
        KahanSum s;
        for (std::uint64_t r = 1; r <= *support_; ++r)
            s.add(std::pow(prob(r), double(k)));
        return s.value();
    }
    case Kind::Explicit: {
        KahanSum s;
        for (double w : explicit_weights_)
            s.add(std::pow(w, double(k)));
        return s.value();
    }
    }
    return 0.0;
}

PopularityDistribution make_zipf(double alpha, std::uint64_t n)
{
    return PopularityDistribution::zipf_finite(alpha, n);
}

PopularityDistribution make_zipf(double alpha)
{
    return PopularityDistribution::zipf_infinite(alpha);
}

PopularityDistribution make_geometric(double kappa)
{
    return PopularityDistribution::geometric(kappa);
}

PopularityDistribution make_explicit(std::vector<double> weights)
{
    return PopularityDistribution::explicit_weights(std::move(weights));
}

PopularityDistribution miss_filtered(const PopularityDistribution& dist,
                                     const std::function<double(std::uint64_t)>& per_object_miss,
                                     double avg_miss)
{
    if (!dist.finite())
        throw std::invalid_argument("miss_filtered: requires finite support");
    if (!(avg_miss > 0.0))
        throw std::invalid_argument("miss_filtered: avg_miss must be positive");
    std::uint64_t n = *dist.support();
    std::vector<double> w(n);
    KahanSum check;
    for (std::uint64_t r = 1; r <= n; ++r) {
        double m = per_object_miss(r);
        if (!(m >= 0.0) || m > 1.0 + 1e-12)
            throw std::invalid_argument("miss_filtered: per-object miss outside [0, 1]");
        double qm = dist.prob(r) * m;
        check.add(qm);
        w[r - 1] = qm / avg_miss;
    }
    double rel = std::abs(check.value() - avg_miss) / std::max(avg_miss, 1e-300);
    if (rel > 1e-9)
        throw std::invalid_argument("miss_filtered: avg_miss inconsistent with per-object values");
    return make_explicit(std::move(w));
}

RequestSampler::RequestSampler(const PopularityDistribution& dist)
{
    if (!dist.finite())
        throw std::invalid_argument("sampling requires finite support");
    std::vector<double> w = dist.weights();
    n_ = static_cast<std::uint32_t>(w.size());
    accept_.assign(n_, 1.0);
    alias_.assign(n_, 0);

    // Walker-Vose: split scaled probabilities into under/over-full bins.
    std::vector<double> scaled(n_);
    for (std::uint32_t i = 0; i < n_; ++i)
        scaled[i] = w[i] * double(n_);
    std::vector<std::uint32_t> small, large;
    small.reserve(n_);
    large.reserve(n_);
    for (std::uint32_t i = 0; i < n_; ++i)
        (scaled[i] < 1.0 ? small : large).push_back(i);
    while (!small.empty() && !large.empty()) {
        std::uint32_t s = small.back();
        small.pop_back();
        std::uint32_t l = large.back();
        accept_[s] = scaled[s];
        alias_[s] = l;
        scaled[l] -= 1.0 - scaled[s];
        if (scaled[l] < 1.0) {
            large.pop_back();
            small.push_back(l);
        }
    }
    for (std::uint32_t i : small)
        accept_[i] = 1.0;
    for (std::uint32_t i : large)
        accept_[i] = 1.0;
}

} // namespace cachemiss
