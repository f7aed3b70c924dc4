#include <algorithm>
#include <climits>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cachemiss/errors.hpp"
#include "cachemiss/numeric.hpp"
#include "cachemiss/single_cache.hpp"
#include "detail/coeffs.hpp"

namespace cachemiss {
namespace {

using detail::CoeffChain;
using detail::MpReal;

constexpr double kLn2 = 0.69314718055994530942;

using Kind = PopularityDistribution::Kind;

bool analytic_kind(const PopularityDistribution& d) {
    return d.kind() == Kind::ZipfInfinite || d.kind() == Kind::Geometric;
}

/* ---- finite support: all-positive subset DP, no cancellation ---- */

std::shared_ptr<CoeffChain> chain_subset_dp(const std::vector<double>& q, int c_max) {
    auto chain = std::make_shared<CoeffChain>();
    chain->g.assign(static_cast<std::size_t>(c_max) + 1, ExtFloat{});
    chain->g[0] = ExtFloat::from_double(1.0);
    for (std::size_t i = 0; i < q.size(); ++i) {
        ExtFloat w = ExtFloat::from_double(q[i]);
        int hi = std::min<int>(c_max, static_cast<int>(i) + 1);
        for (int j = hi; j >= 1; --j)
            chain->g[j] += w * chain->g[j - 1];
    }
    return chain;
}

/* ---- analytic support: Newton's identities in MPFR ----
 *
 * e_C = (1/C) sum_{k=1..C} (-1)^(k-1) p_k e_{C-k}.  The dominant term of the
 * sum is of order p_C e_0 = q_1^C while the result G(C) is of order
 * prod_{r<=C} q_r, so the cancellation grows like sum_{r<=C} log(q_1/q_r)
 * bits (about alpha*log2(C!) for Zipf).  Precision is sized from that gap in
 * advance; each power sum only needs enough bits to place its own term
 * at the common absolute error floor, which keeps the zeta evaluations
 * cheap. */

double log2_prob(const PopularityDistribution& d, std::uint64_t r) {
    if (d.kind() == Kind::Geometric)
        return std::log2(d.normalizer()) + double(r - 1) * std::log2(d.kappa());
    return std::log2(d.normalizer()) - d.alpha() * std::log2(double(r));
}

double log2_power_sum(const PopularityDistribution& d, unsigned k) {
    if (d.kind() == Kind::Geometric) {
        double pk = std::pow(d.kappa(), double(k));
        return double(k) * std::log2(d.normalizer()) - std::log1p(-pk) / kLn2;
    }
    double s = double(k) * d.alpha();
    double lz = (s > 1060.0) ? 0.0 : std::log2(riemann_zeta(s));
    return double(k) * std::log2(d.normalizer()) + lz;
}

struct NewtonSizing {
    std::vector<double> tb;  // log2 estimate of |p_k e_{cmax-k}|, index 1..c_max
    double tmax = 0.0;
    long base_prec = 256;
};

NewtonSizing size_newton(const PopularityDistribution& d, int c_max) {
    std::vector<double> prefix(static_cast<std::size_t>(c_max) + 1, 0.0);
    for (int j = 1; j <= c_max; ++j)
        prefix[j] = prefix[j - 1] + log2_prob(d, j);
    /* ghat(j) over-estimates log2 G(j); the product bound prod q_r is a
     * lower bound with slack about j*log2(rho_alpha), covered by 4j. */
    auto ghat = [&](int j) { return prefix[j] + 4.0 * j + 32.0; };

    NewtonSizing s;
    s.tb.assign(static_cast<std::size_t>(c_max) + 1, 0.0);
    s.tmax = -1e300;
    for (int k = 1; k <= c_max; ++k) {
        s.tb[k] = log2_power_sum(d, static_cast<unsigned>(k)) + ghat(c_max - k);
        s.tmax = std::max(s.tmax, s.tb[k]);
    }
    double need = s.tmax - prefix[c_max] + 192.0 + 0.25 * c_max;
    s.base_prec = std::max(256L, static_cast<long>(std::ceil(need)));
    return s;
}

struct NewtonRun {
    std::vector<MpReal> e;
    long max_cancel = 0;
    bool ok = true;
    int fail_c = 0;
};

NewtonRun newton_chain(const PopularityDistribution& d, int c_max, const NewtonSizing& sz,
                       mpfr_prec_t prec) {
    NewtonRun out;
    const bool zipf = d.kind() == Kind::ZipfInfinite;
    const bool frac = zipf && d.alpha() != std::floor(d.alpha());
    detail::ZetaSeriesCache zcache(zipf ? d.alpha() : 2.0, prec + 32);

    MpReal a_full(prec);
    if (zipf) {
        if (frac)
            detail::zeta_multiple(a_full.raw(), 1, zcache);
        else
            detail::zeta_real(a_full.raw(), d.alpha());
        mpfr_ui_div(a_full.raw(), 1, a_full.raw(), MPFR_RNDN);
    }

    std::vector<MpReal> p;
    p.reserve(static_cast<std::size_t>(c_max) + 1);
    p.emplace_back(2);  // unused slot 0
    for (int k = 1; k <= c_max; ++k) {
        long deficit = static_cast<long>(std::ceil(sz.tmax - sz.tb[k]));
        mpfr_prec_t pk_prec = std::clamp<mpfr_prec_t>(prec - deficit + 128, 192, prec);
        MpReal pk(pk_prec);
        if (zipf) {
            MpReal z(pk_prec);
            if (frac)
                detail::zeta_multiple(z.raw(), static_cast<unsigned long>(k), zcache);
            else
                detail::zeta_real(z.raw(), double(k) * d.alpha());
            mpfr_pow_ui(pk.raw(), a_full.raw(), static_cast<unsigned long>(k), MPFR_RNDN);
            mpfr_mul(pk.raw(), pk.raw(), z.raw(), MPFR_RNDN);
        } else {
            MpReal t(pk_prec);
            mpfr_set_d(t.raw(), d.kappa(), MPFR_RNDN);
            mpfr_pow_ui(t.raw(), t.raw(), static_cast<unsigned long>(k), MPFR_RNDN);
            mpfr_ui_sub(t.raw(), 1, t.raw(), MPFR_RNDN);  // 1 - kappa^k
            mpfr_set_d(pk.raw(), d.kappa(), MPFR_RNDN);
            mpfr_ui_sub(pk.raw(), 1, pk.raw(), MPFR_RNDN);  // 1 - kappa, no double rounding
            mpfr_pow_ui(pk.raw(), pk.raw(), static_cast<unsigned long>(k), MPFR_RNDN);
            mpfr_div(pk.raw(), pk.raw(), t.raw(), MPFR_RNDN);
        }
        p.push_back(std::move(pk));
    }

    out.e.reserve(static_cast<std::size_t>(c_max) + 1);
    out.e.emplace_back(prec);
    mpfr_set_ui(out.e[0].raw(), 1, MPFR_RNDN);

    MpReal term(prec), sum(prec);
    for (int c = 1; c <= c_max; ++c) {
        mpfr_set_zero(sum.raw(), 1);
        long max_exp = LONG_MIN;
        for (int k = 1; k <= c; ++k) {
            mpfr_mul(term.raw(), p[k].raw(), out.e[c - k].raw(), MPFR_RNDN);
            if (mpfr_regular_p(term.raw()))
                max_exp = std::max(max_exp, static_cast<long>(mpfr_get_exp(term.raw())));
            if (k & 1)
                mpfr_add(sum.raw(), sum.raw(), term.raw(), MPFR_RNDN);
            else
                mpfr_sub(sum.raw(), sum.raw(), term.raw(), MPFR_RNDN);
        }
        MpReal ec(prec);
        mpfr_div_ui(ec.raw(), sum.raw(), static_cast<unsigned long>(c), MPFR_RNDN);
        bool good = ec.regular() && ec.sign() > 0;
        long cancel = prec;
        if (good && max_exp != LONG_MIN)
            cancel = max_exp - ec.exponent_or(LONG_MIN);
        out.max_cancel = std::max(out.max_cancel, cancel);
        if (!good || prec - cancel < 48) {
            out.ok = false;
            out.fail_c = c;
            return out;
        }
        out.e.push_back(std::move(ec));
    }
    return out;
}

std::shared_ptr<CoeffChain> chain_newton(const PopularityDistribution& d, int c_max,
                                         std::string& method) {
    NewtonSizing sz = size_newton(d, c_max);
    constexpr mpfr_prec_t kPrecCap = 131072;
    int last_fail = 0;
    for (mpfr_prec_t prec = sz.base_prec; prec <= kPrecCap; prec *= 2) {
        NewtonRun run = newton_chain(d, c_max, sz, prec);
        if (!run.ok) {
            last_fail = run.fail_c;
            continue;
        }
        auto chain = std::make_shared<CoeffChain>();
        chain->prec = prec;
        chain->max_cancel_bits = run.max_cancel;
        chain->g.reserve(run.e.size());
        for (const auto& v : run.e) {
            long ex = 0;
            double m = mpfr_get_d_2exp(&ex, v.raw(), MPFR_RNDN);
            chain->g.push_back(ExtFloat::from_parts(m, ex));
        }
        chain->mp = std::move(run.e);
        method = "newton-mpfr-" + std::to_string(prec);
        return chain;
    }
    throw PrecisionError("symmetric coefficients: cancellation exhausted the precision ladder at G(" +
                         std::to_string(last_fail) + ")");
}

/* Mirror recurrence for the absolute error of the per-object chain
 * G_r(c) = G(c) - q_r G_r(c-1): err <- q_r err + ulp(step operands). */
struct ErrTracker {
    ExtFloat err;
    void step(double q_r, long scale_exp, long ulp_bits) {
        ExtFloat ulp = ExtFloat::from_parts(1.0, scale_exp - ulp_bits);
        err = ExtFloat::from_double(q_r) * err + ulp;
    }
    double relative_to(const ExtFloat& v) const {
        if (v.zero())
            return std::numeric_limits<double>::infinity();
        return std::abs(err.ratio_to(v));
    }
};

} // namespace

/* ---- SymmetricCoefficients ---- */

SymmetricCoefficients::SymmetricCoefficients(const PopularityDistribution& dist, int c_max) {
    if (c_max < 0)
        throw std::invalid_argument("symmetric coefficients: c_max must be >= 0");
    if (dist.finite() && static_cast<std::uint64_t>(c_max) > *dist.support() + 1)
        throw std::invalid_argument("symmetric coefficients: c_max exceeds support size + 1");
    dist_ = std::make_shared<PopularityDistribution>(dist);
    c_max_ = c_max;
    if (!analytic_kind(dist)) {
        chain_ = chain_subset_dp(dist.weights(), c_max);
        source_ = "subset-dp";
    } else if (c_max == 0) {
        auto chain = std::make_shared<CoeffChain>();
        chain->g.assign(1, ExtFloat::from_double(1.0));
        chain_ = chain;
        source_ = "trivial";
    } else {
        std::string method;
        chain_ = chain_newton(dist, c_max, method);
        source_ = method;
    }
}

double SymmetricCoefficients::value(int c) const {
    if (c < 0 || c > c_max_)
        throw std::out_of_range("symmetric coefficients: index outside computed range");
    return chain_->g[c].to_double();
}

double SymmetricCoefficients::log_value(int c) const {
    if (c < 0 || c > c_max_)
        throw std::out_of_range("symmetric coefficients: index outside computed range");
    return chain_->g[c].log_value();
}

double SymmetricCoefficients::ratio(int c_hi, int c_lo) const {
    if (c_hi < 0 || c_hi > c_max_ || c_lo < 0 || c_lo > c_max_)
        throw std::out_of_range("symmetric coefficients: index outside computed range");
    const auto& g = chain_->g;
    if (g[c_lo].zero())
        throw std::domain_error("symmetric coefficients: ratio with zero denominator");
    if (!chain_->mp.empty()) {
        MpReal t(192);
        mpfr_div(t.raw(), chain_->mp[c_hi].raw(), chain_->mp[c_lo].raw(), MPFR_RNDN);
        return t.to_double();
    }
    return g[c_hi].ratio_to(g[c_lo]);
}

double SymmetricCoefficients::miss_rate(int c) const {
    if (c < 0 || c >= c_max_)
        throw std::out_of_range("miss rate needs G up to c+1; increase c_max");
    if (chain_->g[c].zero())
        return 0.0;  // beyond a finite support everything fits
    double m = double(c + 1) * ratio(c + 1, c);
    return std::clamp(m, 0.0, 1.0);
}

/* ---- free functions ---- */

double miss_rate_exact(const PopularityDistribution& dist, int c) {
    if (c < 0)
        throw std::invalid_argument("miss_rate_exact: c must be >= 0");
    if (dist.finite() && static_cast<std::uint64_t>(c) >= *dist.support())
        return 0.0;
    SymmetricCoefficients sc(dist, c + 1);
    return sc.miss_rate(c);
}

double per_object_miss_exact(const SymmetricCoefficients& coeffs, int c, std::uint64_t rank) {
    const auto& dist = coeffs.distribution();
    if (c < 0 || c > coeffs.c_max())
        throw std::out_of_range("per_object_miss_exact: c outside coefficient range");
    if (rank < 1 || (dist.finite() && rank > *dist.support()))
        throw std::invalid_argument("per_object_miss_exact: rank outside support");
    if (c == 0)
        return 1.0;
    if (dist.finite() && static_cast<std::uint64_t>(c) >= *dist.support())
        return 0.0;

    const CoeffChain& chain = *coeffs.chain_;
    const double q_r = dist.prob(rank);

    if (!chain.mp.empty()) {
        const mpfr_prec_t prec = chain.prec;
        MpReal gr(prec), qm(prec), tmp(prec);
        mpfr_set_ui(gr.raw(), 1, MPFR_RNDN);
        mpfr_set_d(qm.raw(), q_r, MPFR_RNDN);
        ErrTracker err;
        for (int t = 1; t <= c; ++t) {
            mpfr_mul(tmp.raw(), qm.raw(), gr.raw(), MPFR_RNDN);
            long scale = std::max(chain.mp[t].exponent_or(LONG_MIN), tmp.exponent_or(LONG_MIN));
            mpfr_sub(gr.raw(), chain.mp[t].raw(), tmp.raw(), MPFR_RNDN);
            err.step(q_r, scale, prec);
        }
        long ex = 0;
        double m = mpfr_get_d_2exp(&ex, gr.raw(), MPFR_RNDN);
        ExtFloat grx = ExtFloat::from_parts(m, ex);
        if (gr.sign() <= 0 || err.relative_to(grx) > 1e-9)
            throw PrecisionError("per-object miss: recurrence for rank " + std::to_string(rank) +
                                 " lost its precision budget");
        mpfr_div(tmp.raw(), gr.raw(), chain.mp[c].raw(), MPFR_RNDN);
        return std::clamp(tmp.to_double(), 0.0, 1.0);
    }

    /* Finite-support double path with fallback to a DP excluding the rank. */
    ExtFloat gr = ExtFloat::from_double(1.0);
    ExtFloat qx = ExtFloat::from_double(q_r);
    ErrTracker err;
    bool shaky = false;
    for (int t = 1; t <= c; ++t) {
        ExtFloat sub = qx * gr;
        long scale = std::max(chain.g[t].zero() ? LONG_MIN : chain.g[t].exponent(),
                              sub.zero() ? LONG_MIN : sub.exponent());
        gr = chain.g[t] - sub;
        err.step(q_r, scale, 52);
        if (gr.sign() <= 0) {
            shaky = true;
            break;
        }
    }
    if (!shaky && err.relative_to(gr) <= 1e-11)
        return std::clamp(gr.ratio_to(chain.g[c]), 0.0, 1.0);

    std::vector<double> q = dist.weights();
    q.erase(q.begin() + static_cast<std::ptrdiff_t>(rank - 1));
    auto ex_chain = chain_subset_dp(q, c);
    return std::clamp(ex_chain->g[c].ratio_to(chain.g[c]), 0.0, 1.0);
}

double per_object_miss_exact(const PopularityDistribution& dist, int c, std::uint64_t rank) {
    if (c < 0)
        throw std::invalid_argument("per_object_miss_exact: c must be >= 0");
    if (dist.finite() && static_cast<std::uint64_t>(c) >= *dist.support()) {
        if (rank < 1 || rank > *dist.support())
            throw std::invalid_argument("per_object_miss_exact: rank outside support");
        return 0.0;
    }
    SymmetricCoefficients sc(dist, c);
    return per_object_miss_exact(sc, c, rank);
}

std::vector<double> per_object_miss_profile(const SymmetricCoefficients& coeffs, int c,
                                            const std::vector<std::uint64_t>& ranks) {
    std::vector<double> out;
    out.reserve(ranks.size());
    for (std::uint64_t r : ranks)
        out.push_back(per_object_miss_exact(coeffs, c, r));
    return out;
}

} // namespace cachemiss
