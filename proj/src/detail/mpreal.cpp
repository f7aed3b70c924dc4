#include "detail/mpreal.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace cachemiss::detail {
namespace {

constexpr double kLogBorweinBase = 1.7627471740390860504; // ln(3 + sqrt(8))

bool integral_exponent(double s) {
    return s == std::floor(s) && s < 1e9;
}

/* term <- r^(-s) at the precision of term. */
void neg_power(mpfr_ptr term, unsigned long r, double s, mpfr_srcptr s_mp) {
    if (integral_exponent(s)) {
        mpfr_ui_pow_ui(term, r, static_cast<unsigned long>(s), MPFR_RNDN);
        mpfr_ui_div(term, 1, term, MPFR_RNDN);
    } else {
        mpfr_set_ui(term, r, MPFR_RNDN);
        mpfr_pow(term, term, s_mp, MPFR_RNDN);
        mpfr_ui_div(term, 1, term, MPFR_RNDN);
    }
}

/* Head sum r^-s for r = 1..terms; `terms` is chosen so the dropped tail is
 * below the target precision already.  pw_fn(t, r) must set t = r^-s. */
template <class PowFn>
void zeta_direct_impl(mpfr_ptr rop, unsigned long terms, PowFn&& pw_fn) {
    mpfr_prec_t wprec = mpfr_get_prec(rop) + 64;
    mpfr_t acc, term;
    mpfr_init2(acc, wprec);
    mpfr_init2(term, wprec);
    mpfr_set_ui(acc, 1, MPFR_RNDN);
    for (unsigned long r = 2; r <= terms; ++r) {
        pw_fn(term, r);
        mpfr_add(acc, acc, term, MPFR_RNDN);
    }
    mpfr_set(rop, acc, MPFR_RNDN);
    mpfr_clears(acc, term, static_cast<mpfr_ptr>(nullptr));
}

/* Borwein's algorithm 2: zeta(s) = (d_n*S2 - S1) / (d_n * (1 - 2^(1-s)))
 * with S1 = sum (-1)^k d_k (k+1)^-s, S2 = sum (-1)^k (k+1)^-s,
 * d_k = n * sum_{i<=k} (n+i-1)! 4^i / ((n-i)! (2i)!).
 * Truncation error decays like (3+sqrt(8))^-n. */
template <class PowFn>
void zeta_borwein_impl(mpfr_ptr rop, unsigned long n, PowFn&& pw_fn) {
    mpfr_prec_t wprec = mpfr_get_prec(rop) + 64;
    mpfr_t d, u, s1, s2, term, pw;
    mpfr_init2(d, wprec);
    mpfr_init2(u, wprec);
    mpfr_init2(s1, wprec);
    mpfr_init2(s2, wprec);
    mpfr_init2(term, wprec);
    mpfr_init2(pw, wprec);

    /* u_k = n * t_k so that d_k = sum_{i<=k} u_i; u_0 = 1. */
    mpfr_set_ui(u, 1, MPFR_RNDN);
    mpfr_set_ui(d, 1, MPFR_RNDN);
    mpfr_set_ui(s1, 1, MPFR_RNDN);
    mpfr_set_ui(s2, 1, MPFR_RNDN);

    for (unsigned long k = 1; k < n; ++k) {
        /* u_k / u_{k-1} = 2 (n+k-1)(n-k+1) / (k (2k-1)) */
        mpfr_mul_ui(u, u, 2 * (n + k - 1), MPFR_RNDN);
        mpfr_mul_ui(u, u, n - k + 1, MPFR_RNDN);
        mpfr_div_ui(u, u, k, MPFR_RNDN);
        mpfr_div_ui(u, u, 2 * k - 1, MPFR_RNDN);
        mpfr_add(d, d, u, MPFR_RNDN);

        pw_fn(pw, k + 1);
        mpfr_mul(term, d, pw, MPFR_RNDN);
        if (k & 1) {
            mpfr_sub(s1, s1, term, MPFR_RNDN);
            mpfr_sub(s2, s2, pw, MPFR_RNDN);
        } else {
            mpfr_add(s1, s1, term, MPFR_RNDN);
            mpfr_add(s2, s2, pw, MPFR_RNDN);
        }
    }
    /* last step of the recurrence, k = n: ratio collapses to 2/n */
    mpfr_mul_ui(u, u, 2, MPFR_RNDN);
    mpfr_div_ui(u, u, n, MPFR_RNDN);
    mpfr_add(d, d, u, MPFR_RNDN);

    /* rop = (d_n * s2 - s1) / (d_n * (1 - 2^(1-s))); 2^(1-s) = 2 * 2^-s */
    mpfr_mul(s2, s2, d, MPFR_RNDN);
    mpfr_sub(s2, s2, s1, MPFR_RNDN);
    pw_fn(pw, 2);
    mpfr_mul_2ui(pw, pw, 1, MPFR_RNDN);
    mpfr_ui_sub(term, 1, pw, MPFR_RNDN);
    mpfr_mul(term, term, d, MPFR_RNDN);
    mpfr_div(s2, s2, term, MPFR_RNDN);
    mpfr_set(rop, s2, MPFR_RNDN);

    mpfr_clears(d, u, s1, s2, term, pw, static_cast<mpfr_ptr>(nullptr));
}

struct SeriesPlan {
    bool direct;
    unsigned long terms;
};

SeriesPlan plan_series(double prec, double s) {
    /* Direct sum: tail past R is below 2 R^(1-s)/(s-1); solve for R. */
    double log2_r = (prec + 2.0 - std::log2(s - 1.0)) / (s - 1.0);
    double direct_terms = (log2_r < 40.0) ? std::exp2(log2_r) : 1e13;

    /* Borwein: n = (prec ln2 + slack) / ln(3+sqrt(8)); the 1/(1-2^(1-s))
     * factor inflates the error when s is close to 1. */
    double slack = 12.0;
    double denom = 1.0 - std::exp2(1.0 - s);
    slack -= std::log(denom); // denom < 1 always adds slack
    double borwein_terms = (prec * 0.69314718055994531 + slack) / kLogBorweinBase;

    if (direct_terms <= 1.3 * borwein_terms + 32.0)
        return {true, static_cast<unsigned long>(direct_terms) + 2};
    return {false, static_cast<unsigned long>(borwein_terms) + 2};
}

} // namespace

void zeta_real(mpfr_ptr rop, double s) {
    if (!(s > 1.0))
        throw std::invalid_argument("zeta_real: requires s > 1");
    SeriesPlan plan = plan_series(static_cast<double>(mpfr_get_prec(rop)) + 32.0, s);

    mpfr_t s_mp;
    mpfr_init2(s_mp, 64);
    mpfr_set_d(s_mp, s, MPFR_RNDN);
    auto pw_fn = [&](mpfr_ptr t, unsigned long r) { neg_power(t, r, s, s_mp); };
    if (plan.direct)
        zeta_direct_impl(rop, plan.terms, pw_fn);
    else
        zeta_borwein_impl(rop, plan.terms, pw_fn);
    mpfr_clear(s_mp);
}

mpfr_srcptr ZetaSeriesCache::power(std::size_t r) {
    while (w_.size() + 1 < r) {
        std::size_t next = w_.size() + 2;
        MpReal x(prec_);
        mpfr_t a;
        mpfr_init2(a, 64);
        mpfr_set_d(a, -alpha_, MPFR_RNDN);
        mpfr_set_ui(x.raw(), static_cast<unsigned long>(next), MPFR_RNDN);
        mpfr_pow(x.raw(), x.raw(), a, MPFR_RNDN);
        mpfr_clear(a);
        w_.push_back(std::move(x));
    }
    return w_[r - 2].raw();
}

void zeta_multiple(mpfr_ptr rop, unsigned long k, ZetaSeriesCache& cache) {
    double s = static_cast<double>(k) * cache.alpha();
    if (!(s > 1.0))
        throw std::invalid_argument("zeta_multiple: requires k*alpha > 1");
    SeriesPlan plan = plan_series(static_cast<double>(mpfr_get_prec(rop)) + 32.0, s);

    /* r^-s = (r^-alpha)^k: the exponent k*alpha is applied exactly, and the
     * integer power costs log2(k) multiplies instead of an exp/log pair. */
    auto pw_fn = [&](mpfr_ptr t, unsigned long r) {
        mpfr_pow_ui(t, cache.power(r), k, MPFR_RNDN);
    };
    if (plan.direct)
        zeta_direct_impl(rop, plan.terms, pw_fn);
    else
        zeta_borwein_impl(rop, plan.terms, pw_fn);
}

} // namespace cachemiss::detail
