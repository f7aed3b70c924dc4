#ifndef CACHEMISS_DETAIL_MPREAL_HPP
#define CACHEMISS_DETAIL_MPREAL_HPP

#include <mpfr.h>

#include <cstddef>
#include <utility>
#include <vector>

namespace cachemiss::detail {

/* Thin RAII holder for an mpfr_t. Arithmetic goes through the mpfr_* C API
 * on raw(); only lifetime, copies and a few accessors live here. */
class MpReal {
public:
    explicit MpReal(mpfr_prec_t prec) { mpfr_init2(v_, prec); }

    MpReal(const MpReal& o) {
        mpfr_init2(v_, mpfr_get_prec(o.v_));
        mpfr_set(v_, o.v_, MPFR_RNDN);
    }

    MpReal(MpReal&& o) noexcept {
        mpfr_init2(v_, 2);
        mpfr_swap(v_, o.v_);
    }

    MpReal& operator=(const MpReal& o) {
        if (this != &o) {
            mpfr_set_prec(v_, mpfr_get_prec(o.v_));
            mpfr_set(v_, o.v_, MPFR_RNDN);
        }
        return *this;
    }

    MpReal& operator=(MpReal&& o) noexcept {
        mpfr_swap(v_, o.v_);
        return *this;
    }

    ~MpReal() { mpfr_clear(v_); }

    mpfr_ptr raw() { return v_; }
    mpfr_srcptr raw() const { return v_; }

    mpfr_prec_t precision() const { return mpfr_get_prec(v_); }
    double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }
    int sign() const { return mpfr_sgn(v_); }
    bool regular() const { return mpfr_regular_p(v_) != 0; }

    /* Binary exponent of the value; `fallback` for zero/nan. */
    long exponent_or(long fallback) const {
        return regular() ? static_cast<long>(mpfr_get_exp(v_)) : fallback;
    }

private:
    mpfr_t v_;
};

/* zeta(s) for real s > 1, rounded into rop at rop's precision.
 * Uses a direct Dirichlet sum when s is large relative to the target
 * precision and Borwein's alternating-series acceleration otherwise.
 * mpfr_zeta itself is avoided: at several thousand bits it takes on the
 * order of a second per call, far too slow for sweeps over many s. */
void zeta_real(mpfr_ptr rop, double s);

/* Lazily grown table of r^-alpha at a fixed precision.  zeta(k*alpha) for
 * non-integral alpha then needs only integer powers (r^-alpha)^k per series
 * term instead of a general pow (exp o log), which is ~100x slower. */
class ZetaSeriesCache {
public:
    ZetaSeriesCache(double alpha, mpfr_prec_t prec) : alpha_(alpha), prec_(prec) {}

    double alpha() const { return alpha_; }
    mpfr_srcptr power(std::size_t r);  // r^-alpha, r >= 2

private:
    double alpha_;
    mpfr_prec_t prec_;
    std::vector<MpReal> w_;  // index r-2
};

/* zeta(k * cache.alpha()) into rop, sharing the cache across k. */
void zeta_multiple(mpfr_ptr rop, unsigned long k, ZetaSeriesCache& cache);

} // namespace cachemiss::detail

#endif
