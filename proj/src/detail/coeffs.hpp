#ifndef CACHEMISS_DETAIL_COEFFS_HPP
#define CACHEMISS_DETAIL_COEFFS_HPP

#include <vector>

#include "cachemiss/extfloat.hpp"
#include "detail/mpreal.hpp"

namespace cachemiss::detail {

/* Backing store for SymmetricCoefficients. `g` always holds G(0..c_max) as
 * extended-range doubles; `mp` retains the full-precision values when the
 * Newton-identity path ran (the per-object recurrence re-uses them, since its
 * own cancellation would otherwise eat the double mantissa). */
struct CoeffChain {
    std::vector<ExtFloat> g;
    std::vector<MpReal> mp;
    mpfr_prec_t prec = 0;
    long max_cancel_bits = 0;
};

} // namespace cachemiss::detail

#endif
