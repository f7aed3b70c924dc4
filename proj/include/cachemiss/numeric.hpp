#ifndef CACHEMISS_NUMERIC_HPP
#define CACHEMISS_NUMERIC_HPP

#include <cmath>
#include <cstdint>

namespace cachemiss {

/* Riemann zeta for real s > 1, Euler-Maclaurin tail correction.
 * Absolute error below 1e-14 over the whole range used here. */
double riemann_zeta(double s);

/* Neumaier-compensated accumulator. */
class KahanSum {
public:
    void add(double x) {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/* Exact binomial coefficient, saturating at the cap instead of overflowing.
 * Used for state-space size guards. */
std::uint64_t binomial_capped(unsigned n, unsigned k, std::uint64_t cap);

} // namespace cachemiss

#endif
