#include "cachemiss/numeric.hpp"

#include <array>
#include <stdexcept>

namespace cachemiss {

namespace {

/* B_2, B_4, ..., B_20 */
constexpr std::array<double, 10> kBernoulli = {
    1.0 / 6.0,   -1.0 / 30.0,   1.0 / 42.0,     -1.0 / 30.0,      5.0 / 66.0,
    -691.0 / 2730.0, 7.0 / 6.0, -3617.0 / 510.0, 43867.0 / 798.0, -174611.0 / 330.0};

} // namespace

double riemann_zeta(double s)
{
    if (!(s > 1.0))
        throw std::invalid_argument("riemann_zeta: requires s > 1");

    if (s > 60.0) {
        // Dirichlet series converges to full precision almost immediately.
        double sum = 1.0;
        for (int r = 2; r <= 64; ++r) {
            double t = std::pow(double(r), -s);
            sum += t;
            if (t < 1e-18)
                break;
        }
        return sum;
    }

    // zeta(s) = sum_{r<n} r^-s + n^(1-s)/(s-1) + n^-s/2
    //           + sum_j B_2j/(2j)! * (s)(s+1)...(s+2j-2) * n^(-s-2j+1)
    const int n = 32;
    KahanSum head;
    for (int r = 1; r < n; ++r)
        head.add(std::pow(double(r), -s));

    double result = head.value();
    result += std::pow(double(n), 1.0 - s) / (s - 1.0);
    result += 0.5 * std::pow(double(n), -s);

    double rising = s;                       // (s)(s+1)...(s+2j-2), j = 1 gives s
    double npow = std::pow(double(n), -s - 1.0);
    double fact = 2.0;                       // (2j)!
    for (std::size_t j = 1; j <= kBernoulli.size(); ++j) {
        result += kBernoulli[j - 1] / fact * rising * npow;
        // advance to j+1: multiply rising by (s+2j-1)(s+2j), fact by (2j+1)(2j+2)
        rising *= (s + 2.0 * j - 1.0) * (s + 2.0 * j);
        fact *= (2.0 * j + 1.0) * (2.0 * j + 2.0);
        npow /= double(n) * double(n);
    }
    return result;
}

std::uint64_t binomial_capped(unsigned n, unsigned k, std::uint64_t cap)
{
    if (k > n)
        return 0;
    if (k > n - k)
        k = n - k;
    std::uint64_t result = 1;
    for (unsigned i = 1; i <= k; ++i) {
        // result * (n - k + i) / i stays integral; bail once past the cap
        result = result * (n - k + i) / i;
        if (result > cap)
            return cap + 1;
    }
    return result;
}

} // namespace cachemiss
