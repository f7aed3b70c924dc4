#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "cachemiss/numeric.hpp"
#include "cachemiss/single_cache.hpp"

namespace cachemiss {
namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kEulerGamma = 0.57721566490153286061;

void require_alpha(double alpha) {
    if (!(alpha > 1.0))
        throw std::invalid_argument("zipf exponent must satisfy alpha > 1");
}

} // namespace

double miss_rate_geometric(double kappa, int c) {
    if (!(kappa > 0.0 && kappa < 1.0))
        throw std::invalid_argument("miss_rate_geometric: kappa must lie in (0,1)");
    if (c < 0)
        throw std::invalid_argument("miss_rate_geometric: c must be >= 0");
    double kc = std::pow(kappa, double(c));
    double denom = -std::expm1(double(c + 1) * std::log(kappa));  // 1 - kappa^(c+1)
    double m = (1.0 - kappa) * double(c + 1) * kc / denom;
    return std::clamp(m, 0.0, 1.0);
}

double miss_rate_zipf_closed(int alpha, int c) {
    if (c < 0)
        throw std::invalid_argument("miss_rate_zipf_closed: c must be >= 0");
    double cc = c;
    switch (alpha) {
    case 2:
        return 3.0 / (2.0 * cc + 3.0);
    case 4:
        return 45.0 / ((4.0 * cc + 5.0) * (4.0 * cc + 3.0) * (2.0 * cc + 3.0));
    case 6: {
        double denom = 1.0;
        for (int j = 4; j <= 9; ++j)
            denom *= 6.0 * cc + j;
        return 60480.0 * (cc + 1.0) / denom;  // 9!/3! = 60480
    }
    default:
        throw std::invalid_argument("miss_rate_zipf_closed: closed forms exist for alpha in {2,4,6}");
    }
}

double prefactor_rnd(double alpha) {
    require_alpha(alpha);
    double x = kPi / alpha;
    return std::pow(x / std::sin(x), alpha);
}

double prefactor_lru(double alpha) {
    require_alpha(alpha);
    return std::pow(std::tgamma(1.0 - 1.0 / alpha), alpha) / alpha;
}

AsymptoticEstimate miss_rate_asymptotic(Policy policy, double alpha, int c) {
    require_alpha(alpha);
    if (c < 1)
        throw std::invalid_argument("miss_rate_asymptotic: c must be >= 1");
    double a = 1.0 / riemann_zeta(alpha);
    bool lru = policy == Policy::lru;
    double pf = lru ? prefactor_lru(alpha) : prefactor_rnd(alpha);
    AsymptoticEstimate est;
    est.value = std::clamp(a * pf * std::pow(double(c), 1.0 - alpha), 0.0, 1.0);
    est.regime_note = lru ? "zipf power law, lru" : "zipf power law, rnd/fifo";
    return est;
}

AsymptoticEstimate per_object_miss_asymptotic(Policy policy, double alpha, int c, double rank) {
    require_alpha(alpha);
    if (c < 1)
        throw std::invalid_argument("per_object_miss_asymptotic: c must be >= 1");
    if (!(rank >= 1.0))
        throw std::invalid_argument("per_object_miss_asymptotic: rank must be >= 1");
    double x = std::pow(double(c) / rank, alpha);  // may overflow to inf; handled below
    AsymptoticEstimate est;
    if (policy == Policy::lru) {
        est.value = std::exp(-x / (alpha * prefactor_lru(alpha)));
        est.regime_note = "per-object zipf, lru";
    } else {
        double rho = prefactor_rnd(alpha);
        est.value = rho / (rho + x);
        est.regime_note = "per-object zipf, rnd/fifo";
    }
    est.value = std::clamp(est.value, 0.0, 1.0);
    return est;
}

AsymptoticEstimate miss_rate_lru_light_tail(double a, double b, double beta, int c) {
    if (!(a > 0.0) || !(b > 0.0) || !(beta > 0.0))
        throw std::invalid_argument("miss_rate_lru_light_tail: a, b, beta must be positive");
    if (c < 1)
        throw std::invalid_argument("miss_rate_lru_light_tail: c must be >= 1");
    double q_c = a * std::exp(-b * std::pow(double(c), beta));
    AsymptoticEstimate est;
    est.value = std::clamp(std::exp(kEulerGamma) / (beta * b) * std::pow(double(c), 1.0 - beta) * q_c,
                           0.0, 1.0);
    est.regime_note = "light-tail, lru";
    return est;
}

double saddle_point_expansion(double alpha, int c) {
    require_alpha(alpha);
    if (c < 1)
        throw std::invalid_argument("saddle_point_expansion: c must be >= 1");
    double a = 1.0 / riemann_zeta(alpha);
    double rho = prefactor_rnd(alpha);
    double theta = std::pow(double(c), alpha) / (a * rho);
    if (alpha != 2.0)
        theta += alpha / (2.0 * rho * a) * std::pow(double(c), alpha - 1.0);
    return theta;
}

} // namespace cachemiss
