#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "cachemiss/errors.hpp"
#include "cachemiss/numeric.hpp"
#include "cachemiss/single_cache.hpp"

namespace cachemiss {
namespace {

using Kind = PopularityDistribution::Kind;

/* sum_{r >= a} r^-s = a^-s * P(s, a); five Euler-Maclaurin terms.
 * Relative error ~ s^(7)/a^8, negligible once a >= 32 for the s in use. */
double tail_poly(double s, double a) {
    double s2 = s * (s + 1.0) * (s + 2.0);
    double s5 = s2 * (s + 3.0) * (s + 4.0);
    return a / (s - 1.0) + 0.5 + s / (12.0 * a) - s2 / (720.0 * a * a * a) +
           s5 / (30240.0 * std::pow(a, 5));
}

struct GEval {
    double g = 0.0;
    double dg = 0.0;
};

/* g(z) = sum_r q_r z/(1+q_r z) and g'(z), infinite Zipf q_r = A r^-alpha.
 * Head sum to R with A z R^-alpha <= 1/30, then the geometric-in-j expansion
 * of the tail: sum_{r>R} sum_j (-1)^(j-1) (Az)^j r^(-j alpha), with the inner
 * sums evaluated by Euler-Maclaurin.  Writing (Az)^j S(j alpha, a) as
 * u^j P(j alpha, a) with u = A z a^-alpha keeps everything in double range. */
GEval g_zipf_infinite(double z, double alpha, double a_norm) {
    double az = a_norm * z;
    double r_cut = std::ceil(std::pow(30.0 * az, 1.0 / alpha));
    if (!(r_cut < 2e7))
        throw PrecisionError("saddle point: head sum for g(z) too large at z=" + std::to_string(z));
    std::uint64_t big_r = r_cut > 32.0 ? static_cast<std::uint64_t>(r_cut) : 32;

    KahanSum head, dhead;
    for (std::uint64_t r = 1; r <= big_r; ++r) {
        double y = az * std::pow(double(r), -alpha);  // q_r z
        double denom = 1.0 + y;
        head.add(y / denom);
        dhead.add(y / (z * denom * denom));  // q_r/(1+q_r z)^2
    }

    double a = double(big_r) + 1.0;
    double u = az * std::pow(a, -alpha);
    double uj = 1.0;
    double tail = 0.0, dtail = 0.0;
    for (int j = 1; j <= 400; ++j) {
        uj *= u;
        double t = uj * tail_poly(double(j) * alpha, a);
        double sign = (j & 1) ? 1.0 : -1.0;
        tail += sign * t;
        dtail += sign * double(j) * t / z;
        if (std::abs(t) < 1e-17 * (1.0 + head.value()))
            break;
    }
    return {head.value() + tail, dhead.value() + dtail};
}

GEval g_geometric(double z, double kappa) {
    KahanSum g, dg;
    double q = 1.0 - kappa;
    double k_pow = 1.0;  // kappa^(r-1)
    for (std::uint64_t r = 1; r <= 100000000; ++r) {
        double y = q * k_pow * z;
        double denom = 1.0 + y;
        g.add(y / denom);
        dg.add(y / (z * denom * denom));
        k_pow *= kappa;
        if (z * k_pow < 1e-16 * (1.0 + g.value()))
            break;
    }
    return {g.value(), dg.value()};
}

GEval g_finite(double z, const std::vector<double>& w) {
    KahanSum g, dg;
    for (double q : w) {
        double y = q * z;
        double denom = 1.0 + y;
        g.add(y / denom);
        dg.add(q / (denom * denom));
    }
    return {g.value(), dg.value()};
}

struct GFun {
    const PopularityDistribution& d;
    std::vector<double> w;  // materialized for finite kinds

    explicit GFun(const PopularityDistribution& dist) : d(dist) {
        if (d.finite())
            w = d.weights();
    }

    GEval operator()(double z) const {
        switch (d.kind()) {
        case Kind::ZipfInfinite:
            return g_zipf_infinite(z, d.alpha(), d.normalizer());
        case Kind::Geometric:
            return g_geometric(z, d.kappa());
        default:
            return g_finite(z, w);
        }
    }
};

double initial_upper(const PopularityDistribution& d, int c) {
    double h = 0.0;
    switch (d.kind()) {
    case Kind::ZipfInfinite:
    case Kind::ZipfFinite:
        h = 2.0 * std::pow(double(c), d.alpha()) / (d.normalizer() * prefactor_rnd(d.alpha()));
        break;
    case Kind::Geometric:
        /* root sits near 1/q_(c+1) */
        h = 2.0 * std::exp(-double(c) * std::log(d.kappa())) / (1.0 - d.kappa());
        break;
    default:
        h = 2.0 / d.prob(static_cast<std::uint64_t>(c) + 1);
        break;
    }
    if (!(h > double(c)))
        h = 2.0 * double(c);
    return std::min(h, 1e300);
}

} // namespace

SaddlePoint saddle_point(const PopularityDistribution& dist, int c) {
    if (c < 1)
        throw std::invalid_argument("saddle_point: c must be >= 1");
    if (dist.finite() && static_cast<std::uint64_t>(c) >= *dist.support())
        throw std::invalid_argument(
            "saddle_point: g(z) is bounded by the support size; no root for this c");

    GFun g(dist);
    const double target = double(c);
    const double tol = 1e-12 * std::max(1.0, target);

    /* g(z) < z, so z = c brackets from below. */
    double lo = target;
    double hi = initial_upper(dist, c);
    while (g(hi).g < target) {
        if (hi >= 1e300)
            throw PrecisionError("saddle_point: root exceeds floating-point range");
        hi = std::min(hi * 4.0, 1e300);
    }

    double z = std::clamp(0.5 * hi, lo, hi);  // the asymptotic estimate for Zipf kinds
    double residual = 0.0;
    for (int it = 0; it < 200; ++it) {
        GEval e = g(z);
        residual = e.g - target;
        if (std::abs(residual) <= tol)
            break;
        if (residual < 0.0)
            lo = z;
        else
            hi = z;
        double step = residual / e.dg;
        double znew = z - step;
        if (!(znew > lo && znew < hi) || !std::isfinite(znew))
            znew = 0.5 * (lo + hi);
        z = znew;
    }
    return {z, std::abs(residual)};
}

double per_object_miss_saddle(const PopularityDistribution& dist, const SaddlePoint& sp,
                              std::uint64_t rank) {
    if (rank < 1)
        throw std::invalid_argument("per_object_miss_saddle: rank must be >= 1");
    double q = dist.prob(rank);
    return std::clamp(1.0 / (1.0 + q * sp.theta), 0.0, 1.0);
}

double per_object_miss_saddle(const PopularityDistribution& dist, int c, std::uint64_t rank) {
    return per_object_miss_saddle(dist, saddle_point(dist, c), rank);
}

double miss_rate_saddle(const PopularityDistribution& dist, int c) {
    /* At the root, sum_r q_r/(1+q_r theta) = g(theta)/theta = c/theta. */
    SaddlePoint sp = saddle_point(dist, c);
    return std::clamp(double(c) / sp.theta, 0.0, 1.0);
}

} // namespace cachemiss
