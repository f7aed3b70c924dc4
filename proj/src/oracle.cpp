#include "cachemiss/oracle.hpp"

#include "cachemiss/errors.hpp"
#include "cachemiss/numeric.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cachemiss {
namespace {

constexpr std::size_t kMaxStates = 100000;
constexpr std::size_t kMaxEdges = 50000000;
constexpr std::size_t kDenseLimit = 2000;

double binom(std::uint64_t n, std::uint64_t k) {
    if (k > n)
        return 0.0;
    k = std::min(k, n - k);
    double b = 1.0;
    for (std::uint64_t i = 1; i <= k; ++i)
        b = b * double(n - k + i) / double(i);
    return b;
}

/* colex rank of a sorted subset: sum_i binom(a_i - 1, i), i 1-based. */
std::size_t colex_rank(const std::vector<std::uint32_t>& s) {
    double r = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i)
        r += binom(s[i] - 1, i + 1);
    return std::size_t(r + 0.5);
}

/* Flat adjacency for the miss transitions of state i: for each absent rank r
 * (in increasing order) and each evicted position p, the target state. */
struct Adjacency {
    std::vector<std::uint32_t> target;   // size n * (N - C) * C
    std::vector<std::uint32_t> absent;   // size n * (N - C): ranks not in state
    std::vector<double> hit_mass;        // per state
    std::size_t misses_per_state = 0;    // N - C
};

Adjacency build_adjacency(const OracleChain& chain) {
    std::size_t n = chain.size();
    std::uint32_t nn = chain.catalog;
    std::uint32_t c = chain.cache_size;
    std::size_t mp = nn - c;

    Adjacency adj;
    adj.misses_per_state = mp;
    adj.target.resize(n * mp * c);
    adj.absent.resize(n * mp);
    adj.hit_mass.resize(n);

    std::vector<std::uint32_t> next(c);
    std::vector<char> member(nn + 1);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& s = chain.states[i];
        std::fill(member.begin(), member.end(), 0);
        double hm = 0.0;
        for (auto v : s) {
            member[v] = 1;
            hm += chain.weights[v - 1];
        }
        adj.hit_mass[i] = hm;
        std::size_t mi = 0;
        for (std::uint32_t r = 1; r <= nn; ++r) {
            if (member[r])
                continue;
            adj.absent[i * mp + mi] = r;
            for (std::uint32_t p = 0; p < c; ++p) {
                next.clear();
                for (std::uint32_t j = 0; j < c; ++j)
                    if (j != p)
                        next.push_back(s[j]);
                next.insert(std::upper_bound(next.begin(), next.end(), r), r);
                adj.target[(i * mp + mi) * c + p] = std::uint32_t(colex_rank(next));
            }
            ++mi;
        }
    }
    return adj;
}

/* y = x P for the implicit chain. */
void apply_transpose(const OracleChain& chain, const Adjacency& adj,
                     const std::vector<double>& x, std::vector<double>& y) {
    std::size_t n = chain.size();
    std::uint32_t c = chain.cache_size;
    std::size_t mp = adj.misses_per_state;
    y.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double m = x[i];
        if (m == 0.0)
            continue;
        y[i] += m * adj.hit_mass[i];
        for (std::size_t mi = 0; mi < mp; ++mi) {
            double q = chain.weights[adj.absent[i * mp + mi] - 1] / double(c);
            const std::uint32_t* tg = &adj.target[(i * mp + mi) * c];
            for (std::uint32_t p = 0; p < c; ++p)
                y[tg[p]] += m * q;
        }
    }
}

} // namespace

std::size_t OracleChain::index_of(const std::vector<std::uint32_t>& subset) const {
    std::vector<std::uint32_t> s = subset;
    std::sort(s.begin(), s.end());
    return colex_rank(s);
}

OracleChain build_chain_rnd(const PopularityDistribution& dist, std::uint32_t cache_size) {
    if (!dist.finite())
        throw std::invalid_argument("oracle: needs a finite catalog");
    std::uint64_t nn = *dist.support();
    if (cache_size == 0 || cache_size > nn)
        throw std::invalid_argument("oracle: cache size must be in [1, catalog]");
    double count = binom(nn, cache_size);
    if (count > double(kMaxStates))
        throw std::invalid_argument("oracle: state space exceeds 100000 subsets");

    OracleChain chain;
    chain.catalog = std::uint32_t(nn);
    chain.cache_size = cache_size;
    chain.weights = dist.weights();
    chain.states.reserve(std::size_t(count + 0.5));

    /* colex enumeration: bump the lowest element whose successor is free,
     * resetting everything below it. */
    std::vector<std::uint32_t> a(cache_size);
    for (std::uint32_t i = 0; i < cache_size; ++i)
        a[i] = i + 1;
    for (;;) {
        chain.states.push_back(a);
        std::uint32_t i = 0;
        while (i + 1 < cache_size && a[i] + 1 == a[i + 1])
            ++i;
        if (a[i] + 1 > nn)
            break;
        ++a[i];
        for (std::uint32_t j = 0; j < i; ++j)
            a[j] = j + 1;
    }
    return chain;
}

std::vector<double> transition_matrix(const OracleChain& chain) {
    std::size_t n = chain.size();
    if (n > kDenseLimit)
        throw std::invalid_argument("oracle: too many states to materialize");
    std::vector<double> p(n * n, 0.0);
    Adjacency adj = build_adjacency(chain);
    std::size_t mp = adj.misses_per_state;
    std::uint32_t c = chain.cache_size;
    for (std::size_t i = 0; i < n; ++i) {
        p[i * n + i] += adj.hit_mass[i];
        for (std::size_t mi = 0; mi < mp; ++mi) {
            double q = chain.weights[adj.absent[i * mp + mi] - 1] / double(c);
            for (std::uint32_t pp = 0; pp < c; ++pp)
                p[i * n + adj.target[(i * mp + mi) * c + pp]] += q;
        }
    }
    return p;
}

StationaryResult stationary_distribution(const OracleChain& chain) {
    std::size_t n = chain.size();
    std::size_t edges =
        n * std::size_t(chain.catalog - chain.cache_size) * chain.cache_size;
    if (edges > kMaxEdges)
        throw std::invalid_argument("oracle: transition structure too large");

    Adjacency adj = build_adjacency(chain);
    StationaryResult out;

    if (n <= kDenseLimit) {
        std::vector<double> p = transition_matrix(chain);
        /* solve pi (P - I) = 0 with sum pi = 1: transpose, replace last row */
        Eigen::MatrixXd a(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                a(Eigen::Index(j), Eigen::Index(i)) = p[i * n + j] - (i == j ? 1.0 : 0.0);
        for (std::size_t j = 0; j < n; ++j)
            a(Eigen::Index(n - 1), Eigen::Index(j)) = 1.0;
        Eigen::VectorXd b = Eigen::VectorXd::Zero(Eigen::Index(n));
        b(Eigen::Index(n - 1)) = 1.0;
        Eigen::VectorXd x = a.partialPivLu().solve(b);
        out.pi.assign(x.data(), x.data() + n);
        double total = 0.0;
        for (double v : out.pi)
            total += v;
        for (double& v : out.pi)
            v /= total;
        out.method = "dense-lu";
    } else {
        std::vector<double> pi(n, 1.0 / double(n)), nxt;
        double resid = 1.0;
        std::size_t it = 0;
        for (; it < 200000; ++it) {
            apply_transpose(chain, adj, pi, nxt);
            resid = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                resid = std::max(resid, std::fabs(nxt[i] - pi[i]));
            pi.swap(nxt);
            if (resid < 1e-15)
                break;
        }
        double total = 0.0;
        for (double v : pi)
            total += v;
        for (double& v : pi)
            v /= total;
        out.pi = std::move(pi);
        out.method = "power-" + std::to_string(it);
    }

    std::vector<double> post;
    apply_transpose(chain, adj, out.pi, post);
    double r = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        r = std::max(r, std::fabs(post[i] - out.pi[i]));
    out.solve_residual = r;
    return out;
}

std::vector<double> product_form(const OracleChain& chain) {
    std::vector<double> pi(chain.size());
    KahanSum total;
    for (std::size_t i = 0; i < chain.size(); ++i) {
        double w = 1.0;
        for (auto v : chain.states[i])
            w *= chain.weights[v - 1];
        pi[i] = w;
        total.add(w);
    }
    for (double& v : pi)
        v /= total.value();
    return pi;
}

double total_variation(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("total_variation: size mismatch");
    KahanSum acc;
    for (std::size_t i = 0; i < a.size(); ++i)
        acc.add(std::fabs(a[i] - b[i]));
    return 0.5 * acc.value();
}

double balance_residual(const OracleChain& chain, const std::vector<double>& pi) {
    Adjacency adj = build_adjacency(chain);
    std::vector<double> post;
    apply_transpose(chain, adj, pi, post);
    double r = 0.0;
    for (std::size_t i = 0; i < pi.size(); ++i)
        r = std::max(r, std::fabs(post[i] - pi[i]));
    return r;
}

double subset_miss_rate(const OracleChain& chain, const std::vector<double>& pi) {
    KahanSum acc;
    for (std::size_t i = 0; i < chain.size(); ++i) {
        double hm = 0.0;
        for (auto v : chain.states[i])
            hm += chain.weights[v - 1];
        acc.add(pi[i] * (1.0 - hm));
    }
    return acc.value();
}

double object_absence(const OracleChain& chain, const std::vector<double>& pi,
                      std::uint32_t rank) {
    if (rank < 1 || rank > chain.catalog)
        throw std::invalid_argument("oracle: rank out of range");
    KahanSum acc;
    for (std::size_t i = 0; i < chain.size(); ++i) {
        const auto& s = chain.states[i];
        if (!std::binary_search(s.begin(), s.end(), rank))
            acc.add(pi[i]);
    }
    return acc.value();
}

ReversibilityReport check_detailed_balance(const OracleChain& chain,
                                           const std::vector<double>& transition,
                                           const std::vector<double>& pi,
                                           double tolerance) {
    std::size_t n = chain.size();
    if (transition.size() != n * n || pi.size() != n)
        throw std::invalid_argument("oracle: matrix/pi shape mismatch");
    ReversibilityReport rep;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            double fwd = pi[i] * transition[i * n + j];
            double bwd = pi[j] * transition[j * n + i];
            rep.worst_violation = std::max(rep.worst_violation, std::fabs(fwd - bwd));
        }
    rep.reversible = rep.worst_violation <= tolerance;
    return rep;
}

} // namespace cachemiss
