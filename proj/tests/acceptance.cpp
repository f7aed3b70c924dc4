/* Acceptance gate: one check per numbered criterion, one PASS/FAIL line each.
 * Run with no arguments for the full gate, or pass criterion numbers to run a
 * subset (e.g. "acceptance 1 5 9").  Exit 0 iff every selected check passed.
 *
 * Simulation-backed checks use fixed seeds, so outcomes are reproducible
 * bit-for-bit; statistical tolerances are sized to keep false alarms below
 * the per-check 1e-3 level at these scales. */

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#include "cachemiss/network.hpp"
#include "cachemiss/numeric.hpp"
#include "cachemiss/oracle.hpp"
#include "cachemiss/popularity.hpp"
#include "cachemiss/rng.hpp"
#include "cachemiss/simulate.hpp"
#include "cachemiss/single_cache.hpp"
#include "frozen.hpp"

using namespace cachemiss;

namespace {

struct Outcome {
    bool ok = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* pattern, ...)
{
    char buf[512];
    va_list args;
    va_start(args, pattern);
    std::vsnprintf(buf, sizeof buf, pattern, args);
    va_end(args);
    return buf;
}

/* 1. Newton-identity chain vs closed forms, alpha in {2,4,6}, C 0..200,
 *    relative error < 1e-9, under 5 s. */
Outcome criterion1()
{
    auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0;
    for (int alpha : {2, 4, 6}) {
        SymmetricCoefficients g(make_zipf(double(alpha)), 201);
        for (int c = 0; c <= 200; ++c) {
            double closed = miss_rate_zipf_closed(alpha, c);
            double rel = std::abs(g.miss_rate(c) / closed - 1.0);
            if (rel > worst) worst = rel;
        }
    }
    double dt = seconds_since(t0);
    bool ok = worst < 1e-9 && dt < 5.0;
    return {ok, fmt("worst_rel=%.2e (limit 1e-9), elapsed=%.2fs (limit 5s)", worst, dt)};
}

/* 2. Geometric chain vs closed form, kappa in {0.3,0.5,0.9}, C 0..100,
 *    relative error < 1e-10. */
Outcome criterion2()
{
    double worst = 0.0;
    for (double kappa : {0.3, 0.5, 0.9}) {
        SymmetricCoefficients g(make_geometric(kappa), 101);
        for (int c = 0; c <= 100; ++c) {
            double closed = miss_rate_geometric(kappa, c);
            double rel = std::abs(g.miss_rate(c) / closed - 1.0);
            if (rel > worst) worst = rel;
        }
    }
    return {worst < 1e-10, fmt("worst_rel=%.2e (limit 1e-10)", worst)};
}

/* 3. Oracle grid N <= 8, C <= 4 over Zipf, geometric and random weights:
 *    stationary law vs product form (TV < 1e-10), literal subset miss sum vs
 *    ratio form (< 1e-12), detailed balance (< 1e-12), under 30 s. */
Outcome criterion3()
{
    auto t0 = std::chrono::steady_clock::now();
    double worst_tv = 0.0, worst_miss = 0.0, worst_balance = 0.0;
    int instances = 0;
    for (std::uint32_t n = 2; n <= 8; ++n) {
        std::vector<PopularityDistribution> dists;
        dists.push_back(make_zipf(1.3, n));
        std::vector<double> geo(n), rnd_w(n);
        for (std::uint32_t r = 0; r < n; ++r) geo[r] = 0.4 * std::pow(0.6, double(r));
        SplitMix64 rng(987 + n);
        for (auto& w : rnd_w) w = 0.2 + rng.next_double();
        dists.push_back(make_explicit(geo));
        dists.push_back(make_explicit(rnd_w));

        for (const auto& d : dists) {
            for (std::uint32_t c = 1; c <= std::min<std::uint32_t>(4, n); ++c) {
                auto chain = build_chain_rnd(d, c);
                auto st = stationary_distribution(chain);
                auto p = transition_matrix(chain);
                double tv = total_variation(st.pi, product_form(chain));
                double dm =
                    std::abs(subset_miss_rate(chain, st.pi) - miss_rate_exact(d, int(c)));
                double db = check_detailed_balance(chain, p, st.pi).worst_violation;
                if (tv > worst_tv) worst_tv = tv;
                if (dm > worst_miss) worst_miss = dm;
                if (db > worst_balance) worst_balance = db;
                ++instances;
            }
        }
    }
    double dt = seconds_since(t0);
    bool ok = worst_tv < 1e-10 && worst_miss < 1e-12 && worst_balance < 1e-12 && dt < 30.0;
    return {ok, fmt("instances=%d tv=%.2e (<1e-10) miss=%.2e (<1e-12) balance=%.2e "
                    "(<1e-12) elapsed=%.1fs (<30s)",
                    instances, worst_tv, worst_miss, worst_balance, dt)};
}

/* 4. Headline simulation, alpha=1.7, N=20000, C=25, 10 replications of 1e7:
 *    RND 0.147 +- 0.01, LRU 0.108 +- 0.01, RND within 3 standard errors of
 *    the exact value. */
Outcome criterion4()
{
    auto d = make_zipf(1.7, 20000);
    RunConfig cfg;
    cfg.measure = 10000000;
    cfg.rank_cap = 8;

    TopologySpec rnd_spec;
    rnd_spec.level_policies = {Policy::rnd};
    rnd_spec.level_sizes = {25};
    cfg.seed = 424201;
    auto rnd_sum = run_replications(rnd_spec, d, cfg, 10);

    TopologySpec lru_spec;
    lru_spec.level_policies = {Policy::lru};
    lru_spec.level_sizes = {25};
    cfg.seed = 424301;
    auto lru_sum = run_replications(lru_spec, d, cfg, 10);

    double m_rnd = rnd_sum.local[0].mean, se_rnd = rnd_sum.local[0].stderr_mean;
    double m_lru = lru_sum.local[0].mean;
    double exact = frozen::miss_zipf17_n20000_c25;
    double dev = std::abs(m_rnd - exact) / se_rnd;

    bool ok = std::abs(m_rnd - 0.147) <= 0.01 && std::abs(m_lru - 0.108) <= 0.01 && dev <= 3.0;
    return {ok, fmt("rnd=%.5f (0.147+-0.01) lru=%.5f (0.108+-0.01) "
                    "|rnd-exact|=%.1e=%.2fse (limit 3se)",
                    m_rnd, m_lru, std::abs(m_rnd - exact), dev)};
}

/* 5. Large-cache estimate within 10% of the exact rate for alpha in
 *    {1.5,1.7}, C 20..100. */
Outcome criterion5()
{
    double worst = 0.0;
    for (double alpha : {1.5, 1.7}) {
        SymmetricCoefficients g(make_zipf(alpha), 101);
        for (int c = 20; c <= 100; ++c) {
            double est = miss_rate_asymptotic(Policy::rnd, alpha, c).value;
            double rel = std::abs(est / g.miss_rate(c) - 1.0);
            if (rel > worst) worst = rel;
        }
    }
    return {worst < 0.10, fmt("worst_rel=%.3f (limit 0.10)", worst)};
}

/* 6. FIFO and RND agree: aggregate within 4 pooled standard errors, and every
 *    rank r <= 50 within 4 binomial standard errors on pooled counts
 *    (alpha=1.7, N=20000, C=25). */
Outcome criterion6()
{
    auto d = make_zipf(1.7, 20000);
    RunConfig cfg;
    cfg.measure = 5000000;
    cfg.rank_cap = 60;

    TopologySpec spec;
    spec.level_sizes = {25};
    spec.level_policies = {Policy::fifo};
    cfg.seed = 314159;
    auto fifo = run_replications(spec, d, cfg, 6);
    spec.level_policies = {Policy::rnd};
    cfg.seed = 271828;
    auto rnd = run_replications(spec, d, cfg, 6);

    double diff = std::abs(fifo.local[0].mean - rnd.local[0].mean);
    double se = std::hypot(fifo.local[0].stderr_mean, rnd.local[0].stderr_mean);
    double agg_dev = diff / se;

    auto pool = [](const ReplicationSummary& s, std::uint32_t rank, std::uint64_t& arr,
                   std::uint64_t& mis) {
        arr = mis = 0;
        for (const auto& run : s.runs) {
            arr += run.rank_arrivals[0][rank - 1];
            mis += run.rank_misses[0][rank - 1];
        }
    };
    double worst_rank_dev = 0.0;
    for (std::uint32_t r = 1; r <= 50; ++r) {
        std::uint64_t af, mf, ar, mr;
        pool(fifo, r, af, mf);
        pool(rnd, r, ar, mr);
        double pf = double(mf) / double(af), pr = double(mr) / double(ar);
        double p = double(mf + mr) / double(af + ar);
        double se_r = std::sqrt(p * (1.0 - p) * (1.0 / double(af) + 1.0 / double(ar)));
        double dev = se_r > 0.0 ? std::abs(pf - pr) / se_r : 0.0;
        if (dev > worst_rank_dev) worst_rank_dev = dev;
    }

    bool ok = agg_dev <= 4.0 && worst_rank_dev <= 4.0;
    return {ok, fmt("aggregate_dev=%.2fse worst_rank_dev=%.2fse (limit 4se)", agg_dev,
                    worst_rank_dev)};
}

/* 7. All-RND tandem C1=C2=25, alpha=1.7: simulated second-level local miss
 *    within max(0.05, 15%) of the line model for r <= 100; analytic
 *    telescoping identity < 1e-10. */
Outcome criterion7()
{
    NetworkPlan plan;
    plan.alpha = 1.7;
    plan.levels = {{Policy::rnd, 25}, {Policy::rnd, 25}};
    double worst_tel = 0.0;
    for (int r = 1; r <= 100; ++r) {
        double prod = local_miss_per_object(plan, 1, r) * local_miss_per_object(plan, 2, r);
        double tel = std::abs(prod - global_miss_per_object(plan, 2, r));
        if (tel > worst_tel) worst_tel = tel;
    }

    TopologySpec spec;
    spec.level_policies = {Policy::rnd, Policy::rnd};
    spec.level_sizes = {25, 25};
    auto d = make_zipf(1.7, 20000);
    RunConfig cfg;
    cfg.measure = 4000000;
    cfg.seed = 777001;
    cfg.rank_cap = 101;
    auto sum = run_replications(spec, d, cfg, 5);

    double worst_margin = 0.0;
    int tested = 0, skipped = 0;
    for (std::uint32_t r = 1; r <= 100; ++r) {
        std::uint64_t arr = 0, mis = 0;
        for (const auto& run : sum.runs) {
            arr += run.rank_arrivals[1][r - 1];
            mis += run.rank_misses[1][r - 1];
        }
        if (arr < 100) {  // not estimable at this scale
            ++skipped;
            continue;
        }
        double sim = double(mis) / double(arr);
        double model = local_miss_per_object(plan, 2, r);
        double tol = std::max(0.05, 0.15 * model);
        double margin = std::abs(sim - model) / tol;
        if (margin > worst_margin) worst_margin = margin;
        ++tested;
    }

    bool ok = worst_tel < 1e-10 && worst_margin <= 1.0 && tested >= 90;
    return {ok, fmt("telescoping=%.1e (<1e-10) ranks_tested=%d skipped=%d "
                    "worst_margin=%.2f (limit 1.00 of max(0.05,15%%))",
                    worst_tel, tested, skipped, worst_margin)};
}

/* 8. Mixed two-level tree (J=2 leaves, C1=25, C2=50, alpha=1.7): root local
 *    miss within max(0.07, 20%) of the mixed-tandem model for r <= 100,
 *    both RND-LRU and LRU-RND.  Ranks that effectively never reach the root
 *    at this scale (< 100 pooled arrivals) are reported, not tested. */
Outcome criterion8()
{
    auto d = make_zipf(1.7, 20000);
    std::string note;
    bool all_ok = true;

    struct Arrangement {
        Policy leaf, root;
        std::uint64_t seed;
        const char* name;
    };
    const Arrangement arrangements[] = {
        {Policy::rnd, Policy::lru, 888001, "rnd-lru"},
        {Policy::lru, Policy::rnd, 999001, "lru-rnd"},
    };

    for (const auto& a : arrangements) {
        NetworkPlan plan;
        plan.alpha = 1.7;
        plan.levels = {{a.leaf, 25}, {a.root, 50}};

        TopologySpec spec;
        spec.level_policies = {a.leaf, a.root};
        spec.level_sizes = {25, 50};
        spec.leaf_weights = {0.5, 0.5};
        RunConfig cfg;
        cfg.measure = 4000000;
        cfg.seed = a.seed;
        cfg.rank_cap = 101;
        auto sum = run_replications(spec, d, cfg, 5);

        double worst_margin = 0.0;
        int tested = 0, skipped = 0;
        for (std::uint32_t r = 1; r <= 100; ++r) {
            std::uint64_t arr = 0, mis = 0;
            for (const auto& run : sum.runs) {
                arr += run.rank_arrivals[1][r - 1];
                mis += run.rank_misses[1][r - 1];
            }
            if (arr < 100) {
                ++skipped;
                continue;
            }
            double sim = double(mis) / double(arr);
            double model = a.leaf == Policy::rnd
                               ? mixed_tandem_rnd_then_lru(plan, r).level2_local
                               : mixed_tandem_lru_then_rnd(plan, r).level2_local;
            double tol = std::max(0.07, 0.20 * model);
            double margin = std::abs(sim - model) / tol;
            if (margin > worst_margin) worst_margin = margin;
            ++tested;
        }
        bool ok = worst_margin <= 1.0 && tested >= 80;
        all_ok = all_ok && ok;
        note += fmt("%s: tested=%d skipped=%d worst_margin=%.2f; ", a.name, tested, skipped,
                    worst_margin);
    }
    return {all_ok, note + "(limit 1.00 of max(0.07,20%))"};
}

/* 9. Prefactor limits: rho*(alpha-1) and lambda*(alpha-1) within 10% of 1 at
 *    alpha=1.01; rho within 5% of 1 and lambda*alpha/e^gamma within 5% of 1
 *    at alpha=100; rho > lambda across the grid. */
Outcome criterion9()
{
    double rho_low = prefactor_rnd(1.01) * 0.01;
    double lam_low = prefactor_lru(1.01) * 0.01;
    double rho_high = prefactor_rnd(100.0);
    double lam_high = prefactor_lru(100.0) * 100.0 / std::exp(frozen::euler_gamma);

    bool order = true;
    for (double a = 1.05; a <= 5.001; a += 0.05)
        order = order && prefactor_rnd(a) > prefactor_lru(a);
    for (double a : {10.0, 30.0, 100.0}) order = order && prefactor_rnd(a) > prefactor_lru(a);

    bool ok = std::abs(rho_low - 1.0) < 0.10 && std::abs(lam_low - 1.0) < 0.10 &&
              std::abs(rho_high - 1.0) < 0.05 && std::abs(lam_high - 1.0) < 0.05 && order;
    return {ok, fmt("rho(1.01)*(a-1)=%.3f lam(1.01)*(a-1)=%.3f (10%%); rho(100)=%.3f "
                    "lam(100)*a/e^gamma=%.3f (5%%); rho>lambda %s",
                    rho_low, lam_low, rho_high, lam_high, order ? "everywhere" : "VIOLATED")};
}

/* 10. Saddle solver: residual < 1e-9 relative, theta >= C, for alpha in
 *     {1.5,2,3}, C 1..200; leading-order ratio theta*A*rho/C^alpha within 5%
 *     at C=200. */
Outcome criterion10()
{
    double worst_resid = 0.0, worst_lead = 0.0;
    bool dominated = true;
    for (double alpha : {1.5, 2.0, 3.0}) {
        auto d = make_zipf(alpha);
        double a_norm = 1.0 / riemann_zeta(alpha);
        double rho = prefactor_rnd(alpha);
        for (int c = 1; c <= 200; ++c) {
            auto sp = saddle_point(d, c);
            double rel = sp.residual / double(c);
            if (rel > worst_resid) worst_resid = rel;
            dominated = dominated && sp.theta >= double(c) * (1.0 - 1e-12);
            if (c == 200) {
                double lead = sp.theta * a_norm * rho / std::pow(200.0, alpha);
                double off = std::abs(lead - 1.0);
                if (off > worst_lead) worst_lead = off;
            }
        }
    }
    bool ok = worst_resid < 1e-9 && dominated && worst_lead < 0.05;
    return {ok, fmt("worst_rel_residual=%.1e (<1e-9) theta>=C %s "
                    "|theta*A*rho/C^a-1|=%.3f at C=200 (<0.05)",
                    worst_resid, dominated ? "holds" : "VIOLATED", worst_lead)};
}

/* 11. Leaf-weight invariance: root per-rank miss under leaf weights
 *     (0.5,0.5) vs (0.9,0.1) shows no significant difference at family level
 *     0.001 (two-proportion z, Bonferroni over 50 ranks -> |z| < 4.2649).
 *
 *     Known honest failure at this sample size.  The rank mix of root
 *     arrivals is weight-invariant (the companion arrival-mix test below
 *     passes, and same-weighting A/A runs calibrate the z statistic cleanly),
 *     but per-rank root miss ratios differ by ~1% relative between the two
 *     weightings: each leaf's miss stream is anticorrelated with its own
 *     recent insertions, and the strength of that correlation in the merged
 *     stream depends on the mixing weights.  The effect reproduces across
 *     seeds and with an rnd root, so it is a property of the system, not of
 *     a particular run.  The verdict stays tied to the miss-ratio test. */
Outcome criterion11()
{
    auto d = make_zipf(1.7, 20000);
    auto run_weighting = [&](std::vector<double> weights, std::uint64_t seed) {
        TopologySpec spec;
        spec.level_policies = {Policy::rnd, Policy::lru};
        spec.level_sizes = {25, 50};
        spec.leaf_weights = std::move(weights);
        RunConfig cfg;
        cfg.measure = 4000000;
        cfg.seed = seed;
        cfg.rank_cap = 51;
        return run_replications(spec, d, cfg, 5);
    };
    auto even = run_weighting({0.5, 0.5}, 130101);
    auto skewed = run_weighting({0.9, 0.1}, 241701);

    const double crit = 4.2649;  // two-sided 2e-5 per test
    auto two_prop_z = [](std::uint64_t ka, std::uint64_t na, std::uint64_t kb, std::uint64_t nb) {
        double pa = double(ka) / double(na), pb = double(kb) / double(nb);
        double p = double(ka + kb) / double(na + nb);
        double se = std::sqrt(p * (1.0 - p) * (1.0 / double(na) + 1.0 / double(nb)));
        return se > 0.0 ? std::abs(pa - pb) / se : 0.0;
    };

    std::uint64_t root_a = 0, root_b = 0;
    for (const auto& run : even.runs) root_a += run.arrivals[1];
    for (const auto& run : skewed.runs) root_b += run.arrivals[1];

    double worst_z = 0.0, worst_mix_z = 0.0;
    int tested = 0, rejects = 0, mix_rejects = 0;
    for (std::uint32_t r = 1; r <= 50; ++r) {
        std::uint64_t na = 0, ma = 0, nb = 0, mb = 0;
        for (const auto& run : even.runs) {
            na += run.rank_arrivals[1][r - 1];
            ma += run.rank_misses[1][r - 1];
        }
        for (const auto& run : skewed.runs) {
            nb += run.rank_arrivals[1][r - 1];
            mb += run.rank_misses[1][r - 1];
        }
        double mz = two_prop_z(na, root_a, nb, root_b);
        if (mz > worst_mix_z) worst_mix_z = mz;
        if (mz > crit) ++mix_rejects;
        if (na < 100 || nb < 100) continue;
        double z = two_prop_z(ma, na, mb, nb);
        if (z > worst_z) worst_z = z;
        if (z > crit) ++rejects;
        ++tested;
    }
    bool ok = rejects == 0 && tested >= 30;
    return {ok, fmt("ranks_tested=%d rejects=%d max|z|=%.2f (crit %.4f, family level 0.001); "
                    "arrival mix: rejects=%d max|z|=%.2f (invariant)",
                    tested, rejects, worst_z, crit, mix_rejects, worst_mix_z)};
}

} // namespace

int main(int argc, char** argv)
{
    using Fn = Outcome (*)();
    const Fn checks[] = {criterion1, criterion2, criterion3, criterion4,  criterion5, criterion6,
                         criterion7, criterion8, criterion9, criterion10, criterion11};
    const int total = int(sizeof checks / sizeof checks[0]);

    std::vector<int> selected;
    for (int i = 1; i < argc; ++i) {
        int k = std::atoi(argv[i]);
        if (k < 1 || k > total) {
            std::fprintf(stderr, "unknown criterion '%s' (valid: 1..%d)\n", argv[i], total);
            return 2;
        }
        selected.push_back(k);
    }
    if (selected.empty())
        for (int k = 1; k <= total; ++k) selected.push_back(k);

    int failures = 0;
    for (int k : selected) {
        auto t0 = std::chrono::steady_clock::now();
        Outcome out = checks[k - 1]();
        std::printf("C%-2d %s  %s  [%.1fs]\n", k, out.ok ? "PASS" : "FAIL", out.detail.c_str(),
                    seconds_since(t0));
        std::fflush(stdout);
        if (!out.ok) ++failures;
    }
    if (failures) std::printf("%d of %zu criteria failed\n", failures, selected.size());
    return failures ? 1 : 0;
}
