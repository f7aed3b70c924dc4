#include "cachemiss/errors.hpp"
#include "cachemiss/network.hpp"
#include "cachemiss/oracle.hpp"
#include "cachemiss/simulate.hpp"
#include "cachemiss/single_cache.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace cachemiss;
using nlohmann::json;

namespace {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct VerifyFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Settings {
    std::optional<double> alpha, kappa;
    std::optional<std::uint64_t> catalog, warmup, measure, seed;
    std::optional<std::vector<std::uint64_t>> sizes;
    std::optional<std::vector<std::string>> policies;
    std::optional<std::vector<double>> leaf_weights, alphas;
    std::optional<int> cmax, level, jobs;
    std::optional<std::uint32_t> reps, rank_cap, ranks;
    std::optional<bool> per_rank, quick;
};

void overlay(Settings& base, const Settings& over) {
    auto put = [](auto& dst, const auto& src) {
        if (src)
            dst = src;
    };
    put(base.alpha, over.alpha);
    put(base.kappa, over.kappa);
    put(base.catalog, over.catalog);
    put(base.warmup, over.warmup);
    put(base.measure, over.measure);
    put(base.seed, over.seed);
    put(base.sizes, over.sizes);
    put(base.policies, over.policies);
    put(base.leaf_weights, over.leaf_weights);
    put(base.alphas, over.alphas);
    put(base.cmax, over.cmax);
    put(base.level, over.level);
    put(base.jobs, over.jobs);
    put(base.reps, over.reps);
    put(base.rank_cap, over.rank_cap);
    put(base.ranks, over.ranks);
    put(base.per_rank, over.per_rank);
    put(base.quick, over.quick);
}

struct Preset {
    std::string mode;
    Settings s;
    std::vector<std::pair<double, std::uint64_t>> analyze_grid;  // (alpha, catalog; 0 = inf)
    bool mixed_both = false;
};

std::optional<Preset> preset_by_name(const std::string& name) {
    Preset p;
    if (name == "fig-prefactors") {
        p.mode = "sweep";
        std::vector<double> grid;
        for (int i = 0; i <= 79; ++i)
            grid.push_back(1.05 + 0.05 * i);
        p.s.alphas = grid;
        return p;
    }
    if (name == "fig-single") {
        p.mode = "analyze";
        p.s.cmax = 100;
        for (double a : {1.5, 1.7})
            for (std::uint64_t n : {std::uint64_t(2000), std::uint64_t(5000),
                                    std::uint64_t(20000), std::uint64_t(0)})
                p.analyze_grid.emplace_back(a, n);
        return p;
    }
    if (name == "fig-tandem") {
        p.mode = "compare";
        p.s.alpha = 1.7;
        p.s.catalog = 20000;
        p.s.sizes = std::vector<std::uint64_t>{25, 25};
        p.s.policies = std::vector<std::string>{"rnd", "rnd"};
        p.s.level = 2;
        p.s.ranks = 100;
        p.s.measure = 20000000;
        p.s.reps = 5;
        p.s.seed = 7;
        return p;
    }
    if (name == "fig-mixed") {
        p.mode = "compare";
        p.s.alpha = 1.7;
        p.s.catalog = 20000;
        p.s.sizes = std::vector<std::uint64_t>{25, 50};
        p.s.leaf_weights = std::vector<double>{0.5, 0.5};
        p.s.level = 2;
        p.s.ranks = 100;
        p.s.measure = 20000000;
        p.s.reps = 5;
        p.s.seed = 11;
        p.mixed_both = true;
        return p;
    }
    return std::nullopt;
}

Settings from_json_file(const std::string& path) {
    std::ifstream f(path);
    if (!f)
        throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        f >> j;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config parse: ") + e.what());
    }
    if (!j.is_object())
        throw ConfigError("config root must be an object");
    static const std::vector<std::string> known = {
        "alpha",   "kappa",   "catalog", "warmup",   "measure",  "seed",
        "sizes",   "policies", "leaf_weights", "alphas", "cmax", "level",
        "jobs",    "reps",    "rank_cap", "ranks",   "per_rank", "quick"};
    for (const auto& [key, _] : j.items())
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw ConfigError("unknown config key: " + key);
    Settings s;
    try {
        if (j.contains("alpha")) s.alpha = j["alpha"].get<double>();
        if (j.contains("kappa")) s.kappa = j["kappa"].get<double>();
        if (j.contains("catalog")) s.catalog = j["catalog"].get<std::uint64_t>();
        if (j.contains("warmup")) s.warmup = j["warmup"].get<std::uint64_t>();
        if (j.contains("measure")) s.measure = j["measure"].get<std::uint64_t>();
        if (j.contains("seed")) s.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("sizes")) s.sizes = j["sizes"].get<std::vector<std::uint64_t>>();
        if (j.contains("policies")) s.policies = j["policies"].get<std::vector<std::string>>();
        if (j.contains("leaf_weights"))
            s.leaf_weights = j["leaf_weights"].get<std::vector<double>>();
        if (j.contains("alphas")) s.alphas = j["alphas"].get<std::vector<double>>();
        if (j.contains("cmax")) s.cmax = j["cmax"].get<int>();
        if (j.contains("level")) s.level = j["level"].get<int>();
        if (j.contains("jobs")) s.jobs = j["jobs"].get<int>();
        if (j.contains("reps")) s.reps = j["reps"].get<std::uint32_t>();
        if (j.contains("rank_cap")) s.rank_cap = j["rank_cap"].get<std::uint32_t>();
        if (j.contains("ranks")) s.ranks = j["ranks"].get<std::uint32_t>();
        if (j.contains("per_rank")) s.per_rank = j["per_rank"].get<bool>();
        if (j.contains("quick")) s.quick = j["quick"].get<bool>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config value: ") + e.what());
    }
    return s;
}

json settings_json(const Settings& s, const std::string& mode) {
    json j;
    j["mode"] = mode;
    auto put = [&](const char* key, const auto& v) {
        if (v)
            j[key] = *v;
    };
    put("alpha", s.alpha);
    put("kappa", s.kappa);
    put("catalog", s.catalog);
    put("warmup", s.warmup);
    put("measure", s.measure);
    put("seed", s.seed);
    put("sizes", s.sizes);
    put("policies", s.policies);
    put("leaf_weights", s.leaf_weights);
    put("alphas", s.alphas);
    put("cmax", s.cmax);
    put("level", s.level);
    put("reps", s.reps);
    put("rank_cap", s.rank_cap);
    put("ranks", s.ranks);
    put("per_rank", s.per_rank);
    put("quick", s.quick);
    return j;
}

std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string cell(double v) {
    if (std::isnan(v))
        return "NA";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

struct Csv {
    std::ostream& os;

    void comment(const Settings& s, const std::string& mode) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%016llx",
                      (unsigned long long)fnv1a64(settings_json(s, mode).dump()));
        os << "# config=" << buf << " seed=" << (s.seed ? *s.seed : 1) << "\n";
    }

    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i)
            os << (i ? "," : "") << cells[i];
        os << "\n";
    }
};

Policy policy_from(const std::string& s) {
    try {
        return parse_policy(s);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

TopologySpec topology_from(const Settings& s) {
    if (!s.sizes || s.sizes->empty())
        throw ConfigError("need --sizes");
    TopologySpec spec;
    spec.level_sizes = *s.sizes;
    if (s.policies) {
        if (s.policies->size() != spec.level_sizes.size())
            throw ConfigError("--policies and --sizes must have equal length");
        for (const auto& p : *s.policies)
            spec.level_policies.push_back(policy_from(p));
    } else {
        spec.level_policies.assign(spec.level_sizes.size(), Policy::rnd);
    }
    if (s.leaf_weights)
        spec.leaf_weights = *s.leaf_weights;
    try {
        validate_topology(spec);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return spec;
}

PopularityDistribution sim_distribution(const Settings& s) {
    if (s.kappa)
        throw ConfigError("simulation needs a finite catalog; geometric is analytic-only");
    if (!s.alpha)
        throw ConfigError("need --alpha");
    if (!s.catalog || *s.catalog == 0)
        throw ConfigError("need --catalog (finite) to simulate");
    return make_zipf(*s.alpha, *s.catalog);
}

std::vector<MissReport> parallel_runs(const TopologySpec& spec, const PopularityDistribution& dist,
                                      const RunConfig& base, std::uint32_t reps, int jobs) {
    if (jobs <= 0)
        jobs = int(std::max(1u, std::thread::hardware_concurrency()));
    jobs = std::min<int>(jobs, int(reps));
    std::vector<MissReport> out(reps);
    std::vector<std::exception_ptr> errors(reps);
    std::atomic<std::uint32_t> next{0};
    auto work = [&] {
        for (;;) {
            std::uint32_t i = next.fetch_add(1);
            if (i >= reps)
                return;
            try {
                RunConfig c = base;
                c.seed = base.seed + i;
                c.replication_id = i;
                out[i] = run_topology(spec, dist, c);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (jobs == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < jobs; ++t)
            pool.emplace_back(work);
        for (auto& t : pool)
            t.join();
    }
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
    return out;
}

RunConfig run_config_from(const Settings& s, const TopologySpec& spec,
                          const PopularityDistribution& dist) {
    RunConfig cfg;
    cfg.measure = s.measure.value_or(1000000);
    cfg.seed = s.seed.value_or(1);
    cfg.rank_cap = s.rank_cap.value_or(500);
    cfg.warmup = s.warmup.value_or(0);
    if (cfg.warmup == 0)
        cfg.warmup = default_warmup(spec, dist);
    return cfg;
}

void run_analyze(const Settings& s, const Preset* preset, std::ostream& os) {
    int cmax = s.cmax.value_or(100);
    if (cmax < 0)
        throw ConfigError("cmax must be >= 0");

    struct Combo {
        bool geometric;
        double param;
        std::uint64_t catalog;  // 0 = infinite
    };
    std::vector<Combo> combos;
    if (preset && !preset->analyze_grid.empty()) {
        for (auto [a, n] : preset->analyze_grid)
            combos.push_back({false, a, n});
    } else if (s.kappa) {
        combos.push_back({true, *s.kappa, 0});
    } else if (s.alpha) {
        combos.push_back({false, *s.alpha, s.catalog.value_or(0)});
    } else {
        throw ConfigError("need --alpha or --kappa");
    }

    Csv csv{os};
    csv.comment(s, "analyze");
    csv.row({"family", "param", "catalog", "cache", "miss_exact", "rnd_estimate",
             "lru_estimate", "saddle_miss", "saddle_theta"});

    for (const auto& combo : combos) {
        PopularityDistribution dist =
            combo.geometric ? make_geometric(combo.param)
            : combo.catalog ? make_zipf(combo.param, combo.catalog)
                            : make_zipf(combo.param);
        std::uint64_t n = dist.finite() ? *dist.support() : 0;
        int chain_top = cmax + 1;
        if (dist.finite())
            chain_top = int(std::min<std::uint64_t>(chain_top, n + 1));
        SymmetricCoefficients sc(dist, chain_top);
        std::string family = combo.geometric ? "geometric" : "zipf";
        std::string catalog = combo.catalog ? std::to_string(combo.catalog) : "inf";
        for (int c = 0; c <= cmax; ++c) {
            double exact = (dist.finite() && std::uint64_t(c) >= n)
                               ? 0.0
                               : (c < chain_top ? sc.miss_rate(c) : 0.0);
            double rnd_est = NAN, lru_est = NAN, sad_m = NAN, sad_t = NAN;
            if (!combo.geometric && c >= 1) {
                rnd_est = miss_rate_asymptotic(Policy::rnd, combo.param, c).value;
                lru_est = miss_rate_asymptotic(Policy::lru, combo.param, c).value;
            }
            if (c >= 1 && (!dist.finite() || std::uint64_t(c) < n)) {
                SaddlePoint sp = saddle_point(dist, c);
                sad_t = sp.theta;
                sad_m = miss_rate_saddle(dist, c);
            }
            csv.row({family, cell(combo.param), catalog, std::to_string(c), cell(exact),
                     cell(rnd_est), cell(lru_est), cell(sad_m), cell(sad_t)});
        }
    }
}

void run_sweep(const Settings& s, std::ostream& os) {
    Csv csv{os};
    csv.comment(s, "sweep");
    csv.row({"alpha", "rnd_prefactor", "lru_prefactor", "prefactor_ratio"});
    std::vector<double> grid;
    if (s.alphas) {
        grid = *s.alphas;
    } else {
        for (int i = 0; i <= 79; ++i)
            grid.push_back(1.05 + 0.05 * i);
    }
    for (double a : grid) {
        if (!(a > 1.0))
            throw ConfigError("sweep alphas must be > 1");
        double rho = prefactor_rnd(a);
        double lam = prefactor_lru(a);
        csv.row({cell(a), cell(rho), cell(lam), cell(rho / lam)});
    }
}

void run_simulate(const Settings& s, std::ostream& os) {
    TopologySpec spec = topology_from(s);
    PopularityDistribution dist = sim_distribution(s);
    RunConfig cfg = run_config_from(s, spec, dist);
    std::uint32_t reps = s.reps.value_or(1);
    auto runs = parallel_runs(spec, dist, cfg, reps, s.jobs.value_or(0));
    ReplicationSummary sum = summarize_runs(spec, std::move(runs));

    Csv csv{os};
    csv.comment(s, "simulate");
    if (s.per_rank.value_or(false)) {
        csv.row({"level", "rank", "arrivals", "misses", "local_miss"});
        for (std::size_t l = 0; l < spec.levels(); ++l) {
            for (std::uint32_t slot = 0; slot <= cfg.rank_cap; ++slot) {
                std::uint64_t arr = 0, mis = 0;
                for (const auto& r : sum.runs) {
                    arr += r.rank_arrivals[l][slot];
                    mis += r.rank_misses[l][slot];
                }
                std::string rank =
                    slot < cfg.rank_cap ? std::to_string(slot + 1) : std::string("tail");
                double local = arr ? double(mis) / double(arr) : NAN;
                csv.row({std::to_string(l + 1), rank, std::to_string(arr),
                         std::to_string(mis), cell(local)});
            }
        }
        return;
    }
    csv.row({"level", "policy", "size", "local_mean", "local_sd", "local_se", "global_mean",
             "global_sd", "global_se", "reps", "measure", "warmup"});
    for (std::size_t l = 0; l < spec.levels(); ++l) {
        csv.row({std::to_string(l + 1), to_string(spec.level_policies[l]),
                 std::to_string(spec.level_sizes[l]), cell(sum.local[l].mean),
                 cell(sum.local[l].stddev), cell(sum.local[l].stderr_mean),
                 cell(sum.global[l].mean), cell(sum.global[l].stddev),
                 cell(sum.global[l].stderr_mean), std::to_string(reps),
                 std::to_string(cfg.measure), std::to_string(cfg.warmup)});
    }
}

/* Model-side per-rank local miss at `level` for the given policy line. */
std::vector<double> model_locals(const std::vector<Policy>& policies,
                                 const std::vector<std::uint64_t>& sizes, double alpha,
                                 std::size_t level, std::uint32_t ranks) {
    auto is_rndish = [](Policy p) { return p == Policy::rnd || p == Policy::fifo; };
    std::vector<double> out(ranks);
    bool all_rnd = true, all_lru = true;
    for (Policy p : policies) {
        all_rnd = all_rnd && is_rndish(p);
        all_lru = all_lru && p == Policy::lru;
    }
    if (all_rnd) {
        NetworkPlan plan;
        plan.alpha = alpha;
        for (std::size_t i = 0; i < sizes.size(); ++i)
            plan.levels.push_back({Policy::rnd, sizes[i]});
        for (std::uint32_t r = 1; r <= ranks; ++r)
            out[r - 1] = local_miss_per_object(plan, level, double(r));
        return out;
    }
    if (all_lru) {
        NetworkPlan plan;
        plan.alpha = alpha;
        for (std::size_t i = 0; i < sizes.size(); ++i)
            plan.levels.push_back({Policy::lru, sizes[i]});
        std::vector<double> rv(ranks);
        for (std::uint32_t r = 1; r <= ranks; ++r)
            rv[r - 1] = double(r);
        auto prof = lru_line_profile(plan, rv);
        return prof.local_miss[level - 1];
    }
    if (policies.size() == 2 && is_rndish(policies[0]) && policies[1] == Policy::lru) {
        NetworkPlan plan{{{Policy::rnd, sizes[0]}, {Policy::lru, sizes[1]}}, alpha};
        for (std::uint32_t r = 1; r <= ranks; ++r) {
            auto t = mixed_tandem_rnd_then_lru(plan, double(r));
            out[r - 1] = level == 1 ? t.level1_global : t.level2_local;
        }
        return out;
    }
    if (policies.size() == 2 && policies[0] == Policy::lru && is_rndish(policies[1])) {
        NetworkPlan plan{{{Policy::lru, sizes[0]}, {Policy::rnd, sizes[1]}}, alpha};
        for (std::uint32_t r = 1; r <= ranks; ++r) {
            auto t = mixed_tandem_lru_then_rnd(plan, double(r));
            out[r - 1] = level == 1 ? t.level1_global : t.level2_local;
        }
        return out;
    }
    throw ConfigError("no analytic model for this policy arrangement");
}

void run_compare(const Settings& s, const Preset* preset, std::ostream& os) {
    PopularityDistribution dist = sim_distribution(s);
    std::vector<std::vector<std::string>> arrangements;
    if (preset && preset->mixed_both) {
        arrangements = {{"rnd", "lru"}, {"lru", "rnd"}};
    } else if (s.policies) {
        arrangements = {*s.policies};
    } else {
        throw ConfigError("need --policies");
    }

    Csv csv{os};
    csv.comment(s, "compare");
    csv.row({"variant", "level", "rank", "arrivals", "misses", "sim_local", "model_local",
             "abs_diff"});

    for (const auto& pol : arrangements) {
        Settings local_s = s;
        local_s.policies = pol;
        TopologySpec spec = topology_from(local_s);
        std::size_t level = std::size_t(s.level.value_or(int(spec.levels())));
        if (level < 1 || level > spec.levels())
            throw ConfigError("compare level out of range");
        std::uint32_t ranks = s.ranks.value_or(100);
        if (s.rank_cap && *s.rank_cap < ranks)
            throw ConfigError("rank_cap must cover requested ranks");

        RunConfig cfg = run_config_from(s, spec, dist);
        cfg.rank_cap = std::max(cfg.rank_cap, ranks);
        auto runs = parallel_runs(spec, dist, cfg, s.reps.value_or(3), s.jobs.value_or(0));

        auto model = model_locals(spec.level_policies, spec.level_sizes, *s.alpha, level, ranks);
        std::string variant;
        for (std::size_t i = 0; i < pol.size(); ++i)
            variant += (i ? "-" : "") + pol[i];
        for (std::uint32_t r = 1; r <= ranks; ++r) {
            std::uint64_t arr = 0, mis = 0;
            for (const auto& run : runs) {
                arr += run.rank_arrivals[level - 1][r - 1];
                mis += run.rank_misses[level - 1][r - 1];
            }
            double sim = arr ? double(mis) / double(arr) : NAN;
            double diff = arr ? std::fabs(sim - model[r - 1]) : NAN;
            csv.row({variant, std::to_string(level), std::to_string(r), std::to_string(arr),
                     std::to_string(mis), cell(sim), cell(model[r - 1]), cell(diff)});
        }
    }
}

int run_verify(const Settings& s, std::ostream& os) {
    bool quick = s.quick.value_or(false);
    int fails = 0;
    auto report = [&](const std::string& name, double value, double tol) {
        bool ok = value <= tol;
        if (!ok)
            ++fails;
        os << (ok ? "PASS" : "FAIL") << " " << name << " value=" << cell(value)
           << " tol=" << cell(tol) << "\n";
    };

    int top = quick ? 40 : 100;
    {
        auto d = make_zipf(2.0);
        SymmetricCoefficients sc(d, top + 1);
        double worst = 0.0;
        for (int c = 0; c <= top; ++c)
            worst = std::max(worst,
                             std::fabs(sc.miss_rate(c) / miss_rate_zipf_closed(2, c) - 1.0));
        report("single-zipf-closed-form", worst, 1e-9);
    }
    {
        auto d = make_geometric(0.5);
        SymmetricCoefficients sc(d, top + 1);
        double worst = 0.0;
        for (int c = 0; c <= top; ++c)
            worst = std::max(worst,
                             std::fabs(sc.miss_rate(c) / miss_rate_geometric(0.5, c) - 1.0));
        report("single-geometric-closed-form", worst, 1e-10);
    }
    {
        auto d = make_zipf(1.2, 6);
        auto chain = build_chain_rnd(d, 2);
        auto st = stationary_distribution(chain);
        auto pf = product_form(chain);
        report("oracle-product-form-tv", total_variation(st.pi, pf), 1e-10);
        report("oracle-balance-residual", balance_residual(chain, pf), 1e-12);
        SymmetricCoefficients sc(d, 3);
        double worst = 0.0;
        for (std::uint32_t r = 1; r <= 6; ++r)
            worst = std::max(worst, std::fabs(object_absence(chain, st.pi, r) -
                                              per_object_miss_exact(sc, 2, r)));
        report("oracle-object-recurrence", worst, 1e-12);
    }
    {
        NetworkPlan plan{{{Policy::rnd, 25}, {Policy::rnd, 25}, {Policy::rnd, 25}}, 1.7};
        double rho = prefactor_rnd(1.7);
        double worst_tel = 0.0, worst_rec = 0.0;
        for (std::uint32_t r = 1; r <= (quick ? 50u : 200u); ++r) {
            double prod = 1.0;
            for (std::size_t l = 1; l <= 3; ++l)
                prod *= local_miss_per_object(plan, l, r);
            worst_tel = std::max(worst_tel,
                                 std::fabs(prod - global_miss_per_object(plan, 3, r)));
            for (std::size_t l = 1; l < 3; ++l) {
                double lhs =
                    1.0 / global_miss_per_object(plan, l + 1, r) -
                    1.0 / global_miss_per_object(plan, l, r);
                double rhs = std::pow(25.0, 1.7) / (rho * std::pow(double(r), 1.7));
                worst_rec = std::max(worst_rec, std::fabs(lhs - rhs) / rhs);
            }
        }
        report("line-telescoping", worst_tel, 1e-12);
        report("line-size-recursion", worst_rec, 1e-10);
    }
    {
        auto d = make_zipf(1.7);
        double worst = 0.0, floor_ok = 0.0;
        for (int c = 1; c <= top; ++c) {
            SaddlePoint sp = saddle_point(d, c);
            worst = std::max(worst, sp.residual / double(c));
            if (sp.theta < double(c))
                floor_ok = 1.0;
        }
        report("saddle-residual", worst, 1e-9);
        report("saddle-theta-floor", floor_ok, 0.0);
    }
    {
        TopologySpec spec;
        spec.level_policies = {Policy::rnd, Policy::lru};
        spec.level_sizes = {16, 32};
        spec.leaf_weights = {0.6, 0.4};
        auto d = make_zipf(1.7, 2000);
        RunConfig cfg;
        cfg.measure = quick ? 100000 : 400000;
        cfg.warmup = 100000;
        cfg.seed = 5;
        auto a = run_topology(spec, d, cfg);
        auto b = run_topology(spec, d, cfg);
        report("sim-conservation",
               a.arrivals[1] == a.misses[0] ? 0.0 : 1.0, 0.0);
        report("sim-determinism", a.misses == b.misses ? 0.0 : 1.0, 0.0);
    }
    os << (fails ? "FAIL" : "PASS") << " total: " << fails << " failing check(s)\n";
    return fails ? 4 : 0;
}

std::ofstream file_sink;

std::ostream& resolve_out(const std::optional<std::string>& out) {
    if (!out || *out == "-")
        return std::cout;
    std::filesystem::path p = *out;
    if (p.is_relative())
        if (const char* env = std::getenv("CACHEMISS_OUT_DIR"))
            p = std::filesystem::path(env) / p;
    if (p.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(p.parent_path(), ec);
    }
    file_sink.open(p);
    if (!file_sink)
        throw ConfigError("cannot open output file: " + p.string());
    return file_sink;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"miss rate models and simulation for hierarchies of caches"};
    app.fallthrough();

    std::string preset_name, config_path, out_path;
    double alpha = 0, kappa = 0;
    std::uint64_t catalog = 0, warmup = 0, measure = 0, seed = 0;
    std::vector<std::uint64_t> sizes;
    std::vector<std::string> policies;
    std::vector<double> leaf_weights, alphas;
    int cmax = 0, level = 0, jobs = 0;
    std::uint32_t reps = 0, rank_cap = 0, ranks = 0;
    bool per_rank = false, quick = false;

    auto* o_preset = app.add_option("--preset", preset_name,
                                    "named configuration: fig-prefactors, fig-single, "
                                    "fig-tandem, fig-mixed");
    auto* o_config = app.add_option("--config", config_path, "JSON settings file");
    auto* o_out = app.add_option("--out", out_path,
                                 "output file; '-' for stdout; relative paths land in "
                                 "$CACHEMISS_OUT_DIR when set");
    auto* o_alpha = app.add_option("--alpha", alpha, "zipf exponent");
    auto* o_kappa = app.add_option("--kappa", kappa, "geometric ratio (analytic modes)");
    auto* o_catalog = app.add_option("--catalog", catalog, "catalog size; 0 means infinite");
    auto* o_sizes = app.add_option("--sizes", sizes, "cache size per level")->delimiter(',');
    auto* o_policies =
        app.add_option("--policies", policies, "policy per level: rnd, fifo, lru")
            ->delimiter(',');
    auto* o_weights = app.add_option("--leaf-weights", leaf_weights,
                                     "request share per leaf cache")
                          ->delimiter(',');
    auto* o_alphas = app.add_option("--alphas", alphas, "sweep grid")->delimiter(',');
    auto* o_cmax = app.add_option("--cmax", cmax, "largest cache size in analyze tables");
    auto* o_level = app.add_option("--level", level, "level compared against the model");
    auto* o_jobs = app.add_option("--jobs", jobs, "worker threads (default: all cores)");
    auto* o_warmup = app.add_option("--warmup", warmup, "warmup requests; 0 sizes it");
    auto* o_measure = app.add_option("--measure", measure, "measured requests per run");
    auto* o_reps = app.add_option("--reps", reps, "replications");
    auto* o_seed = app.add_option("--seed", seed, "base seed; replication i adds i");
    auto* o_rank_cap = app.add_option("--rank-cap", rank_cap, "per-rank counters kept");
    auto* o_ranks = app.add_option("--ranks", ranks, "ranks in comparison tables");
    auto* o_per_rank = app.add_flag("--per-rank", per_rank, "per-rank simulation table");
    auto* o_quick = app.add_flag("--quick", quick, "smaller verification ranges");

    auto* sub_analyze = app.add_subcommand("analyze", "tabulate model miss rates");
    auto* sub_simulate = app.add_subcommand("simulate", "run the event simulator");
    auto* sub_compare = app.add_subcommand("compare", "simulation against the model, per rank");
    auto* sub_verify = app.add_subcommand("verify", "internal consistency checks");
    auto* sub_sweep = app.add_subcommand("sweep", "asymptotic constants over alpha");
    app.require_subcommand(0, 1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        Settings flags;
        if (*o_alpha) flags.alpha = alpha;
        if (*o_kappa) flags.kappa = kappa;
        if (*o_catalog) flags.catalog = catalog;
        if (*o_warmup) flags.warmup = warmup;
        if (*o_measure) flags.measure = measure;
        if (*o_seed) flags.seed = seed;
        if (*o_sizes) flags.sizes = sizes;
        if (*o_policies) flags.policies = policies;
        if (*o_weights) flags.leaf_weights = leaf_weights;
        if (*o_alphas) flags.alphas = alphas;
        if (*o_cmax) flags.cmax = cmax;
        if (*o_level) flags.level = level;
        if (*o_jobs) flags.jobs = jobs;
        if (*o_reps) flags.reps = reps;
        if (*o_rank_cap) flags.rank_cap = rank_cap;
        if (*o_ranks) flags.ranks = ranks;
        if (*o_per_rank) flags.per_rank = true;
        if (*o_quick) flags.quick = true;

        std::optional<Preset> preset;
        if (*o_preset) {
            preset = preset_by_name(preset_name);
            if (!preset)
                throw ConfigError("unknown preset: " + preset_name);
        }

        Settings eff;
        if (preset)
            overlay(eff, preset->s);
        if (*o_config)
            overlay(eff, from_json_file(config_path));
        overlay(eff, flags);

        std::string mode;
        if (sub_analyze->parsed()) mode = "analyze";
        else if (sub_simulate->parsed()) mode = "simulate";
        else if (sub_compare->parsed()) mode = "compare";
        else if (sub_verify->parsed()) mode = "verify";
        else if (sub_sweep->parsed()) mode = "sweep";
        else if (preset) mode = preset->mode;
        else throw ConfigError("pick a mode or a preset");

        std::optional<std::string> out;
        if (*o_out)
            out = out_path;
        std::ostream& os = resolve_out(out);

        const Preset* pp = preset ? &*preset : nullptr;
        if (mode == "analyze") run_analyze(eff, pp, os);
        else if (mode == "simulate") run_simulate(eff, os);
        else if (mode == "compare") run_compare(eff, pp, os);
        else if (mode == "sweep") run_sweep(eff, os);
        else if (mode == "verify") return run_verify(eff, os);
        os.flush();
        if (&os != &std::cout && !os)
            throw ConfigError("failed writing output");
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const PrecisionError& e) {
        std::cerr << "precision error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
