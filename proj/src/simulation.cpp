#include "forestfill/simulation.hpp"

#include <array>
#include <atomic>
#include <chrono>
#include <mutex>

#include "forestfill/errors.hpp"
#include "forestfill/metrics.hpp"

namespace forestfill {

std::string to_string(PatternKind kind) {
    return kind == PatternKind::TwoCells ? "two_cells" : "one_cell";
}

PatternKind parse_pattern(const std::string& name) {
    if (name == "two_cells") return PatternKind::TwoCells;
    if (name == "one_cell") return PatternKind::OneCell;
    throw ParseError("unknown pattern '" + name + "' (expected two_cells or one_cell)");
}

void ScenarioConfig::validate() const {
    if (n_obs < 10) throw InvalidInput("n_obs must be >= 10");
    if (n_replicates < 1) throw InvalidInput("n_replicates must be >= 1");
    if (strategies.empty()) throw InvalidInput("at least one strategy is required");
    for (const auto& s : strategies) forestfill::validate(s);
    if (imputer.max_iterations < 1) throw InvalidInput("max_iterations must be >= 1");
    imputer.forest.validate(2);
    if (!(prop > 0.0 && prop < 1.0)) throw InvalidInput("prop must lie in (0, 1)");
}

DataMatrix generate_scenario(ScenarioKind kind, std::size_t n, const SeedSpec& seed) {
    DataMatrix m = sample_mvn(scenario_mvn(kind), n, seed);
    m.set_column_names({"Y", "X1", "X2"});
    return m;
}

namespace {

enum Stage : std::uint64_t { kData = 0, kAmputation = 1, kImputation = 2 };

std::uint64_t id(ScenarioKind k) { return static_cast<std::uint64_t>(k); }
std::uint64_t id(PatternKind k) { return static_cast<std::uint64_t>(k); }

}  // namespace

SeedSpec data_seed(const ScenarioConfig& cfg, std::size_t replicate) {
    return SeedSpec(cfg.master_seed, {kData, id(cfg.scenario), replicate});
}

SeedSpec amputation_seed(const ScenarioConfig& cfg, std::size_t replicate) {
    return SeedSpec(cfg.master_seed, {kAmputation, id(cfg.scenario), id(cfg.pattern), replicate});
}

SeedSpec imputation_seed(const ScenarioConfig& cfg, std::size_t replicate) {
    return SeedSpec(cfg.master_seed, {kImputation, id(cfg.scenario), id(cfg.pattern), replicate});
}

MetricsRecord measure(const DataMatrix& complete, const MissingMask& mask,
                      const ImputationResult& result, ScenarioKind scenario) {
    const ScenarioTruth truth = scenario_truth(scenario);
    const DataMatrix& imp = result.imputed;
    MetricsRecord r;
    r.iterations = result.iterations_performed;
    r.stopped_by = to_string(result.stopped_by);
    r.rel_bias_mean_x1 = relative_bias_mean(imp.column(1), complete.column(1));
    r.rel_bias_mean_x2 = relative_bias_mean(imp.column(2), complete.column(2));
    r.rel_bias_sd_x1 = relative_bias_sd(imp.column(1), complete.column(1));
    r.rel_bias_sd_x2 = relative_bias_sd(imp.column(2), complete.column(2));

    const std::array<std::span<const double>, 2> xs{imp.column(1), imp.column(2)};
    const OlsFit fit = ols_with_intercept(imp.column(0), xs);
    const auto bias = coef_relative_bias(fit.coefficients, truth.true_coefs);
    r.coef_bias_b0 = bias[0].value;
    r.coef_bias_b0_kind = bias[0].kind;
    r.coef_bias_b1 = bias[1].value;
    r.coef_bias_b2 = bias[2].value;

    r.nrmse_true = nrmse(complete, imp, mask);
    r.nrmse_oob = result.oob_nrmse_final;
    r.corr_x1x2 = pearson(imp.column(1), imp.column(2));
    return r;
}

ReplicateBundle run_replicate(const ScenarioConfig& cfg, std::size_t replicate_id, ThreadPool* pool) {
    ReplicateBundle b;
    auto label = [&](MetricsRecord& r, const ImputationStrategy& s) {
        r.replicate = replicate_id;
        r.scenario = to_string(cfg.scenario);
        r.pattern = to_string(cfg.pattern);
        r.strategy = strategy_name(s);
    };
    auto fail_all = [&](const std::string& why) {
        b.results.clear();
        b.records.clear();
        for (const auto& s : cfg.strategies) {
            MetricsRecord r;
            label(r, s);
            r.ok = false;
            r.error = why;
            b.records.push_back(r);
        }
    };

    try {
        b.complete = generate_scenario(cfg.scenario, cfg.n_obs, data_seed(cfg, replicate_id));
        const AmputationOutcome amp =
            ampute(b.complete, scenario_patterns(cfg.pattern, cfg.prop), amputation_seed(cfg, replicate_id));
        b.mask = amp.mask;
        b.realized_prop = amp.realized_prop;
    } catch (const std::exception& e) {
        fail_all(e.what());
        return b;
    }

    // Every strategy sees the same bytes and the same stream root.
    DataMatrix amputed = b.complete;
    for (std::size_t c = 0; c < amputed.cols(); ++c)
        for (std::size_t r = 0; r < amputed.rows(); ++r)
            if (b.mask(r, c)) amputed(r, c) = kMissingPlaceholder;
    ImputerParams params = cfg.imputer;
    params.seed = imputation_seed(cfg, replicate_id);

    for (const auto& s : cfg.strategies) {
        MetricsRecord rec;
        ImputationResult res;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            res = impute(amputed, b.mask, params, s, pool);
            const auto t1 = std::chrono::steady_clock::now();
            rec = measure(b.complete, b.mask, res, cfg.scenario);
            if (cfg.record_timings)
                rec.elapsed_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        } catch (const std::exception& e) {
            rec = MetricsRecord{};
            rec.ok = false;
            rec.error = e.what();
        }
        label(rec, s);
        b.results.push_back(std::move(res));
        b.records.push_back(std::move(rec));
    }
    return b;
}

StudyResult run_study(std::span<const ScenarioConfig> configs, ThreadPool& pool,
                      const ProgressFn& progress) {
    struct Job {
        std::size_t config;
        std::size_t replicate;
    };
    std::vector<Job> jobs;
    for (std::size_t c = 0; c < configs.size(); ++c) {
        configs[c].validate();
        for (std::size_t r = 0; r < configs[c].n_replicates; ++r) jobs.push_back({c, r});
    }

    std::vector<std::vector<MetricsRecord>> slots(jobs.size());
    std::atomic<std::size_t> done{0};
    std::mutex progress_mu;
    pool.parallel_for(jobs.size(), [&](std::size_t i) {
        slots[i] = run_replicate(configs[jobs[i].config], jobs[i].replicate).records;
        const std::size_t d = ++done;
        if (progress) {
            std::lock_guard lock(progress_mu);
            progress(d, jobs.size());
        }
    });

    StudyResult out;
    out.total_replicates = jobs.size();
    for (auto& rows : slots) {
        bool any_failed = false;
        for (auto& r : rows) {
            any_failed = any_failed || !r.ok;
            out.records.push_back(std::move(r));
        }
        if (any_failed) ++out.failed_replicates;
    }
    return out;
}

}  // namespace forestfill
