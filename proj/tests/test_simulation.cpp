#include <doctest.h>

#include <sstream>

#include "forestfill/errors.hpp"
#include "forestfill/metrics.hpp"
#include "forestfill/records.hpp"
#include "forestfill/simulation.hpp"

using namespace forestfill;

namespace {

ScenarioConfig small_config(ScenarioKind s, PatternKind p, std::size_t reps = 2) {
    ScenarioConfig cfg;
    cfg.scenario = s;
    cfg.pattern = p;
    cfg.n_obs = 60;
    cfg.n_replicates = reps;
    cfg.imputer.forest.n_trees = 10;
    cfg.imputer.max_iterations = 5;
    cfg.master_seed = 77;
    return cfg;
}

bool same_metrics(const MetricsRecord& a, const MetricsRecord& b) {
    if (a.ok != b.ok || a.stopped_by != b.stopped_by) return false;
    for (const auto& name : record_metric_names())
        if (record_metric(a, name) != record_metric(b, name)) return false;
    return true;
}

std::string study_csv(const std::vector<ScenarioConfig>& cfgs, std::size_t threads) {
    ThreadPool pool(threads);
    const StudyResult res = run_study(cfgs, pool);
    std::ostringstream out;
    write_records_csv(out, res.records);
    return out.str();
}

}  // namespace

TEST_CASE("generate_scenario") {
    const DataMatrix strong = generate_scenario(ScenarioKind::Strong, 100000, SeedSpec(1));
    const double r = pearson(strong.column(1), strong.column(2));
    CHECK(r >= 0.73);
    CHECK(r <= 0.77);
    CHECK(strong.column_names() == std::vector<std::string>{"Y", "X1", "X2"});

    const DataMatrix unc = generate_scenario(ScenarioKind::Uncorrelated, 100000, SeedSpec(2));
    const std::vector<std::span<const double>> preds{unc.column(1), unc.column(2)};
    const OlsFit fit = ols_with_intercept(unc.column(0), preds);
    CHECK(std::abs(fit.coefficients[0] - 0.0) <= 0.02);
    CHECK(std::abs(fit.coefficients[1] - 1.0) <= 0.02);
    CHECK(std::abs(fit.coefficients[2] - 1.0) <= 0.02);

    CHECK(generate_scenario(ScenarioKind::Weak, 50, SeedSpec(3)) == generate_scenario(ScenarioKind::Weak, 50, SeedSpec(3)));
}

TEST_CASE("scenario and pattern names") {
    for (ScenarioKind k : {ScenarioKind::Uncorrelated, ScenarioKind::Weak, ScenarioKind::Strong})
        CHECK(parse_scenario(to_string(k)) == k);
    for (PatternKind k : {PatternKind::TwoCells, PatternKind::OneCell}) CHECK(parse_pattern(to_string(k)) == k);
    CHECK_THROWS_AS(parse_pattern("three_cells"), ParseError);
    CHECK_THROWS_AS(parse_scenario("medium"), ParseError);
}

TEST_CASE("config validation") {
    ScenarioConfig cfg = small_config(ScenarioKind::Weak, PatternKind::TwoCells);
    cfg.n_obs = 9;
    CHECK_THROWS_AS(cfg.validate(), InvalidInput);
    cfg = small_config(ScenarioKind::Weak, PatternKind::TwoCells);
    cfg.n_replicates = 0;
    CHECK_THROWS_AS(cfg.validate(), InvalidInput);
    cfg = small_config(ScenarioKind::Weak, PatternKind::TwoCells);
    cfg.strategies.clear();
    CHECK_THROWS_AS(cfg.validate(), InvalidInput);
}

TEST_CASE("seed paths do not depend on the strategy or pattern") {
    ScenarioConfig a = small_config(ScenarioKind::Weak, PatternKind::TwoCells);
    ScenarioConfig b = a;
    b.strategies = {ParallelVariables{2}};
    CHECK(imputation_seed(a, 3) == imputation_seed(b, 3));
    CHECK(amputation_seed(a, 3) == amputation_seed(b, 3));
    b.pattern = PatternKind::OneCell;
    CHECK(data_seed(a, 3) == data_seed(b, 3));
    CHECK_FALSE(amputation_seed(a, 3) == amputation_seed(b, 3));
    CHECK_FALSE(data_seed(a, 3) == data_seed(a, 4));
}

TEST_CASE("run_replicate: one chunk matches sequential") {
    ScenarioConfig cfg = small_config(ScenarioKind::Uncorrelated, PatternKind::TwoCells);
    cfg.strategies = {Sequential{}, ParallelForests{1}};
    for (std::size_t rep = 0; rep < 5; ++rep) {
        const ReplicateBundle b = run_replicate(cfg, rep);
        REQUIRE(b.records.size() == 2);
        CHECK(b.records[0].strategy == "sequential");
        CHECK(b.records[1].strategy == "forests");
        CHECK(same_metrics(b.records[0], b.records[1]));
        CHECK(b.results[0].imputed == b.results[1].imputed);
    }
}

TEST_CASE("run_replicate: paired design and non-degenerate output") {
    ScenarioConfig cfg = small_config(ScenarioKind::Strong, PatternKind::OneCell);
    ScenarioConfig only_var = cfg;
    only_var.strategies = {ParallelVariables{3}};
    for (std::size_t rep = 0; rep < 3; ++rep) {
        const ReplicateBundle b = run_replicate(cfg, rep);
        const ReplicateBundle v = run_replicate(only_var, rep);
        CHECK(b.complete == v.complete);
        CHECK(b.mask == v.mask);
        CHECK(same_metrics(b.records[2], v.records[0]));
        REQUIRE(b.records.size() == 3);
        for (const auto& r : b.records) {
            CHECK(r.ok);
            CHECK(r.iterations >= 1);
            CHECK(r.nrmse_true > 0.0);
            CHECK(r.replicate == rep);
            CHECK(r.scenario == "strong");
            CHECK(r.pattern == "one_cell");
            CHECK(r.elapsed_ms == 0.0);
        }
    }
}

TEST_CASE("run_replicate: OneCell replicate with only X1 masked") {
    // Scan for a replicate whose amputation happened to hit only X1.
    ScenarioConfig cfg = small_config(ScenarioKind::Weak, PatternKind::OneCell);
    cfg.n_obs = 10;
    cfg.strategies = {Sequential{}, ParallelVariables{3}};
    std::size_t found = 0;
    for (std::size_t rep = 0; rep < 2000 && found < 3; ++rep) {
        const DataMatrix d = generate_scenario(cfg.scenario, cfg.n_obs, data_seed(cfg, rep));
        const MissingMask m = ampute(d, scenario_patterns(cfg.pattern, cfg.prop), amputation_seed(cfg, rep)).mask;
        if (m.missing_in_column(2) != 0 || m.missing_in_column(1) < 2) continue;
        ++found;
        const ReplicateBundle b = run_replicate(cfg, rep);
        REQUIRE(b.mask == m);
        CHECK(b.records[0].ok);
        CHECK(same_metrics(b.records[0], b.records[1]));
    }
    CHECK(found == 3);
}

TEST_CASE("run_replicate records failures without aborting") {
    // A tiny missing proportion on 10 rows usually leaves nothing masked,
    // which makes the true-value NRMSE undefined.
    ScenarioConfig cfg = small_config(ScenarioKind::Weak, PatternKind::TwoCells, 3);
    cfg.n_obs = 10;
    cfg.prop = 0.001;
    const ReplicateBundle b = run_replicate(cfg, 0);
    REQUIRE(b.records.size() == 3);
    for (const auto& r : b.records) {
        CHECK_FALSE(r.ok);
        CHECK_FALSE(r.error.empty());
    }
    ThreadPool pool(1);
    const std::vector<ScenarioConfig> cfgs{cfg};
    const StudyResult res = run_study(cfgs, pool);
    CHECK(res.records.size() == 9);
    CHECK(res.total_replicates == 3);
    CHECK(res.failed_replicates == 3);
    CHECK(res.failed());
}

TEST_CASE("run_study cardinality, ordering and determinism") {
    std::vector<ScenarioConfig> cfgs;
    for (ScenarioKind s : {ScenarioKind::Uncorrelated, ScenarioKind::Weak, ScenarioKind::Strong})
        for (PatternKind p : {PatternKind::TwoCells, PatternKind::OneCell}) cfgs.push_back(small_config(s, p));

    ThreadPool pool(1);
    std::size_t last_done = 0;
    const StudyResult res = run_study(cfgs, pool, [&](std::size_t done, std::size_t total) {
        CHECK(total == 12);
        last_done = done;
    });
    CHECK(last_done == 12);
    CHECK(res.records.size() == 36);
    CHECK(res.total_replicates == 12);
    CHECK(res.failed_replicates == 0);
    CHECK_FALSE(res.failed());
    // (config, replicate, strategy) order.
    CHECK(res.records[0].scenario == "uncorrelated");
    CHECK(res.records[0].strategy == "sequential");
    CHECK(res.records[2].strategy == "variables");
    CHECK(res.records[3].replicate == 1);
    CHECK(res.records[6].pattern == "one_cell");
    CHECK(res.records[35].scenario == "strong");

    const std::string once = study_csv(cfgs, 1);
    CHECK(once == study_csv(cfgs, 1));
    CHECK(once == study_csv(cfgs, 3));

    std::istringstream in(once);
    const auto back = read_records_csv(in);
    CHECK(back == res.records);
}
