#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "forestfill/amputation.hpp"
#include "forestfill/imputer.hpp"
#include "forestfill/records.hpp"
#include "forestfill/scenario.hpp"
#include "forestfill/thread_pool.hpp"

namespace forestfill {

std::string to_string(PatternKind kind);
PatternKind parse_pattern(const std::string& name);

/// One simulation cell: a scenario x pattern pair run under several
/// strategies for n_replicates replicates.
struct ScenarioConfig {
    ScenarioKind scenario = ScenarioKind::Uncorrelated;
    PatternKind pattern = PatternKind::TwoCells;
    std::size_t n_obs = 200;
    std::size_t n_replicates = 500;
    std::vector<ImputationStrategy> strategies{Sequential{}, ParallelForests{3}, ParallelVariables{3}};
    ImputerParams imputer;  // imputer.seed is ignored; streams come from master_seed
    std::uint64_t master_seed = 20200101;
    double prop = 0.5;
    bool record_timings = false;  // elapsed_ms stays 0 unless set, keeping output byte-stable

    void validate() const;
};

/// Columns (Y, X1, X2).
DataMatrix generate_scenario(ScenarioKind kind, std::size_t n, const SeedSpec& seed);

/// Stream roots for one replicate. The complete data depends only on
/// (scenario, replicate) so both missingness patterns share it; none of
/// them depends on the strategy.
SeedSpec data_seed(const ScenarioConfig& cfg, std::size_t replicate);
SeedSpec amputation_seed(const ScenarioConfig& cfg, std::size_t replicate);
SeedSpec imputation_seed(const ScenarioConfig& cfg, std::size_t replicate);

struct ReplicateBundle {
    DataMatrix complete;
    MissingMask mask;
    double realized_prop = 0.0;
    std::vector<ImputationResult> results;  // parallel to cfg.strategies; empty on early failure
    std::vector<MetricsRecord> records;     // always one per strategy
};

/// Metrics of one imputed matrix against its complete data.
MetricsRecord measure(const DataMatrix& complete, const MissingMask& mask,
                      const ImputationResult& result, ScenarioKind scenario);

ReplicateBundle run_replicate(const ScenarioConfig& cfg, std::size_t replicate_id,
                              ThreadPool* pool = nullptr);

struct StudyResult {
    std::vector<MetricsRecord> records;  // (config, replicate, strategy) order
    std::size_t total_replicates = 0;
    std::size_t failed_replicates = 0;

    /// More than 1% of replicates had at least one failed row.
    bool failed() const { return failed_replicates * 100 > total_replicates; }
};

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

StudyResult run_study(std::span<const ScenarioConfig> configs, ThreadPool& pool,
                      const ProgressFn& progress = {});

}  // namespace forestfill
