#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "forestfill/records.hpp"
#include "forestfill/simulation.hpp"

namespace forestfill {

// ---- study configuration --------------------------------------------------

/// Parsed study config file. Format: one `key = value` per line, `#`
/// starts a comment, list values are comma-separated.
///
///   scenarios      uncorrelated, weak, strong       (default: all three)
///   patterns       two_cells, one_cell              (default: both)
///   strategies     sequential, forests, variables   (default: all three)
///   n_obs          rows per dataset                 (200)
///   n_replicates   replicates per cell              (500)
///   trees          trees per forest                 (100)
///   max_iterations imputation cycles cap            (10)
///   chunks         forests strategy chunk count     (3)
///   workers        variables strategy worker count  (3)
///   mtry           features per split, 0 = floor(sqrt(q))  (0)
///   min_node_size  minimum node size                (5)
///   max_depth      0 = unlimited                    (0)
///   prop           missing-row proportion           (0.5)
///   seed           master seed                      (20200101)
///   threads        physical threads, 0 = all cores  (0)
///   record_timings fill elapsed_ms (true/false)     (false)
struct StudyConfig {
    std::vector<ScenarioKind> scenarios{ScenarioKind::Uncorrelated, ScenarioKind::Weak, ScenarioKind::Strong};
    std::vector<PatternKind> patterns{PatternKind::TwoCells, PatternKind::OneCell};
    std::vector<std::string> strategies{"sequential", "forests", "variables"};
    std::size_t n_obs = 200;
    std::size_t n_replicates = 500;
    std::size_t trees = 100;
    std::size_t max_iterations = 10;
    std::size_t chunks = 3;
    std::size_t workers = 3;
    std::size_t mtry = 0;
    std::size_t min_node_size = 5;
    std::size_t max_depth = 0;
    double prop = 0.5;
    std::uint64_t seed = 20200101;
    std::size_t threads = 0;
    bool record_timings = false;
};

StudyConfig parse_study_config(std::istream& in);
StudyConfig load_study_config(const std::string& path);

ImputationStrategy make_strategy(const std::string& name, std::size_t chunks, std::size_t workers);

/// One ScenarioConfig per (scenario, pattern), scenarios outermost.
std::vector<ScenarioConfig> expand(const StudyConfig& cfg);

// ---- summaries ------------------------------------------------------------

/// Value at sorted index floor(q * (n - 1)); for q = 0.5 this is the lower
/// median.
double lower_quantile(std::vector<double> values, double q);

struct Quantiles {
    double p25 = 0.0;
    double median = 0.0;
    double p75 = 0.0;
};

struct SummaryRow {
    std::string scenario;
    std::string pattern;
    std::string strategy;
    std::size_t n_rows = 0;
    std::size_t n_failed = 0;
    double frac_stopped_at_max = 0.0;
    std::vector<Quantiles> metrics;                // parallel to record_metric_names()
    std::vector<std::size_t> iteration_histogram;  // counts for 1..max_iteration
};

struct SummaryTable {
    std::vector<SummaryRow> rows;  // groups in first-appearance order
    std::size_t max_iteration = 1;

    const SummaryRow* find(const std::string& scenario, const std::string& pattern,
                           const std::string& strategy) const;
};

/// Quantiles are over successful rows of each group.
SummaryTable summarize(const std::vector<MetricsRecord>& records);
void write_summary_csv(std::ostream& out, const SummaryTable& table);

// ---- command line -----------------------------------------------------------

/// Exit codes shared by all subcommands.
enum ExitCode : int {
    kExitOk = 0,
    kExitFailure = 1,
    kExitParse = 2,
    kExitIo = 3,
    kExitData = 4,
};

/// Entry point of the `forestfill` tool (subcommands simulate, impute,
/// ampute, summarize). Flags may also be given as FORESTFILL_<FLAG>
/// environment variables.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Sibling summary path: "results.csv" -> "results.summary.csv".
std::string summary_path_for(const std::string& results_path);

}  // namespace forestfill
