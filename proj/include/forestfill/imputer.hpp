#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "forestfill/dataset.hpp"
#include "forestfill/forest.hpp"
#include "forestfill/thread_pool.hpp"

namespace forestfill {

/// Visit variables one at a time; each sees the latest imputed values.
struct Sequential {
    bool operator==(const Sequential&) const = default;
};

/// Same data flow as Sequential, but every forest is grown as `chunks`
/// sub-ensembles that are merged before prediction.
struct ParallelForests {
    std::size_t chunks = 3;
    bool operator==(const ParallelForests&) const = default;
};

/// All variables of a cycle are imputed from a snapshot taken at the start
/// of the cycle; predictions are written back only after every variable is
/// done.
struct ParallelVariables {
    std::size_t workers = 3;
    bool operator==(const ParallelVariables&) const = default;
};

using ImputationStrategy = std::variant<Sequential, ParallelForests, ParallelVariables>;

/// "sequential", "forests" or "variables".
std::string strategy_name(const ImputationStrategy& s);
void validate(const ImputationStrategy& s);

struct ImputerParams {
    ForestParams forest;
    std::size_t max_iterations = 10;
    /// Stream root; forests are grown under seed.child({iteration, column, chunk}).
    SeedSpec seed;
};

enum class StopReason { DifferenceIncreased, MaxIterations };

std::string to_string(StopReason r);

struct ImputationResult {
    DataMatrix imputed;
    std::size_t iterations_performed = 0;
    StopReason stopped_by = StopReason::DifferenceIncreased;
    std::vector<double> diff_trace;
    /// sqrt of the mean over imputed columns of OOB MSE / var(observed),
    /// taken from the cycle whose matrix is returned. 0 when nothing was
    /// imputed.
    double oob_nrmse_final = 0.0;
};

/// Sum of squared changes over the listed columns divided by the sum of
/// squares of `next` over the same columns.
double iteration_diff(const DataMatrix& next, const DataMatrix& prev,
                      std::span<const std::size_t> columns);

/// Contiguous chunk lengths, larger first. Zero-length chunks are kept so
/// that chunk indices stay positional; callers skip them.
std::vector<std::size_t> chunk_sizes(std::size_t n_trees, std::size_t chunks);

/// Runs the iterative random-forest imputation. `pool` only supplies
/// physical threads; results are identical for any pool size.
ImputationResult impute(const DataMatrix& data, const MissingMask& mask,
                        const ImputerParams& params, const ImputationStrategy& strategy,
                        ThreadPool* pool = nullptr);

}  // namespace forestfill
