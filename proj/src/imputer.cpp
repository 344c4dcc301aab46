#include "forestfill/imputer.hpp"

#include <cmath>
#include <optional>

#include "forestfill/errors.hpp"

namespace forestfill {

std::string strategy_name(const ImputationStrategy& s) {
    switch (s.index()) {
        case 0: return "sequential";
        case 1: return "forests";
        default: return "variables";
    }
}

void validate(const ImputationStrategy& s) {
    if (const auto* f = std::get_if<ParallelForests>(&s); f && f->chunks < 1)
        throw InvalidInput("ParallelForests needs chunks >= 1");
    if (const auto* v = std::get_if<ParallelVariables>(&s); v && v->workers < 1)
        throw InvalidInput("ParallelVariables needs workers >= 1");
}

std::string to_string(StopReason r) {
    return r == StopReason::MaxIterations ? "max_iterations" : "difference_increased";
}

double iteration_diff(const DataMatrix& next, const DataMatrix& prev,
                      std::span<const std::size_t> columns) {
    if (next.rows() != prev.rows() || next.cols() != prev.cols())
        throw ShapeError("iteration_diff: matrices differ in shape");
    double num = 0.0;
    double den = 0.0;
    for (std::size_t c : columns) {
        if (c >= next.cols()) throw ShapeError("iteration_diff: column out of range");
        const auto a = next.column(c);
        const auto b = prev.column(c);
        for (std::size_t r = 0; r < a.size(); ++r) {
            num += (a[r] - b[r]) * (a[r] - b[r]);
            den += a[r] * a[r];
        }
    }
    if (!(den > 0.0)) throw DegenerateDiff("iteration_diff: imputed columns are all zero");
    return num / den;
}

std::vector<std::size_t> chunk_sizes(std::size_t n_trees, std::size_t chunks) {
    if (chunks < 1) throw InvalidInput("chunk_sizes: chunks must be >= 1");
    std::vector<std::size_t> sizes(chunks, n_trees / chunks);
    for (std::size_t i = 0; i < n_trees % chunks; ++i) ++sizes[i];
    return sizes;
}

namespace {

struct ColumnImputation {
    std::size_t col = 0;
    std::vector<double> predictions;  // one per masked row, in row order
    double oob_ratio = 0.0;           // OOB MSE / var(observed response)
    bool oob_valid = false;
};

// Fits the forest for `target` against `source` and predicts its masked rows.
ColumnImputation impute_column(const DataMatrix& source, const MissingMask& mask,
                               std::size_t target, std::size_t iteration,
                               const ImputerParams& params, std::size_t chunks, ThreadPool* pool) {
    const std::size_t n = source.rows();
    const std::size_t p = source.cols();
    std::vector<std::size_t> obs_rows, mis_rows;
    for (std::size_t r = 0; r < n; ++r) (mask(r, target) ? mis_rows : obs_rows).push_back(r);

    FeatureMatrix X_obs(obs_rows.size(), p - 1);
    FeatureMatrix X_mis(mis_rows.size(), p - 1);
    std::vector<double> y(obs_rows.size());
    for (std::size_t i = 0; i < obs_rows.size(); ++i) y[i] = source(obs_rows[i], target);
    for (std::size_t c = 0, j = 0; c < p; ++c) {
        if (c == target) continue;
        for (std::size_t i = 0; i < obs_rows.size(); ++i) X_obs(i, j) = source(obs_rows[i], c);
        for (std::size_t i = 0; i < mis_rows.size(); ++i) X_mis(i, j) = source(mis_rows[i], c);
        ++j;
    }

    const SeedSpec column_seed = params.seed.child({iteration, target});
    const auto sizes = chunk_sizes(params.forest.n_trees, chunks);
    std::vector<std::size_t> live;
    for (std::size_t k = 0; k < sizes.size(); ++k)
        if (sizes[k] > 0) live.push_back(k);

    std::vector<Forest> parts(live.size());
    auto grow = [&](std::size_t i) {
        ForestParams fp = params.forest;
        fp.n_trees = sizes[live[i]];
        fp.seed = column_seed.child(live[i]);
        parts[i] = fit_forest(X_obs, y, fp);
    };
    if (pool && live.size() > 1)
        pool->parallel_for(live.size(), grow);
    else
        for (std::size_t i = 0; i < live.size(); ++i) grow(i);
    const Forest forest = parts.size() == 1 ? std::move(parts.front()) : merge_forests(parts);

    ColumnImputation out;
    out.col = target;
    out.predictions = predict(forest, X_mis);
    try {
        const double mse = oob_mse(forest, y);
        const double var = y.size() > 1 ? sample_variance(y) : 0.0;
        if (var > 0.0) {
            out.oob_ratio = mse / var;
            out.oob_valid = true;
        }
    } catch (const OobUnavailable&) {
    }
    return out;
}

void write_back(DataMatrix& m, const MissingMask& mask, const ColumnImputation& ci) {
    std::size_t k = 0;
    for (std::size_t r = 0; r < m.rows(); ++r)
        if (mask(r, ci.col)) m(r, ci.col) = ci.predictions[k++];
}

double pooled_oob(const std::vector<ColumnImputation>& cols) {
    double sum = 0.0;
    std::size_t k = 0;
    for (const auto& c : cols)
        if (c.oob_valid) {
            sum += c.oob_ratio;
            ++k;
        }
    return k ? std::sqrt(sum / static_cast<double>(k)) : std::nan("");
}

}  // namespace

ImputationResult impute(const DataMatrix& data, const MissingMask& mask,
                        const ImputerParams& params, const ImputationStrategy& strategy,
                        ThreadPool* pool) {
    check_same_shape(data, mask);
    validate(strategy);
    if (params.max_iterations < 1) throw InvalidInput("max_iterations must be >= 1");

    ImputationResult result;
    const std::vector<std::size_t> order = imputation_order(mask);
    if (order.empty()) {
        result.imputed = data;
        return result;
    }
    if (data.cols() < 2) throw InvalidInput("imputation needs at least two columns");
    params.forest.validate(data.cols() - 1);

    DataMatrix working = initialize_missing(data, mask);
    const bool by_variables = std::holds_alternative<ParallelVariables>(strategy);
    const std::size_t chunks =
        std::holds_alternative<ParallelForests>(strategy) ? std::get<ParallelForests>(strategy).chunks : 1;

    double prev_oob = 0.0;
    for (std::size_t it = 0; it < params.max_iterations; ++it) {
        DataMatrix previous = working;
        std::vector<ColumnImputation> done(order.size());

        if (by_variables) {
            const DataMatrix& snapshot = previous;
            auto task = [&](std::size_t i) {
                done[i] = impute_column(snapshot, mask, order[i], it, params, 1, nullptr);
            };
            if (pool)
                pool->parallel_for(order.size(), task);
            else
                for (std::size_t i = 0; i < order.size(); ++i) task(i);
            for (const auto& ci : done) write_back(working, mask, ci);
        } else {
            for (std::size_t i = 0; i < order.size(); ++i) {
                done[i] = impute_column(working, mask, order[i], it, params, chunks, pool);
                write_back(working, mask, done[i]);
            }
        }

        double diff = 0.0;
        try {
            diff = iteration_diff(working, previous, order);
        } catch (const DegenerateDiff& e) {
            throw ImputationFailure(e.what());
        }
        const double oob = pooled_oob(done);
        result.diff_trace.push_back(diff);
        result.iterations_performed = it + 1;

        if (it > 0 && diff > result.diff_trace[it - 1]) {
            result.imputed = std::move(previous);
            result.stopped_by = StopReason::DifferenceIncreased;
            result.oob_nrmse_final = prev_oob;
            return result;
        }
        prev_oob = oob;
    }
    result.imputed = std::move(working);
    result.stopped_by = StopReason::MaxIterations;
    result.oob_nrmse_final = prev_oob;
    return result;
}

}  // namespace forestfill
