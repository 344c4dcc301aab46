#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "forestfill/stochastic.hpp"

namespace forestfill {

/// Column-major n x q predictor block. Owns its storage.
class FeatureMatrix {
public:
    FeatureMatrix() = default;
    FeatureMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), v_(rows * cols) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    double operator()(std::size_t r, std::size_t c) const { return v_[c * rows_ + r]; }
    double& operator()(std::size_t r, std::size_t c) { return v_[c * rows_ + r]; }
    std::span<const double> column(std::size_t c) const { return {v_.data() + c * rows_, rows_}; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> v_;
};

struct ForestParams {
    std::size_t n_trees = 100;
    std::size_t mtry = 0;  // 0 selects floor(sqrt(q)), at least 1
    std::size_t min_node_size = 5;
    std::optional<std::size_t> max_depth;
    SeedSpec seed;

    std::size_t resolved_mtry(std::size_t n_predictors) const;
    void validate(std::size_t n_predictors) const;
};

/// Node of a regression tree, stored in a flat array. A node with
/// feature < 0 is a leaf; otherwise rows with x[feature] <= threshold go left.
struct TreeNode {
    std::int32_t feature = -1;
    double threshold = 0.0;
    std::uint32_t left = 0;
    std::uint32_t right = 0;
    double prediction = 0.0;  // mean training response in the node
    std::uint32_t n_samples = 0;

    bool is_leaf() const noexcept { return feature < 0; }
    bool operator==(const TreeNode&) const = default;
};

class Tree {
public:
    const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
    const TreeNode& root() const { return nodes_.front(); }
    std::size_t leaf_count() const;

    double predict(const FeatureMatrix& X, std::size_t row) const {
        std::uint32_t i = 0;
        while (!nodes_[i].is_leaf()) {
            const TreeNode& n = nodes_[i];
            i = X(row, static_cast<std::size_t>(n.feature)) <= n.threshold ? n.left : n.right;
        }
        return nodes_[i].prediction;
    }

    bool operator==(const Tree&) const = default;

private:
    friend Tree fit_tree(const FeatureMatrix&, std::span<const double>,
                         std::span<const std::size_t>, const ForestParams&, const SeedSpec&);
    std::vector<TreeNode> nodes_;
};

/// Grows one CART regression tree on the rows listed in `sample`
/// (duplicates allowed). At every node mtry features are drawn without
/// replacement and every midpoint between adjacent distinct values is
/// scored by SSE reduction.
Tree fit_tree(const FeatureMatrix& X, std::span<const double> y,
              std::span<const std::size_t> sample, const ForestParams& params,
              const SeedSpec& seed);

/// Bagged ensemble plus out-of-bag accumulators, one slot per training row.
struct Forest {
    std::vector<Tree> trees;
    std::vector<double> oob_sum;
    std::vector<std::uint32_t> n_trees_oob;
    std::size_t n_features = 0;

    std::size_t training_rows() const noexcept { return oob_sum.size(); }
    std::optional<double> oob_prediction(std::size_t row) const;
};

/// Tree t is grown under params.seed.child(t).
Forest fit_forest(const FeatureMatrix& X, std::span<const double> y, const ForestParams& params);

std::vector<double> predict(const Forest& forest, const FeatureMatrix& X);

/// Concatenates trees in input order and pools the out-of-bag sums.
Forest merge_forests(std::span<const Forest> parts);

/// Normalized RMSE of the out-of-bag predictions over rows that have at
/// least one out-of-bag tree.
double oob_nrmse(const Forest& forest, std::span<const double> y_true);
/// Out-of-bag mean squared error over the same rows.
double oob_mse(const Forest& forest, std::span<const double> y_true);

}  // namespace forestfill
