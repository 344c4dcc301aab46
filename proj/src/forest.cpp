#include "forestfill/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "forestfill/errors.hpp"

namespace forestfill {

std::size_t ForestParams::resolved_mtry(std::size_t n_predictors) const {
    if (mtry != 0) return mtry;
    const auto m = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n_predictors))));
    return std::max<std::size_t>(1, m);
}

void ForestParams::validate(std::size_t n_predictors) const {
    if (n_trees < 1) throw InvalidInput("n_trees must be >= 1");
    if (min_node_size < 1) throw InvalidInput("min_node_size must be >= 1");
    const std::size_t m = resolved_mtry(n_predictors);
    if (m < 1 || m > n_predictors)
        throw InvalidInput("mtry must lie in [1, " + std::to_string(n_predictors) + "]");
}

std::size_t Tree::leaf_count() const {
    return static_cast<std::size_t>(
        std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

namespace {

struct Split {
    std::int32_t feature = -1;
    double threshold = 0.0;
    double score = 0.0;
};

struct PendingNode {
    std::uint32_t id;
    std::size_t begin;
    std::size_t end;
    std::size_t depth;
};

}  // namespace

Tree fit_tree(const FeatureMatrix& X, std::span<const double> y,
              std::span<const std::size_t> sample, const ForestParams& params,
              const SeedSpec& seed) {
    if (sample.empty()) throw InvalidInput("fit_tree: empty sample");
    if (X.cols() == 0) throw InvalidInput("fit_tree: no predictors");
    if (y.size() != X.rows()) throw ShapeError("fit_tree: response length does not match X");
    const std::size_t q = X.cols();
    params.validate(q);
    const std::size_t mtry = params.resolved_mtry(q);
    const std::size_t min_split = 2 * params.min_node_size;

    Rng rng(seed);
    Tree tree;
    std::vector<std::size_t> rows(sample.begin(), sample.end());
    std::vector<std::size_t> features(q);
    std::vector<std::pair<double, double>> xy;
    xy.reserve(rows.size());

    tree.nodes_.emplace_back();
    std::vector<PendingNode> stack{{0, 0, rows.size(), 0}};

    while (!stack.empty()) {
        const PendingNode node = stack.back();
        stack.pop_back();
        const std::size_t count = node.end - node.begin;

        double sum = 0.0;
        for (std::size_t i = node.begin; i < node.end; ++i) sum += y[rows[i]];
        const double node_mean = sum / static_cast<double>(count);
        double sse = 0.0;
        for (std::size_t i = node.begin; i < node.end; ++i) {
            const double d = y[rows[i]] - node_mean;
            sse += d * d;
        }

        auto make_leaf = [&] {
            TreeNode& n = tree.nodes_[node.id];
            n.feature = -1;
            n.prediction = node_mean;
            n.n_samples = static_cast<std::uint32_t>(count);
        };

        const bool depth_capped = params.max_depth && node.depth >= *params.max_depth;
        if (count < min_split || sse / static_cast<double>(count) <= 1e-12 || depth_capped) {
            make_leaf();
            continue;
        }

        // Partial Fisher-Yates: the first mtry slots hold the candidates.
        std::iota(features.begin(), features.end(), std::size_t{0});
        for (std::size_t k = 0; k < mtry; ++k) std::swap(features[k], features[k + rng.index(q - k)]);
        std::sort(features.begin(), features.begin() + static_cast<std::ptrdiff_t>(mtry));

        const double parent_term = sum * sum / static_cast<double>(count);
        Split best;
        for (std::size_t k = 0; k < mtry; ++k) {
            const std::size_t f = features[k];
            xy.clear();
            for (std::size_t i = node.begin; i < node.end; ++i) xy.emplace_back(X(rows[i], f), y[rows[i]]);
            std::sort(xy.begin(), xy.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            double left_sum = 0.0;
            for (std::size_t i = 0; i + 1 < count; ++i) {
                left_sum += xy[i].second;
                if (xy[i].first == xy[i + 1].first) continue;
                const auto nl = static_cast<double>(i + 1);
                const auto nr = static_cast<double>(count - i - 1);
                const double right_sum = sum - left_sum;
                // Parent SSE minus child SSEs.
                const double score = left_sum * left_sum / nl + right_sum * right_sum / nr - parent_term;
                if (score > best.score) {
                    double t = xy[i].first + 0.5 * (xy[i + 1].first - xy[i].first);
                    if (!(t < xy[i + 1].first)) t = xy[i].first;
                    best = {static_cast<std::int32_t>(f), t, score};
                }
            }
        }

        // Scores within rounding of zero do not reduce SSE.
        if (best.feature < 0 || best.score <= 1e-12 * sse) {
            make_leaf();
            continue;
        }

        const auto f = static_cast<std::size_t>(best.feature);
        const auto mid_it = std::partition(
            rows.begin() + static_cast<std::ptrdiff_t>(node.begin),
            rows.begin() + static_cast<std::ptrdiff_t>(node.end),
            [&](std::size_t r) { return X(r, f) <= best.threshold; });
        const auto mid = static_cast<std::size_t>(mid_it - rows.begin());

        const auto left_id = static_cast<std::uint32_t>(tree.nodes_.size());
        tree.nodes_.emplace_back();
        tree.nodes_.emplace_back();
        TreeNode& n = tree.nodes_[node.id];
        n.feature = best.feature;
        n.threshold = best.threshold;
        n.left = left_id;
        n.right = left_id + 1;
        n.prediction = node_mean;
        n.n_samples = static_cast<std::uint32_t>(count);
        // Right pushed first so the left subtree is grown first.
        stack.push_back({left_id + 1, mid, node.end, node.depth + 1});
        stack.push_back({left_id, node.begin, mid, node.depth + 1});
    }
    return tree;
}

std::optional<double> Forest::oob_prediction(std::size_t row) const {
    if (n_trees_oob.at(row) == 0) return std::nullopt;
    return oob_sum[row] / static_cast<double>(n_trees_oob[row]);
}

Forest fit_forest(const FeatureMatrix& X, std::span<const double> y, const ForestParams& params) {
    const std::size_t n = X.rows();
    if (n == 0) throw InvalidInput("fit_forest: no training rows");
    if (y.size() != n) throw ShapeError("fit_forest: response length does not match X");
    params.validate(X.cols());

    Forest forest;
    forest.n_features = X.cols();
    forest.trees.reserve(params.n_trees);
    forest.oob_sum.assign(n, 0.0);
    forest.n_trees_oob.assign(n, 0);
    for (std::size_t t = 0; t < params.n_trees; ++t) {
        const SeedSpec tree_seed = params.seed.child(t);
        const BootstrapSample bag = bootstrap_indices(n, tree_seed.child(0));
        Tree tree = fit_tree(X, y, bag.indices, params, tree_seed.child(1));
        for (std::size_t r : bag.oob) {
            forest.oob_sum[r] += tree.predict(X, r);
            ++forest.n_trees_oob[r];
        }
        forest.trees.push_back(std::move(tree));
    }
    return forest;
}

std::vector<double> predict(const Forest& forest, const FeatureMatrix& X) {
    if (X.cols() != forest.n_features)
        throw ShapeError("predict: forest expects " + std::to_string(forest.n_features) +
                         " features, got " + std::to_string(X.cols()));
    if (forest.trees.empty()) throw InvalidInput("predict: forest has no trees");
    std::vector<double> out(X.rows(), 0.0);
    for (const Tree& t : forest.trees)
        for (std::size_t r = 0; r < X.rows(); ++r) out[r] += t.predict(X, r);
    const auto k = static_cast<double>(forest.trees.size());
    for (double& v : out) v /= k;
    return out;
}

Forest merge_forests(std::span<const Forest> parts) {
    if (parts.empty()) throw InvalidInput("merge_forests: no parts");
    Forest merged = parts.front();
    for (std::size_t i = 1; i < parts.size(); ++i) {
        const Forest& p = parts[i];
        if (p.n_features != merged.n_features || p.training_rows() != merged.training_rows())
            throw ShapeError("merge_forests: parts were trained on different shapes");
        merged.trees.insert(merged.trees.end(), p.trees.begin(), p.trees.end());
        for (std::size_t r = 0; r < merged.training_rows(); ++r) {
            merged.oob_sum[r] += p.oob_sum[r];
            merged.n_trees_oob[r] += p.n_trees_oob[r];
        }
    }
    return merged;
}

namespace {

struct OobMoments {
    double mse = 0.0;
    double var = 0.0;
};

OobMoments oob_moments(const Forest& forest, std::span<const double> y_true) {
    if (y_true.size() != forest.training_rows())
        throw ShapeError("oob: response length does not match forest training rows");
    std::vector<double> ys;
    double se = 0.0;
    for (std::size_t r = 0; r < y_true.size(); ++r) {
        const auto pred = forest.oob_prediction(r);
        if (!pred) continue;
        se += (y_true[r] - *pred) * (y_true[r] - *pred);
        ys.push_back(y_true[r]);
    }
    if (ys.empty()) throw OobUnavailable("no row has an out-of-bag prediction");
    OobMoments m;
    m.mse = se / static_cast<double>(ys.size());
    m.var = ys.size() > 1 ? sample_variance(ys) : 0.0;
    return m;
}

}  // namespace

double oob_mse(const Forest& forest, std::span<const double> y_true) {
    return oob_moments(forest, y_true).mse;
}

double oob_nrmse(const Forest& forest, std::span<const double> y_true) {
    const OobMoments m = oob_moments(forest, y_true);
    if (!(m.var > 0.0)) throw OobUnavailable("out-of-bag responses have zero variance");
    return std::sqrt(m.mse / m.var);
}

}  // namespace forestfill
