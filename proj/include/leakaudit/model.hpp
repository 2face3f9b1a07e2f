#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "leakaudit/tabular.hpp"

namespace leakaudit {

struct ForestConfig {
    std::size_t n_trees = 100;
    std::optional<std::size_t> max_depth;  // unlimited when empty
    std::size_t min_leaf = 1;
    std::optional<std::size_t> mtry;       // floor(sqrt(p)) when empty
    bool bootstrap = true;
    std::uint64_t seed = 0;
    std::size_t n_threads = 1;             // results do not depend on this

    void validate() const;
};

// Axis-aligned binary tree in flat storage. A row goes left when
// x[feature] <= threshold. Leaves store the positive-class fraction of the
// training rows that reached them.
struct DecisionTree {
    struct Node {
        std::int32_t feature = -1;  // -1 marks a leaf
        double threshold = 0.0;
        std::int32_t left = -1;
        std::int32_t right = -1;
        double value = 0.0;
    };
    std::vector<Node> nodes;

    // Index of the leaf a row lands in.
    std::size_t leaf_index(std::span<const double> x) const;
    double predict(std::span<const double> x) const { return nodes[leaf_index(x)].value; }
};

struct ForestModel {
    std::vector<DecisionTree> trees;
    std::vector<Column> columns;
};

// Random forest of Gini-split trees. Tree t is grown from its own stream,
// derive_seed(cfg.seed, "forest.tree", t), so the model is independent of
// training order and thread count. Throws on missing cells among `rows`.
ForestModel train_forest(const Dataset& ds, std::span<const RowIndex> rows, const ForestConfig& cfg);

// Mean leaf fraction over trees, one score per row in `rows`.
std::vector<double> predict_proba(const ForestModel& m, const Dataset& ds,
                                  std::span<const RowIndex> rows);

struct MajorityBaseline {
    int predicted_class = 0;
    double accuracy = 0.0;
};

// Always-predict-the-mode classifier (ties to 0) and its accuracy on `labels`.
MajorityBaseline majority_baseline(std::span<const std::uint8_t> labels);

}  // namespace leakaudit
