#include "leakaudit/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "leakaudit/seeding.hpp"

namespace leakaudit {

void ForestConfig::validate() const {
    if (n_trees < 1) throw std::invalid_argument("forest: n_trees must be >= 1");
    if (min_leaf < 1) throw std::invalid_argument("forest: min_leaf must be >= 1");
    if (mtry && *mtry < 1) throw std::invalid_argument("forest: mtry must be >= 1");
    if (n_threads < 1) throw std::invalid_argument("forest: n_threads must be >= 1");
}

std::size_t DecisionTree::leaf_index(std::span<const double> x) const {
    std::size_t i = 0;
    while (nodes[i].feature >= 0) {
        const auto& n = nodes[i];
        i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left
                                                                                         : n.right);
    }
    return i;
}

namespace {

struct TrainingView {
    std::vector<double> x;  // row-major, compacted training rows
    std::vector<std::uint8_t> y;
    std::size_t p = 0;

    double at(std::size_t r, std::size_t c) const { return x[r * p + c]; }
};

struct Split {
    std::size_t feature = 0;
    double threshold = 0.0;
    double impurity = 0.0;
};

double gini(double pos, double n) {
    const double q = pos / n;
    return 1.0 - q * q - (1.0 - q) * (1.0 - q);
}

class TreeBuilder {
public:
    TreeBuilder(const TrainingView& data, const ForestConfig& cfg, std::size_t mtry, Rng& rng)
        : data_(data), cfg_(cfg), mtry_(mtry), rng_(rng) {}

    DecisionTree build(std::vector<std::size_t> samples) {
        tree_.nodes.clear();
        grow(std::move(samples), 0);
        return std::move(tree_);
    }

private:
    std::int32_t grow(std::vector<std::size_t> samples, std::size_t depth) {
        const auto id = static_cast<std::int32_t>(tree_.nodes.size());
        tree_.nodes.emplace_back();

        std::size_t pos = 0;
        for (auto s : samples) pos += data_.y[s];
        const std::size_t n = samples.size();
        tree_.nodes[id].value = static_cast<double>(pos) / static_cast<double>(n);

        const bool pure = pos == 0 || pos == n;
        const bool too_small = n < 2 * cfg_.min_leaf;
        const bool too_deep = cfg_.max_depth && depth >= *cfg_.max_depth;
        if (pure || too_small || too_deep) return id;

        const auto split = best_split(samples, pos);
        if (!split) return id;

        std::vector<std::size_t> left, right;
        for (auto s : samples) {
            (data_.at(s, split->feature) <= split->threshold ? left : right).push_back(s);
        }
        samples.clear();
        samples.shrink_to_fit();

        tree_.nodes[id].feature = static_cast<std::int32_t>(split->feature);
        tree_.nodes[id].threshold = split->threshold;
        const auto l = grow(std::move(left), depth + 1);
        const auto r = grow(std::move(right), depth + 1);
        tree_.nodes[id].left = l;
        tree_.nodes[id].right = r;
        return id;
    }

    // Draws features without replacement until mtry non-constant ones have
    // been scanned (or all features are exhausted).
    std::optional<Split> best_split(const std::vector<std::size_t>& samples, std::size_t pos) {
        const std::size_t p = data_.p;
        const std::size_t n = samples.size();
        std::vector<std::size_t> features(p);
        std::iota(features.begin(), features.end(), 0);

        std::optional<Split> best;
        std::vector<std::pair<double, std::uint8_t>> column(n);
        std::size_t scanned = 0;
        for (std::size_t drawn = 0; drawn < p && scanned < mtry_; ++drawn) {
            std::swap(features[drawn], features[drawn + rng_.below(p - drawn)]);
            const std::size_t f = features[drawn];

            for (std::size_t i = 0; i < n; ++i) column[i] = {data_.at(samples[i], f), data_.y[samples[i]]};
            std::sort(column.begin(), column.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            if (column.front().first == column.back().first) continue;
            ++scanned;

            std::size_t left_pos = 0;
            for (std::size_t i = 1; i < n; ++i) {
                left_pos += column[i - 1].second;
                if (column[i - 1].first == column[i].first) continue;
                if (i < cfg_.min_leaf || n - i < cfg_.min_leaf) continue;
                const double nl = static_cast<double>(i), nr = static_cast<double>(n - i);
                const double impurity =
                    (nl * gini(static_cast<double>(left_pos), nl) +
                     nr * gini(static_cast<double>(pos - left_pos), nr)) /
                    static_cast<double>(n);
                if (!best || impurity < best->impurity) {
                    const double lo = column[i - 1].first, hi = column[i].first;
                    double mid = lo + (hi - lo) / 2.0;
                    if (!(mid < hi)) mid = lo;
                    best = Split{f, mid, impurity};
                }
            }
        }
        return best;
    }

    const TrainingView& data_;
    const ForestConfig& cfg_;
    std::size_t mtry_;
    Rng& rng_;
    DecisionTree tree_;
};

}  // namespace

ForestModel train_forest(const Dataset& ds, std::span<const RowIndex> rows, const ForestConfig& cfg) {
    cfg.validate();
    if (rows.empty()) throw std::invalid_argument("train_forest: empty row set");
    if (ds.cols() == 0) throw std::invalid_argument("train_forest: dataset has no columns");
    if (ds.has_missing(rows)) {
        throw std::invalid_argument("train_forest: training rows contain missing cells");
    }

    TrainingView view;
    view.p = ds.cols();
    view.x.reserve(rows.size() * view.p);
    for (RowIndex r : rows) {
        const auto v = ds.row(r);
        view.x.insert(view.x.end(), v.begin(), v.end());
        view.y.push_back(static_cast<std::uint8_t>(ds.label(r)));
    }
    const std::size_t mtry = std::min(
        view.p, cfg.mtry.value_or(std::max<std::size_t>(
                    1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(view.p)))))));

    ForestModel model;
    model.columns = ds.columns();
    model.trees.resize(cfg.n_trees);

    auto grow_tree = [&](std::size_t t) {
        Rng rng(derive_seed(cfg.seed, "forest.tree", t));
        const std::size_t n = rows.size();
        std::vector<std::size_t> samples(n);
        if (cfg.bootstrap) {
            for (auto& s : samples) s = rng.below(n);
        } else {
            std::iota(samples.begin(), samples.end(), 0);
        }
        TreeBuilder builder(view, cfg, mtry, rng);
        model.trees[t] = builder.build(std::move(samples));
    };

    const std::size_t workers = std::min(cfg.n_threads, cfg.n_trees);
    if (workers <= 1) {
        for (std::size_t t = 0; t < cfg.n_trees; ++t) grow_tree(t);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (std::size_t t = w; t < cfg.n_trees; t += workers) grow_tree(t);
            });
        }
        for (auto& th : pool) th.join();
    }
    return model;
}

std::vector<double> predict_proba(const ForestModel& m, const Dataset& ds,
                                  std::span<const RowIndex> rows) {
    if (ds.columns() != m.columns) {
        throw std::invalid_argument("predict_proba: dataset columns do not match the model");
    }
    if (m.trees.empty()) throw std::invalid_argument("predict_proba: model has no trees");
    if (ds.has_missing(rows)) throw std::invalid_argument("predict_proba: rows contain missing cells");
    std::vector<double> scores;
    scores.reserve(rows.size());
    for (RowIndex r : rows) {
        const auto x = ds.row(r);
        double sum = 0.0;
        for (const auto& t : m.trees) sum += t.predict(x);
        scores.push_back(sum / static_cast<double>(m.trees.size()));
    }
    return scores;
}

MajorityBaseline majority_baseline(std::span<const std::uint8_t> labels) {
    if (labels.empty()) throw std::invalid_argument("majority_baseline: no labels");
    std::size_t ones = 0;
    for (auto l : labels) ones += (l == 1);
    const std::size_t zeros = labels.size() - ones;
    MajorityBaseline b;
    b.predicted_class = ones > zeros ? 1 : 0;
    b.accuracy = static_cast<double>(std::max(ones, zeros)) / static_cast<double>(labels.size());
    return b;
}

}  // namespace leakaudit
