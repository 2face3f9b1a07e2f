#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "leakaudit/tabular.hpp"

namespace leakaudit {

// k disjoint test folds covering every row. Train rows of fold f are the
// complement of folds[f].
struct FoldPlan {
    std::size_t k = 0;
    std::uint64_t seed = 0;
    std::vector<RowSet> folds;
    std::vector<std::string> warnings;

    RowSet train_rows(std::size_t fold) const;
};

// Shuffles each class with the seed and deals it round-robin over the folds;
// the negative class continues where the positive class stopped, so fold
// sizes also differ by at most one. Throws when k < 2, k > n, or a class is
// empty; records a warning when k exceeds the minority count.
FoldPlan stratified_kfold(std::span<const std::uint8_t> labels, std::size_t k, std::uint64_t seed);

// Stratified single split; the test side takes round(test_fraction * count)
// rows of each class. Returns {train, test}.
std::array<RowSet, 2> stratified_holdout(std::span<const std::uint8_t> labels,
                                         double test_fraction, std::uint64_t seed);

// Thrown by auroc when one class is absent.
struct UndefinedAuroc : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Area under the ROC curve as the Mann-Whitney statistic (ties count one
// half), computed from mid-ranks.
double auroc(std::span<const double> scores, std::span<const std::uint8_t> labels);

struct Confusion {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

    std::size_t total() const noexcept { return tp + fp + tn + fn; }
    bool operator==(const Confusion&) const = default;
};

// A row is predicted positive iff score >= threshold.
Confusion confusion_matrix(std::span<const double> scores, std::span<const std::uint8_t> labels,
                           double threshold = 0.5);

// Whether an evaluation set holds rows that cannot come from the original
// cohort: synthetic provenance, or more rows of a class than the cohort has.
struct ContaminationReport {
    std::size_t synthetic_rows_in_eval = 0;
    std::array<std::size_t, 2> eval_class_counts{0, 0};
    std::array<std::size_t, 2> original_class_counts{0, 0};
    bool flagged = false;
};

ContaminationReport contamination_check(std::span<const Provenance> provenance,
                                        std::span<const std::uint8_t> labels,
                                        std::array<std::size_t, 2> original_class_counts);

enum class StdKind { Sample, Population };

struct Summary {
    double mean = 0.0;
    double std = 0.0;
};

// Mean and standard deviation (n - 1 denominator by default; 0 for a single
// value). Throws on empty input.
Summary summarize(std::span<const double> values, StdKind kind = StdKind::Sample);

}  // namespace leakaudit
