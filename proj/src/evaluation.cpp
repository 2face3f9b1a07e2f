#include "leakaudit/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "leakaudit/seeding.hpp"

namespace leakaudit {

RowSet FoldPlan::train_rows(std::size_t fold) const {
    RowSet out;
    for (std::size_t f = 0; f < folds.size(); ++f) {
        if (f == fold) continue;
        out.insert(out.end(), folds[f].begin(), folds[f].end());
    }
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

std::array<RowSet, 2> shuffled_classes(std::span<const std::uint8_t> labels, Rng& rng) {
    std::array<RowSet, 2> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] > 1) throw std::invalid_argument("labels must be 0 or 1");
        by_class[labels[i]].push_back(i);
    }
    for (auto& rows : by_class) {
        for (std::size_t i = rows.size(); i > 1; --i) std::swap(rows[i - 1], rows[rng.below(i)]);
    }
    return by_class;
}

}  // namespace

FoldPlan stratified_kfold(std::span<const std::uint8_t> labels, std::size_t k, std::uint64_t seed) {
    if (k < 2) throw std::invalid_argument("stratified_kfold: k must be >= 2");
    if (k > labels.size()) {
        throw std::invalid_argument("stratified_kfold: k=" + std::to_string(k) + " exceeds n=" +
                                    std::to_string(labels.size()));
    }
    Rng rng(derive_seed(seed, "kfold"));
    const auto by_class = shuffled_classes(labels, rng);
    if (by_class[0].empty() || by_class[1].empty()) {
        throw std::invalid_argument("stratified_kfold: both classes must be present");
    }

    FoldPlan plan;
    plan.k = k;
    plan.seed = seed;
    plan.folds.resize(k);
    const std::size_t minority = std::min(by_class[0].size(), by_class[1].size());
    if (k > minority) {
        plan.warnings.push_back("k=" + std::to_string(k) + " exceeds the minority class count " +
                                std::to_string(minority) + "; some folds lack that class");
    }
    std::size_t slot = 0;
    for (int cls : {1, 0}) {
        for (RowIndex r : by_class[static_cast<std::size_t>(cls)]) {
            plan.folds[slot].push_back(r);
            slot = (slot + 1) % k;
        }
    }
    for (auto& f : plan.folds) std::sort(f.begin(), f.end());
    return plan;
}

std::array<RowSet, 2> stratified_holdout(std::span<const std::uint8_t> labels,
                                         double test_fraction, std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
        throw std::invalid_argument("stratified_holdout: test fraction must be in (0, 1)");
    }
    Rng rng(derive_seed(seed, "holdout"));
    const auto by_class = shuffled_classes(labels, rng);
    std::array<RowSet, 2> out;
    for (const auto& rows : by_class) {
        const auto n_test = static_cast<std::size_t>(
            std::llround(test_fraction * static_cast<double>(rows.size())));
        for (std::size_t i = 0; i < rows.size(); ++i) out[i < n_test ? 1 : 0].push_back(rows[i]);
    }
    std::sort(out[0].begin(), out[0].end());
    std::sort(out[1].begin(), out[1].end());
    return out;
}

double auroc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
    if (scores.size() != labels.size()) {
        throw std::invalid_argument("auroc: scores and labels differ in length");
    }
    std::size_t n_pos = 0;
    for (auto l : labels) n_pos += (l == 1);
    const std::size_t n_neg = labels.size() - n_pos;
    if (n_pos == 0 || n_neg == 0) throw UndefinedAuroc("auroc: undefined with a single class");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });

    // Sum of mid-ranks (1-based) of the positives, doubled to stay integral.
    std::size_t twice_rank_sum = 0;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
        const std::size_t twice_mid = (i + 1) + j;  // 2 * mean of ranks i+1..j
        for (std::size_t t = i; t < j; ++t) {
            if (labels[order[t]] == 1) twice_rank_sum += twice_mid;
        }
        i = j;
    }
    // U = R_pos - n_pos (n_pos + 1) / 2, all doubled.
    const std::size_t twice_u = twice_rank_sum - n_pos * (n_pos + 1);
    return static_cast<double>(twice_u) / (2.0 * static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

Confusion confusion_matrix(std::span<const double> scores, std::span<const std::uint8_t> labels,
                           double threshold) {
    if (scores.size() != labels.size()) {
        throw std::invalid_argument("confusion_matrix: scores and labels differ in length");
    }
    Confusion c;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const bool predicted = scores[i] >= threshold;
        if (labels[i] == 1) {
            (predicted ? c.tp : c.fn)++;
        } else {
            (predicted ? c.fp : c.tn)++;
        }
    }
    return c;
}

ContaminationReport contamination_check(std::span<const Provenance> provenance,
                                        std::span<const std::uint8_t> labels,
                                        std::array<std::size_t, 2> original_class_counts) {
    if (provenance.size() != labels.size()) {
        throw std::invalid_argument("contamination_check: provenance and labels differ in length");
    }
    ContaminationReport r;
    r.original_class_counts = original_class_counts;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (provenance[i] == Provenance::Synthetic) ++r.synthetic_rows_in_eval;
        ++r.eval_class_counts[labels[i] ? 1 : 0];
    }
    r.flagged = r.synthetic_rows_in_eval > 0 ||
                r.eval_class_counts[0] > original_class_counts[0] ||
                r.eval_class_counts[1] > original_class_counts[1];
    return r;
}

Summary summarize(std::span<const double> values, StdKind kind) {
    if (values.empty()) throw std::invalid_argument("summarize: no values");
    const double n = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    Summary s{mean, 0.0};
    if (values.size() > 1) s.std = std::sqrt(ss / (kind == StdKind::Sample ? n - 1.0 : n));
    return s;
}

}  // namespace leakaudit
