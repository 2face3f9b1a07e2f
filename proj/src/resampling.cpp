#include "leakaudit/resampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "leakaudit/seeding.hpp"
#include "leakaudit/simd/distance.hpp"

namespace leakaudit {

void AdasynConfig::validate() const {
    if (k_neighbors < 1) throw std::invalid_argument("adasyn: k_neighbors must be >= 1");
    if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("adasyn: beta must be in [0, 1]");
}

std::vector<std::size_t> allocate_counts(std::span<const double> weights, std::size_t total) {
    double sum = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) throw std::invalid_argument("allocate_counts: negative or NaN weight");
        sum += w;
    }
    if (weights.empty() || std::abs(sum - 1.0) > 1e-9) {
        throw std::invalid_argument("allocate_counts: weights must sum to 1");
    }

    std::vector<std::size_t> counts(weights.size());
    std::vector<double> remainder(weights.size());
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const double share = weights[i] * static_cast<double>(total);
        const double whole = std::floor(share);
        counts[i] = static_cast<std::size_t>(whole);
        remainder[i] = share - whole;
        assigned += counts[i];
    }

    std::vector<std::size_t> order(weights.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    for (std::size_t j = 0; assigned < total; j = (j + 1) % order.size()) {
        ++counts[order[j]];
        ++assigned;
    }
    // Rounding in weight * total can overshoot by a unit; take it back from the
    // smallest remainders.
    for (std::size_t j = order.size(); assigned > total;) {
        j = (j == 0 ? order.size() : j) - 1;
        if (counts[order[j]] > 0) {
            --counts[order[j]];
            --assigned;
        }
    }
    return counts;
}

namespace {

// Row-major copy of the selected rows.
std::vector<double> gather(const Dataset& ds, std::span<const RowIndex> rows) {
    std::vector<double> block;
    block.reserve(rows.size() * ds.cols());
    for (RowIndex r : rows) {
        const auto v = ds.row(r);
        block.insert(block.end(), v.begin(), v.end());
    }
    return block;
}

// k nearest positions (into `rows`) to the row at position `self`, among the
// positions accepted by `keep`. Ordered by (distance, dataset row index).
template <class Keep>
std::vector<std::size_t> nearest_positions(std::span<const double> dist,
                                           std::span<const RowIndex> rows, std::size_t self,
                                           std::size_t k, Keep keep) {
    std::vector<std::size_t> cand;
    for (std::size_t j = 0; j < rows.size(); ++j) {
        if (j != self && keep(j)) cand.push_back(j);
    }
    const std::size_t take = std::min(k, cand.size());
    auto closer = [&](std::size_t a, std::size_t b) {
        if (dist[a] != dist[b]) return dist[a] < dist[b];
        return rows[a] < rows[b];
    };
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(take), cand.end(),
                      closer);
    cand.resize(take);
    return cand;
}

}  // namespace

std::vector<RowIndex> nearest_rows(const Dataset& ds, RowIndex query_row,
                                   std::span<const RowIndex> candidates, std::size_t k) {
    const std::vector<double> block = gather(ds, candidates);
    std::vector<double> dist(candidates.size());
    simd::squared_l2_to_rows(ds.row(query_row), block, dist);
    std::size_t self = candidates.size();
    std::vector<RowIndex> out;
    for (std::size_t pos : nearest_positions(dist, candidates, self, k,
                                             [&](std::size_t j) { return candidates[j] != query_row; })) {
        out.push_back(candidates[pos]);
    }
    return out;
}

AdasynResult adasyn_detailed(const Dataset& ds, std::span<const RowIndex> rows,
                             const AdasynConfig& cfg) {
    cfg.validate();
    if (rows.empty()) throw std::invalid_argument("adasyn: empty row set");
    for (RowIndex r : rows) {
        if (r >= ds.rows()) throw std::out_of_range("adasyn: row index out of range");
    }
    const auto counts = ds.class_counts(rows);
    if (counts[0] == 0 || counts[1] == 0) {
        throw std::invalid_argument("adasyn: selected rows contain a single class");
    }
    if (ds.has_missing(rows)) {
        throw std::invalid_argument("adasyn: selected rows contain missing cells; impute first");
    }

    AdasynResult res{ds.subset(rows), {}};
    AdasynTrace& tr = res.trace;
    tr.minority_label = counts[1] <= counts[0] ? 1 : 0;
    tr.minority_count = counts[static_cast<std::size_t>(tr.minority_label)];
    tr.majority_count = counts[static_cast<std::size_t>(1 - tr.minority_label)];
    tr.generated = static_cast<std::size_t>(
        std::llround(cfg.beta * static_cast<double>(tr.majority_count - tr.minority_count)));
    if (tr.generated == 0) return res;

    const std::size_t n = rows.size();
    const std::size_t dim = ds.cols();
    const std::vector<double> block = gather(ds, rows);
    const int minority = tr.minority_label;
    auto is_minority = [&](std::size_t pos) { return ds.label(rows[pos]) == minority; };

    tr.k_density = std::min(cfg.k_neighbors, n - 1);
    tr.k_minority = std::min(cfg.k_neighbors, tr.minority_count - 1);

    std::vector<std::size_t> seed_pos;
    for (std::size_t i = 0; i < n; ++i) {
        if (is_minority(i)) seed_pos.push_back(i);
    }

    std::vector<double> dist(n);
    std::vector<std::vector<std::size_t>> partners(seed_pos.size());
    double ratio_sum = 0.0;
    std::vector<double> ratio(seed_pos.size());
    for (std::size_t s = 0; s < seed_pos.size(); ++s) {
        const std::size_t i = seed_pos[s];
        simd::squared_l2_to_rows(std::span<const double>(block.data() + i * dim, dim), block, dist);
        const auto all = nearest_positions(dist, rows, i, tr.k_density, [](std::size_t) { return true; });
        const std::size_t delta = static_cast<std::size_t>(
            std::count_if(all.begin(), all.end(), [&](std::size_t j) { return !is_minority(j); }));
        partners[s] = nearest_positions(dist, rows, i, tr.k_minority, is_minority);
        tr.seeds.push_back(rows[i]);
        tr.majority_neighbors.push_back(delta);
        ratio[s] = static_cast<double>(delta) / static_cast<double>(tr.k_density);
        ratio_sum += ratio[s];
    }

    tr.weights.resize(seed_pos.size());
    if (ratio_sum > 0.0) {
        for (std::size_t s = 0; s < ratio.size(); ++s) tr.weights[s] = ratio[s] / ratio_sum;
    } else {
        tr.uniform_fallback = true;
        std::fill(tr.weights.begin(), tr.weights.end(), 1.0 / static_cast<double>(seed_pos.size()));
    }
    tr.counts = allocate_counts(tr.weights, tr.generated);

    Rng rng(derive_seed(cfg.seed, "adasyn"));
    std::vector<double> synth(dim);
    for (std::size_t s = 0; s < seed_pos.size(); ++s) {
        const std::size_t i = seed_pos[s];
        const double* xi = block.data() + i * dim;
        for (std::size_t g = 0; g < tr.counts[s]; ++g) {
            // A lone minority row has no partner; its synthetic copies duplicate it.
            const std::size_t z = partners[s].empty() ? i : partners[s][rng.below(partners[s].size())];
            const double lambda = rng.uniform_closed01();
            const double* xz = block.data() + z * dim;
            for (std::size_t c = 0; c < dim; ++c) {
                const double lo = std::min(xi[c], xz[c]);
                const double hi = std::max(xi[c], xz[c]);
                double v = std::clamp(xi[c] + lambda * (xz[c] - xi[c]), lo, hi);
                if (ds.column(c).kind == ColumnKind::Binary) v = v >= 0.5 ? 1.0 : 0.0;
                synth[c] = v;
            }
            res.data.add_row(synth, minority, Provenance::Synthetic);
            tr.samples.push_back({rows[i], rows[z], lambda});
        }
    }
    return res;
}

Dataset adasyn(const Dataset& ds, std::span<const RowIndex> rows, const AdasynConfig& cfg) {
    return adasyn_detailed(ds, rows, cfg).data;
}

}  // namespace leakaudit
