#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "leakaudit/tabular.hpp"

namespace leakaudit {

struct AdasynConfig {
    std::size_t k_neighbors = 5;
    double beta = 1.0;  // 1 = fully balance the classes
    std::uint64_t seed = 0;

    void validate() const;
};

// Per-call bookkeeping, exposed for audits and tests.
struct AdasynTrace {
    int minority_label = 1;
    std::size_t minority_count = 0;
    std::size_t majority_count = 0;
    std::size_t generated = 0;          // G
    std::size_t k_density = 0;          // neighbours used for the majority ratio
    std::size_t k_minority = 0;         // neighbours used for interpolation
    bool uniform_fallback = false;      // no seed had a majority neighbour
    std::vector<RowIndex> seeds;        // minority rows, in input order
    std::vector<std::size_t> majority_neighbors;  // Delta per seed
    std::vector<double> weights;        // normalized density ratios
    std::vector<std::size_t> counts;    // synthetic rows per seed
    struct Sample {
        RowIndex seed;
        RowIndex partner;
        double lambda;
    };
    std::vector<Sample> samples;  // one per synthetic row, in output order
};

struct AdasynResult {
    Dataset data;
    AdasynTrace trace;
};

// Adaptive synthetic oversampling of the minority class among `rows`.
//
// The result holds the selected rows (in the given order) followed by
// G = round(beta * (majority - minority)) synthetic minority rows tagged
// Provenance::Synthetic. Each minority row i is weighted by the fraction of
// majority rows among its K nearest neighbours (Euclidean, over all selected
// rows; ties to the lower row index); the weights are normalized and turned
// into integer counts with allocate_counts. Synthetic row = x_i + lambda *
// (x_z - x_i), lambda uniform on [0, 1], x_z one of i's K nearest minority
// neighbours; binary columns are thresholded at 0.5.
//
// Throws when the rows hold a single class or any missing cell.
AdasynResult adasyn_detailed(const Dataset& ds, std::span<const RowIndex> rows,
                             const AdasynConfig& cfg);
Dataset adasyn(const Dataset& ds, std::span<const RowIndex> rows, const AdasynConfig& cfg);

// Largest-remainder apportionment: floor(w * total) per entry, remaining units
// to the largest remainders, ties to the lower index. Weights must be
// non-negative and sum to 1 within 1e-9.
std::vector<std::size_t> allocate_counts(std::span<const double> weights, std::size_t total);

// Indices of the k nearest rows of `candidates` to `query_row` (itself
// excluded), ordered by (distance, row index). Uses the dispatched SIMD kernel.
std::vector<RowIndex> nearest_rows(const Dataset& ds, RowIndex query_row,
                                   std::span<const RowIndex> candidates, std::size_t k);

}  // namespace leakaudit
