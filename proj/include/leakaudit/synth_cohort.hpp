#pragma once

#include <cstddef>
#include <cstdint>

#include "leakaudit/tabular.hpp"

namespace leakaudit {

// Shape and separability of a generated cohort. Defaults give a 112-patient
// cohort with 10 long stays.
struct SynthConfig {
    std::size_t n_total = 112;
    std::size_t n_minority = 10;
    std::size_t n_binary_features = 20;
    std::size_t n_numeric_features = 10;
    double signal_strength = 1.0;  // class mean shift, in feature standard deviations
    std::size_t n_informative = 6;
    double missing_rate = 0.1;     // numeric cells only, independent of class
    std::uint64_t seed = 0;

    void validate() const;
};

// Binary columns come first (bin_0..), then numeric ones (num_0..). The
// informative features are the first numeric columns, then the first binary
// columns once the numeric ones are used up. Exactly n_minority rows carry
// label 1, placed at seeded random positions.
Dataset generate_cohort(const SynthConfig& cfg);

}  // namespace leakaudit
