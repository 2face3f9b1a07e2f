#include "leakaudit/synth_cohort.hpp"

#include <algorithm>
#include <charconv>
#include <stdexcept>
#include <string>
#include <vector>

#include "leakaudit/seeding.hpp"

namespace leakaudit {

namespace {

std::string fmt(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, ptr);
}

}  // namespace

void SynthConfig::validate() const {
    if (n_minority == 0 || n_minority >= n_total) {
        throw std::invalid_argument("synth: need 0 < n_minority < n_total");
    }
    if (n_binary_features + n_numeric_features == 0) {
        throw std::invalid_argument("synth: need at least one feature");
    }
    if (n_informative > n_binary_features + n_numeric_features) {
        throw std::invalid_argument("synth: n_informative exceeds the number of features");
    }
    if (!(signal_strength >= 0.0)) throw std::invalid_argument("synth: signal_strength must be >= 0");
    if (!(missing_rate >= 0.0 && missing_rate < 1.0)) {
        throw std::invalid_argument("synth: missing_rate must be in [0, 1)");
    }
}

Dataset generate_cohort(const SynthConfig& cfg) {
    cfg.validate();

    std::vector<Column> columns;
    for (std::size_t j = 0; j < cfg.n_binary_features; ++j) {
        columns.push_back({"bin_" + std::to_string(j), ColumnKind::Binary});
    }
    for (std::size_t j = 0; j < cfg.n_numeric_features; ++j) {
        columns.push_back({"num_" + std::to_string(j), ColumnKind::Numeric});
    }

    const std::size_t p = columns.size();
    std::vector<bool> informative(p, false);
    std::size_t remaining = cfg.n_informative;
    for (std::size_t j = 0; j < cfg.n_numeric_features && remaining; ++j, --remaining) {
        informative[cfg.n_binary_features + j] = true;
    }
    for (std::size_t j = 0; j < cfg.n_binary_features && remaining; ++j, --remaining) {
        informative[j] = true;
    }

    // Exact class counts: shuffle a label vector with the first n_minority set.
    Rng label_rng(derive_seed(cfg.seed, "synth.labels"));
    std::vector<int> labels(cfg.n_total, 0);
    std::fill_n(labels.begin(), cfg.n_minority, 1);
    for (std::size_t i = labels.size() - 1; i > 0; --i) {
        std::swap(labels[i], labels[label_rng.below(i + 1)]);
    }

    Rng value_rng(derive_seed(cfg.seed, "synth.values"));
    Rng missing_rng(derive_seed(cfg.seed, "synth.missing"));
    const double p_base = 0.3;
    const double p_shift = std::min(0.9, p_base + 0.2 * cfg.signal_strength);

    Dataset ds(columns);
    std::vector<double> row(p);
    for (std::size_t i = 0; i < cfg.n_total; ++i) {
        const bool positive = labels[i] == 1;
        for (std::size_t j = 0; j < p; ++j) {
            const bool shifted = positive && informative[j];
            if (columns[j].kind == ColumnKind::Binary) {
                row[j] = value_rng.bernoulli(shifted ? p_shift : p_base) ? 1.0 : 0.0;
            } else {
                const double z = value_rng.normal();
                row[j] = z + (shifted ? cfg.signal_strength : 0.0);
                // drawn for every numeric cell so missingness never shifts the value stream
                if (missing_rng.bernoulli(cfg.missing_rate)) row[j] = kMissing;
            }
        }
        ds.add_row(row, labels[i]);
    }

    auto& meta = ds.meta();
    meta["source"] = "synth";
    meta["seed"] = std::to_string(cfg.seed);
    meta["signal_strength"] = fmt(cfg.signal_strength);
    meta["missing_rate"] = fmt(cfg.missing_rate);
    meta["n_informative"] = std::to_string(cfg.n_informative);
    return ds;
}

}  // namespace leakaudit
