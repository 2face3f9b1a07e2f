#pragma once

#include <filesystem>
#include <iosfwd>

#include "leakaudit/cohort_etl.hpp"
#include "leakaudit/experiment.hpp"
#include "leakaudit/synth_cohort.hpp"

namespace leakaudit {

// Everything the command line tool can be configured with.
struct AppConfig {
    RunConfig run;
    etl::CohortConfig cohort;
    etl::Schema schema = etl::default_schema();
    SynthConfig synth;
};

// Applies a key-value config text on top of `cfg`. One `key = value` per line;
// `#` starts a comment; list values are comma-separated. Keys:
//
//   folds, seed, repeats, holdout_test_fraction, threshold, std, setup
//   adasyn.k_neighbors, adasyn.beta
//   forest.trees, forest.max_depth, forest.min_leaf, forest.mtry,
//   forest.bootstrap, forest.threads
//   cohort.diagnosis_keyword, cohort.icd9_prefixes, cohort.los_threshold_days,
//   cohort.age_cutoff_years, cohort.medication_keys, cohort.lab_keys
//   schema.<table>.file, schema.<table>.<field>
//   synth.n_total, synth.n_minority, synth.binary, synth.numeric,
//   synth.informative, synth.signal, synth.missing_rate, synth.seed
//
// Throws std::invalid_argument with the line number on malformed lines,
// unknown keys, or bad values.
void apply_config(AppConfig& cfg, std::istream& in);
void apply_config_file(AppConfig& cfg, const std::filesystem::path& path);

}  // namespace leakaudit
