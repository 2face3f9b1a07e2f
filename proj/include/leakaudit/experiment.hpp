#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "leakaudit/evaluation.hpp"
#include "leakaudit/model.hpp"
#include "leakaudit/resampling.hpp"
#include "leakaudit/tabular.hpp"

namespace leakaudit {

// The three cross-validated pipelines plus the balance-then-split holdout.
enum class Setup {
    AfterPartitioning,   // (i) impute + oversample inside each training fold
    NoOversampling,      // (ii) impute inside each training fold, no oversampling
    BeforePartitioning,  // (iii) impute + oversample everything, then split (leaky)
    LeakyHoldout,        // oversample everything, then a stratified 70/30 split
};

const char* setup_name(Setup s) noexcept;   // e.g. "after_partitioning"
const char* setup_label(Setup s) noexcept;  // table row label
Setup setup_from_string(const std::string& s);  // accepts names and i/ii/iii/holdout
inline constexpr Setup kAllSetups[] = {Setup::AfterPartitioning, Setup::NoOversampling,
                                       Setup::BeforePartitioning, Setup::LeakyHoldout};

// The seeds inside `adasyn` and `forest` are ignored; every per-fold seed is
// derived from master_seed.
struct RunConfig {
    Setup setup = Setup::AfterPartitioning;
    std::size_t folds = 10;
    double holdout_test_fraction = 0.30;
    AdasynConfig adasyn;
    ForestConfig forest;
    std::uint64_t master_seed = 0;
    std::size_t repeats = 1;
    double threshold = 0.5;
    StdKind std_kind = StdKind::Sample;

    void validate() const;
};

// Labelled seed streams. Setups (i)-(iii) share the fold-plan seed of a repeat,
// so (i) and (ii) score identical folds.
struct RunSeeds {
    static std::uint64_t fold_plan(std::uint64_t master, std::size_t repeat);
    static std::uint64_t holdout(std::uint64_t master, std::size_t repeat);
    static std::uint64_t adasyn(std::uint64_t master, std::size_t repeat, std::size_t fold);
    static std::uint64_t forest(std::uint64_t master, std::size_t repeat, std::size_t fold);
    // fold index used for whole-dataset oversampling in the leaky setups
    static constexpr std::size_t kWholeDataset = static_cast<std::size_t>(-1);
};

struct FoldResult {
    std::size_t repeat = 0;
    std::size_t fold = 0;
    double auroc = 0.0;
    Confusion confusion;
    ContaminationReport contamination;
};

struct SkippedFold {
    std::size_t repeat = 0;
    std::size_t fold = 0;
    std::string reason;
    ContaminationReport contamination;
};

struct SetupReport {
    Setup setup = Setup::AfterPartitioning;
    std::vector<FoldResult> folds;
    std::optional<Summary> auroc;  // empty when every fold was skipped
    std::vector<SkippedFold> skipped;
    std::vector<std::string> warnings;
    std::size_t synthetic_generated = 0;  // summed over repeats
};

struct DatasetFingerprint {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::size_t binary_columns = 0;
    std::size_t numeric_columns = 0;
    std::array<std::size_t, 2> class_counts{0, 0};
    std::size_t missing_cells = 0;
    std::string content_hash;  // FNV-1a over labels and cell bits, hex

    bool operator==(const DatasetFingerprint&) const = default;
};

DatasetFingerprint fingerprint(const Dataset& ds);

struct ExperimentReport {
    RunConfig config;
    DatasetFingerprint dataset;
    std::vector<SetupReport> setups;
};

// What the pipeline saw on one fold; passed to an optional observer so tests
// can audit the train/test separation.
struct FoldTrace {
    Setup setup;
    std::size_t repeat;
    std::size_t fold;
    const ImputerModel& imputer;
    const Dataset& evaluated;  // dataset that test_rows index into
    std::span<const RowIndex> train_rows;
    std::span<const RowIndex> test_rows;
};
using FoldObserver = std::function<void(const FoldTrace&)>;

// Runs cfg.setup (LeakyHoldout is forwarded to run_leaky_holdout). The input
// must be all-Original with both classes present.
ExperimentReport run_setup(const Dataset& ds, const RunConfig& cfg,
                           const FoldObserver& observer = {});

ExperimentReport run_leaky_holdout(const Dataset& ds, const RunConfig& cfg,
                                   const FoldObserver& observer = {});

// Runs every setup in `setups` with the same config and merges the results.
ExperimentReport run_setups(const Dataset& ds, const RunConfig& cfg, std::span<const Setup> setups,
                            const FoldObserver& observer = {});

nlohmann::ordered_json to_json(const ExperimentReport& r);
ExperimentReport report_from_json(const nlohmann::json& j);

// Merges reports into one JSON document (config and fingerprint from the
// first report, setups in the canonical (i), (ii), (iii), holdout order).
nlohmann::ordered_json merged_json(std::span<const ExperimentReport> reports);

// Markdown table: one row per setup, "Method" and "AUROC (in %)" as
// mean ± std with two decimals.
std::string render_table(std::span<const ExperimentReport> reports);

// Writes report.json and report.md into out_dir. Throws on an empty list or an
// unwritable directory.
void render_report(std::span<const ExperimentReport> reports, const std::filesystem::path& out_dir);

}  // namespace leakaudit
