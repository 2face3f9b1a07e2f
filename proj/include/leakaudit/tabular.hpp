#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace leakaudit {

using RowIndex = std::size_t;
using RowSet = std::vector<RowIndex>;

enum class ColumnKind { Binary, Numeric };
enum class Provenance : std::uint8_t { Original, Synthetic };

const char* to_string(ColumnKind k) noexcept;
const char* to_string(Provenance p) noexcept;
ColumnKind column_kind_from_string(const std::string& s);

struct Column {
    std::string name;
    ColumnKind kind = ColumnKind::Numeric;

    bool operator==(const Column&) const = default;
};

// Missing cells are quiet NaN; every finite value is an observed cell.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
inline bool is_missing(double v) noexcept { return std::isnan(v); }

// Design matrix plus binary label and per-row provenance. Row-major storage so
// that a row is a contiguous span (the neighbour search relies on it).
class Dataset {
public:
    Dataset() = default;
    explicit Dataset(std::vector<Column> columns);

    std::size_t rows() const noexcept { return labels_.size(); }
    std::size_t cols() const noexcept { return columns_.size(); }

    const std::vector<Column>& columns() const noexcept { return columns_; }
    const Column& column(std::size_t c) const { return columns_.at(c); }

    double at(RowIndex r, std::size_t c) const { return x_[r * cols() + c]; }
    void set(RowIndex r, std::size_t c, double v);

    std::span<const double> row(RowIndex r) const { return {x_.data() + r * cols(), cols()}; }
    std::span<const double> values() const noexcept { return x_; }

    int label(RowIndex r) const { return labels_[r]; }
    Provenance provenance(RowIndex r) const { return provenance_[r]; }
    const std::vector<std::uint8_t>& labels() const noexcept { return labels_; }
    const std::vector<Provenance>& provenance() const noexcept { return provenance_; }

    // Appends a row; throws on width mismatch, invalid label, or a binary cell
    // outside {0, 1, missing}.
    void add_row(std::span<const double> values, int label,
                 Provenance prov = Provenance::Original);

    std::map<std::string, std::string>& meta() noexcept { return meta_; }
    const std::map<std::string, std::string>& meta() const noexcept { return meta_; }

    bool has_missing() const noexcept;
    bool has_missing(std::span<const RowIndex> rows) const noexcept;

    // Counts of label 0 and label 1, over all rows or a subset.
    std::array<std::size_t, 2> class_counts() const noexcept;
    std::array<std::size_t, 2> class_counts(std::span<const RowIndex> rows) const noexcept;

    RowSet all_rows() const;

    // New dataset holding the given rows in the given order (meta copied).
    Dataset subset(std::span<const RowIndex> rows) const;

    bool operator==(const Dataset& o) const noexcept;

private:
    void check_cell(std::size_t c, double v) const;

    std::vector<Column> columns_;
    std::vector<double> x_;
    std::vector<std::uint8_t> labels_;
    std::vector<Provenance> provenance_;
    std::map<std::string, std::string> meta_;
};

// Per-column fill values fitted on a row subset.
struct ImputerModel {
    std::vector<Column> columns;
    std::vector<double> fill;
};

// Numeric columns get the mean of observed cells in `rows`, binary columns the
// mode (ties to 0). Throws if a column has no observed value within `rows`.
ImputerModel fit_imputer(const Dataset& ds, std::span<const RowIndex> rows);

// Copy of ds with every missing cell replaced by its column fill.
Dataset apply_imputer(const Dataset& ds, const ImputerModel& m);

// Dataset CSV: header = column names + "label", one row per sample, missing
// cells as empty fields. The JSON sidecar holds column kinds plus free-form
// metadata (counts, cohort attrition).
void write_dataset(const Dataset& ds, const std::filesystem::path& csv_path);
std::filesystem::path sidecar_path(const std::filesystem::path& csv_path);

// Reads a dataset CSV. Column kinds come from the sidecar when present,
// otherwise a column is binary iff every observed cell is 0 or 1.
Dataset read_dataset(const std::filesystem::path& csv_path);

}  // namespace leakaudit
