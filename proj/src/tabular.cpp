#include "leakaudit/tabular.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "leakaudit/csv.hpp"

namespace leakaudit {

const char* to_string(ColumnKind k) noexcept {
    return k == ColumnKind::Binary ? "binary" : "numeric";
}

const char* to_string(Provenance p) noexcept {
    return p == Provenance::Original ? "original" : "synthetic";
}

ColumnKind column_kind_from_string(const std::string& s) {
    if (s == "binary") return ColumnKind::Binary;
    if (s == "numeric") return ColumnKind::Numeric;
    throw std::invalid_argument("unknown column kind '" + s + "'");
}

Dataset::Dataset(std::vector<Column> columns) : columns_(std::move(columns)) {}

void Dataset::check_cell(std::size_t c, double v) const {
    if (is_missing(v)) return;
    if (!std::isfinite(v)) {
        throw std::invalid_argument("column " + columns_[c].name + ": non-finite value");
    }
    if (columns_[c].kind == ColumnKind::Binary && v != 0.0 && v != 1.0) {
        throw std::invalid_argument("binary column " + columns_[c].name + ": value " +
                                    std::to_string(v) + " is not 0 or 1");
    }
}

void Dataset::set(RowIndex r, std::size_t c, double v) {
    if (r >= rows() || c >= cols()) throw std::out_of_range("Dataset::set out of range");
    check_cell(c, v);
    x_[r * cols() + c] = v;
}

void Dataset::add_row(std::span<const double> values, int label, Provenance prov) {
    if (values.size() != cols()) {
        throw std::invalid_argument("row has " + std::to_string(values.size()) +
                                    " values, dataset has " + std::to_string(cols()) +
                                    " columns");
    }
    if (label != 0 && label != 1) {
        throw std::invalid_argument("label must be 0 or 1, got " + std::to_string(label));
    }
    for (std::size_t c = 0; c < values.size(); ++c) check_cell(c, values[c]);
    x_.insert(x_.end(), values.begin(), values.end());
    labels_.push_back(static_cast<std::uint8_t>(label));
    provenance_.push_back(prov);
}

bool Dataset::has_missing() const noexcept {
    return std::any_of(x_.begin(), x_.end(), [](double v) { return is_missing(v); });
}

bool Dataset::has_missing(std::span<const RowIndex> rows) const noexcept {
    for (RowIndex r : rows) {
        for (double v : row(r)) {
            if (is_missing(v)) return true;
        }
    }
    return false;
}

std::array<std::size_t, 2> Dataset::class_counts() const noexcept {
    std::array<std::size_t, 2> n{0, 0};
    for (auto l : labels_) ++n[l];
    return n;
}

std::array<std::size_t, 2> Dataset::class_counts(std::span<const RowIndex> rows) const noexcept {
    std::array<std::size_t, 2> n{0, 0};
    for (RowIndex r : rows) ++n[labels_[r]];
    return n;
}

RowSet Dataset::all_rows() const {
    RowSet r(rows());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = i;
    return r;
}

Dataset Dataset::subset(std::span<const RowIndex> rows) const {
    Dataset out(columns_);
    out.meta_ = meta_;
    out.x_.reserve(rows.size() * cols());
    for (RowIndex r : rows) {
        if (r >= this->rows()) throw std::out_of_range("Dataset::subset row out of range");
        auto v = row(r);
        out.x_.insert(out.x_.end(), v.begin(), v.end());
        out.labels_.push_back(labels_[r]);
        out.provenance_.push_back(provenance_[r]);
    }
    return out;
}

bool Dataset::operator==(const Dataset& o) const noexcept {
    if (columns_ != o.columns_ || labels_ != o.labels_ || provenance_ != o.provenance_ ||
        meta_ != o.meta_ || x_.size() != o.x_.size()) {
        return false;
    }
    for (std::size_t i = 0; i < x_.size(); ++i) {
        const bool ma = is_missing(x_[i]);
        const bool mb = is_missing(o.x_[i]);
        if (ma != mb || (!ma && x_[i] != o.x_[i])) return false;
    }
    return true;
}

ImputerModel fit_imputer(const Dataset& ds, std::span<const RowIndex> rows) {
    if (rows.empty()) throw std::invalid_argument("fit_imputer: empty row set");
    // Accumulate in index order so the fit does not depend on how rows are listed.
    RowSet sorted(rows.begin(), rows.end());
    std::sort(sorted.begin(), sorted.end());

    ImputerModel m;
    m.columns = ds.columns();
    m.fill.resize(ds.cols());
    for (std::size_t c = 0; c < ds.cols(); ++c) {
        double sum = 0.0;
        std::size_t observed = 0;
        std::size_t ones = 0;
        for (RowIndex r : sorted) {
            const double v = ds.at(r, c);
            if (is_missing(v)) continue;
            sum += v;
            ++observed;
            if (v == 1.0) ++ones;
        }
        if (observed == 0) {
            throw std::invalid_argument("fit_imputer: column " + ds.column(c).name +
                                        " has no observed values in the fitting rows");
        }
        if (ds.column(c).kind == ColumnKind::Binary) {
            m.fill[c] = (2 * ones > observed) ? 1.0 : 0.0;
        } else {
            m.fill[c] = sum / static_cast<double>(observed);
        }
    }
    return m;
}

Dataset apply_imputer(const Dataset& ds, const ImputerModel& m) {
    if (m.columns != ds.columns() || m.fill.size() != ds.cols()) {
        throw std::invalid_argument("apply_imputer: imputer columns do not match dataset");
    }
    Dataset out = ds;
    for (RowIndex r = 0; r < out.rows(); ++r) {
        for (std::size_t c = 0; c < out.cols(); ++c) {
            if (is_missing(out.at(r, c))) out.set(r, c, m.fill[c]);
        }
    }
    return out;
}

namespace {

std::string format_cell(double v) {
    if (is_missing(v)) return {};
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, ptr);
}

}  // namespace

std::filesystem::path sidecar_path(const std::filesystem::path& csv_path) {
    auto p = csv_path;
    p.replace_extension(".json");
    return p;
}

void write_dataset(const Dataset& ds, const std::filesystem::path& csv_path) {
    if (csv_path.has_parent_path()) std::filesystem::create_directories(csv_path.parent_path());
    std::ofstream out(csv_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + csv_path.string());

    std::vector<std::string> fields;
    for (const auto& c : ds.columns()) fields.push_back(c.name);
    fields.emplace_back("label");
    csv::write_row(out, fields);
    for (RowIndex r = 0; r < ds.rows(); ++r) {
        fields.clear();
        for (double v : ds.row(r)) fields.push_back(format_cell(v));
        fields.push_back(std::to_string(ds.label(r)));
        csv::write_row(out, fields);
    }
    if (!out) throw std::runtime_error("write failed for " + csv_path.string());

    nlohmann::ordered_json side;
    side["columns"] = nlohmann::ordered_json::array();
    for (const auto& c : ds.columns()) {
        side["columns"].push_back({{"name", c.name}, {"kind", to_string(c.kind)}});
    }
    side["label"] = "label";
    const auto counts = ds.class_counts();
    side["counts"] = {{"rows", ds.rows()}, {"label_0", counts[0]}, {"label_1", counts[1]}};
    side["meta"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : ds.meta()) side["meta"][k] = v;

    std::ofstream js(sidecar_path(csv_path), std::ios::binary);
    if (!js) throw std::runtime_error("cannot write " + sidecar_path(csv_path).string());
    js << side.dump(2) << '\n';
}

Dataset read_dataset(const std::filesystem::path& csv_path) {
    const csv::Table t = csv::read_file(csv_path);
    if (t.header.empty()) throw std::runtime_error(csv_path.string() + ": empty file");
    const auto label_col = t.find("label");
    if (!label_col) throw std::runtime_error(csv_path.string() + ": column label not found");

    std::vector<std::size_t> feature_cols;
    for (std::size_t i = 0; i < t.header.size(); ++i) {
        if (i != *label_col) feature_cols.push_back(i);
    }

    std::vector<std::vector<double>> values(t.rows.size(), std::vector<double>(feature_cols.size()));
    std::vector<int> labels(t.rows.size());
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        for (std::size_t j = 0; j < feature_cols.size(); ++j) {
            values[r][j] = csv::to_double(t.rows[r][feature_cols[j]]).value_or(kMissing);
        }
        const auto l = csv::to_double(t.rows[r][*label_col]);
        if (!l || (*l != 0.0 && *l != 1.0)) {
            throw std::runtime_error(csv_path.string() + ": row " + std::to_string(r + 2) +
                                     " has an invalid label");
        }
        labels[r] = static_cast<int>(*l);
    }

    std::vector<Column> columns;
    std::map<std::string, std::string> meta;
    const auto side = sidecar_path(csv_path);
    if (std::filesystem::exists(side)) {
        std::ifstream in(side);
        const auto j = nlohmann::json::parse(in);
        for (const auto& c : j.at("columns")) {
            columns.push_back({c.at("name").get<std::string>(),
                               column_kind_from_string(c.at("kind").get<std::string>())});
        }
        if (columns.size() != feature_cols.size()) {
            throw std::runtime_error(side.string() + ": column count does not match " +
                                     csv_path.string());
        }
        for (std::size_t j2 = 0; j2 < columns.size(); ++j2) {
            if (columns[j2].name != t.header[feature_cols[j2]]) {
                throw std::runtime_error(side.string() + ": column " + columns[j2].name +
                                         " does not match CSV header");
            }
        }
        if (j.contains("meta")) {
            for (const auto& [k, v] : j["meta"].items()) meta[k] = v.get<std::string>();
        }
    } else {
        for (std::size_t j2 = 0; j2 < feature_cols.size(); ++j2) {
            bool binary = true;
            for (const auto& row : values) {
                const double v = row[j2];
                if (!is_missing(v) && v != 0.0 && v != 1.0) {
                    binary = false;
                    break;
                }
            }
            columns.push_back({t.header[feature_cols[j2]],
                               binary ? ColumnKind::Binary : ColumnKind::Numeric});
        }
    }

    Dataset ds(std::move(columns));
    ds.meta() = std::move(meta);
    for (std::size_t r = 0; r < values.size(); ++r) ds.add_row(values[r], labels[r]);
    return ds;
}

}  // namespace leakaudit
