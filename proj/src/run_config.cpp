#include "leakaudit/run_config.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <stdexcept>
#include <string>
#include <vector>

namespace leakaudit {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

template <class T>
T parse_number(const std::string& v, const std::string& key) {
    T out{};
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size()) {
        throw std::invalid_argument("bad value '" + v + "' for " + key);
    }
    return out;
}

bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "off" || v == "no") return false;
    throw std::invalid_argument("bad boolean '" + v + "' for " + key);
}

std::vector<std::string> parse_list(const std::string& v) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= v.size()) {
        const auto comma = v.find(',', start);
        const std::string item = trim(v.substr(start, comma == std::string::npos ? std::string::npos
                                                                                 : comma - start));
        if (!item.empty()) out.push_back(item);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

// "auto"/"none"/"unlimited" leave the optional empty.
std::optional<std::size_t> parse_optional_count(const std::string& v, const std::string& key) {
    if (v == "auto" || v == "none" || v == "unlimited") return std::nullopt;
    return parse_number<std::size_t>(v, key);
}

void apply_key(AppConfig& cfg, const std::string& key, const std::string& v) {
    auto& run = cfg.run;
    if (key == "folds") run.folds = parse_number<std::size_t>(v, key);
    else if (key == "seed") run.master_seed = parse_number<std::uint64_t>(v, key);
    else if (key == "repeats") run.repeats = parse_number<std::size_t>(v, key);
    else if (key == "holdout_test_fraction") run.holdout_test_fraction = parse_number<double>(v, key);
    else if (key == "threshold") run.threshold = parse_number<double>(v, key);
    else if (key == "std") {
        if (v == "sample") run.std_kind = StdKind::Sample;
        else if (v == "population") run.std_kind = StdKind::Population;
        else throw std::invalid_argument("std must be sample or population");
    }
    else if (key == "setup") run.setup = setup_from_string(v);
    else if (key == "adasyn.k_neighbors") run.adasyn.k_neighbors = parse_number<std::size_t>(v, key);
    else if (key == "adasyn.beta") run.adasyn.beta = parse_number<double>(v, key);
    else if (key == "forest.trees") run.forest.n_trees = parse_number<std::size_t>(v, key);
    else if (key == "forest.max_depth") run.forest.max_depth = parse_optional_count(v, key);
    else if (key == "forest.min_leaf") run.forest.min_leaf = parse_number<std::size_t>(v, key);
    else if (key == "forest.mtry") run.forest.mtry = parse_optional_count(v, key);
    else if (key == "forest.bootstrap") run.forest.bootstrap = parse_bool(v, key);
    else if (key == "forest.threads") run.forest.n_threads = parse_number<std::size_t>(v, key);
    else if (key == "cohort.diagnosis_keyword") cfg.cohort.diagnosis_keyword = v;
    else if (key == "cohort.icd9_prefixes") cfg.cohort.icd9_prefixes = parse_list(v);
    else if (key == "cohort.los_threshold_days") cfg.cohort.los_threshold_days = parse_number<double>(v, key);
    else if (key == "cohort.age_cutoff_years") cfg.cohort.age_cutoff_years = parse_number<double>(v, key);
    else if (key == "cohort.medication_keys") cfg.cohort.medication_keys = parse_list(v);
    else if (key == "cohort.lab_keys") cfg.cohort.lab_keys = parse_list(v);
    else if (key == "synth.n_total") cfg.synth.n_total = parse_number<std::size_t>(v, key);
    else if (key == "synth.n_minority") cfg.synth.n_minority = parse_number<std::size_t>(v, key);
    else if (key == "synth.binary") cfg.synth.n_binary_features = parse_number<std::size_t>(v, key);
    else if (key == "synth.numeric") cfg.synth.n_numeric_features = parse_number<std::size_t>(v, key);
    else if (key == "synth.informative") cfg.synth.n_informative = parse_number<std::size_t>(v, key);
    else if (key == "synth.signal") cfg.synth.signal_strength = parse_number<double>(v, key);
    else if (key == "synth.missing_rate") cfg.synth.missing_rate = parse_number<double>(v, key);
    else if (key == "synth.seed") cfg.synth.seed = parse_number<std::uint64_t>(v, key);
    else if (key.starts_with("schema.")) {
        const auto rest = key.substr(7);
        const auto dot = rest.find('.');
        if (dot == std::string::npos) throw std::invalid_argument("schema key needs table.field: " + key);
        const std::string table = rest.substr(0, dot), field = rest.substr(dot + 1);
        const auto it = cfg.schema.find(table);
        if (it == cfg.schema.end()) throw std::invalid_argument("unknown schema table '" + table + "'");
        if (field == "file") {
            it->second.file = v;
        } else if (it->second.columns.contains(field)) {
            it->second.columns[field] = v;
        } else {
            throw std::invalid_argument("unknown field '" + field + "' for table " + table);
        }
    } else {
        throw std::invalid_argument("unknown key '" + key + "'");
    }
}

}  // namespace

void apply_config(AppConfig& cfg, std::istream& in) {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string t = trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
        }
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        try {
            apply_key(cfg, key, value);
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": " + e.what());
        }
    }
}

void apply_config_file(AppConfig& cfg, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path.string());
    apply_config(cfg, in);
}

}  // namespace leakaudit
