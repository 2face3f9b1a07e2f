#include "leakaudit/experiment.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "leakaudit/seeding.hpp"

namespace leakaudit {

const char* setup_name(Setup s) noexcept {
    switch (s) {
        case Setup::AfterPartitioning: return "after_partitioning";
        case Setup::NoOversampling: return "no_oversampling";
        case Setup::BeforePartitioning: return "before_partitioning";
        case Setup::LeakyHoldout: return "leaky_holdout";
    }
    return "unknown";
}

const char* setup_label(Setup s) noexcept {
    switch (s) {
        case Setup::AfterPartitioning: return "(i) imputation + oversampling *after* partitioning";
        case Setup::NoOversampling: return "(ii) *no* oversampling";
        case Setup::BeforePartitioning: return "(iii) imputation + oversampling *before* partitioning";
        case Setup::LeakyHoldout: return "70%/30% holdout, oversampled before splitting";
    }
    return "unknown";
}

Setup setup_from_string(const std::string& s) {
    if (s == "i" || s == "after_partitioning") return Setup::AfterPartitioning;
    if (s == "ii" || s == "no_oversampling") return Setup::NoOversampling;
    if (s == "iii" || s == "before_partitioning") return Setup::BeforePartitioning;
    if (s == "holdout" || s == "leaky_holdout") return Setup::LeakyHoldout;
    throw std::invalid_argument("unknown setup '" + s + "'");
}

void RunConfig::validate() const {
    if (folds < 2) throw std::invalid_argument("run: folds must be >= 2");
    if (!(holdout_test_fraction > 0.0 && holdout_test_fraction < 1.0)) {
        throw std::invalid_argument("run: holdout test fraction must be in (0, 1)");
    }
    if (repeats < 1) throw std::invalid_argument("run: repeats must be >= 1");
    adasyn.validate();
    forest.validate();
}

std::uint64_t RunSeeds::fold_plan(std::uint64_t master, std::size_t repeat) {
    return derive_seed(master, "run.folds", repeat);
}
std::uint64_t RunSeeds::holdout(std::uint64_t master, std::size_t repeat) {
    return derive_seed(master, "run.holdout", repeat);
}
std::uint64_t RunSeeds::adasyn(std::uint64_t master, std::size_t repeat, std::size_t fold) {
    return derive_seed(master, "run.adasyn", repeat, fold);
}
std::uint64_t RunSeeds::forest(std::uint64_t master, std::size_t repeat, std::size_t fold) {
    return derive_seed(master, "run.forest", repeat, fold);
}

DatasetFingerprint fingerprint(const Dataset& ds) {
    DatasetFingerprint f;
    f.rows = ds.rows();
    f.cols = ds.cols();
    for (const auto& c : ds.columns()) {
        (c.kind == ColumnKind::Binary ? f.binary_columns : f.numeric_columns)++;
    }
    f.class_counts = ds.class_counts();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            h ^= (v >> (8 * i)) & 0xff;
            h *= 0x100000001b3ULL;
        }
    };
    for (double v : ds.values()) {
        if (is_missing(v)) {
            ++f.missing_cells;
            mix(0x7ff8000000000000ULL);
        } else {
            mix(std::bit_cast<std::uint64_t>(v == 0.0 ? 0.0 : v));
        }
    }
    for (auto l : ds.labels()) mix(l);
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    f.content_hash = buf;
    return f;
}

namespace {

void check_input(const Dataset& ds) {
    for (auto p : ds.provenance()) {
        if (p != Provenance::Original) {
            throw std::invalid_argument("run: input dataset already contains synthetic rows");
        }
    }
    const auto counts = ds.class_counts();
    if (counts[0] == 0 || counts[1] == 0) {
        throw std::invalid_argument("run: dataset must contain both classes");
    }
}

ForestConfig forest_for(const RunConfig& cfg, std::size_t repeat, std::size_t fold) {
    ForestConfig f = cfg.forest;
    f.seed = RunSeeds::forest(cfg.master_seed, repeat, fold);
    return f;
}

AdasynConfig adasyn_for(const RunConfig& cfg, std::size_t repeat, std::size_t fold) {
    AdasynConfig a = cfg.adasyn;
    a.seed = RunSeeds::adasyn(cfg.master_seed, repeat, fold);
    return a;
}

// Scores `test_rows` of `eval` with `model` and fills in a fold result, or a
// skipped entry when the test rows hold a single class.
void score_fold(SetupReport& rep, const RunConfig& cfg, const ForestModel& model,
                const Dataset& eval, std::span<const RowIndex> test_rows,
                std::array<std::size_t, 2> original_counts, std::size_t repeat, std::size_t fold) {
    const auto scores = predict_proba(model, eval, test_rows);
    std::vector<std::uint8_t> labels;
    std::vector<Provenance> prov;
    for (RowIndex r : test_rows) {
        labels.push_back(static_cast<std::uint8_t>(eval.label(r)));
        prov.push_back(eval.provenance(r));
    }
    const auto contamination = contamination_check(prov, labels, original_counts);
    try {
        FoldResult fr;
        fr.repeat = repeat;
        fr.fold = fold;
        fr.auroc = auroc(scores, labels);
        fr.confusion = confusion_matrix(scores, labels, cfg.threshold);
        fr.contamination = contamination;
        rep.folds.push_back(fr);
    } catch (const UndefinedAuroc&) {
        rep.skipped.push_back({repeat, fold, "test rows contain a single class", contamination});
    }
}

void finish(SetupReport& rep, const RunConfig& cfg) {
    std::vector<double> values;
    for (const auto& f : rep.folds) values.push_back(f.auroc);
    if (!values.empty()) rep.auroc = summarize(values, cfg.std_kind);
}

SetupReport run_inside_folds(const Dataset& ds, const RunConfig& cfg, bool oversample,
                             const FoldObserver& observer) {
    SetupReport rep;
    rep.setup = oversample ? Setup::AfterPartitioning : Setup::NoOversampling;
    const auto original_counts = ds.class_counts();
    for (std::size_t repeat = 0; repeat < cfg.repeats; ++repeat) {
        const FoldPlan plan =
            stratified_kfold(ds.labels(), cfg.folds, RunSeeds::fold_plan(cfg.master_seed, repeat));
        if (repeat == 0) rep.warnings = plan.warnings;
        for (std::size_t fold = 0; fold < plan.k; ++fold) {
            const RowSet train = plan.train_rows(fold);
            const RowSet& test = plan.folds[fold];
            const ImputerModel imputer = fit_imputer(ds, train);
            const Dataset imputed = apply_imputer(ds, imputer);
            if (observer) observer({rep.setup, repeat, fold, imputer, imputed, train, test});

            ForestModel model;
            if (oversample) {
                const auto train_counts = imputed.class_counts(train);
                if (train_counts[0] == 0 || train_counts[1] == 0) {
                    rep.skipped.push_back({repeat, fold, "training rows contain a single class", {}});
                    continue;
                }
                const Dataset augmented = adasyn(imputed, train, adasyn_for(cfg, repeat, fold));
                rep.synthetic_generated += augmented.rows() - train.size();
                model = train_forest(augmented, augmented.all_rows(), forest_for(cfg, repeat, fold));
            } else {
                model = train_forest(imputed, train, forest_for(cfg, repeat, fold));
            }
            score_fold(rep, cfg, model, imputed, test, original_counts, repeat, fold);
        }
    }
    finish(rep, cfg);
    return rep;
}

// Impute and oversample the whole dataset, as the leaky pipelines do.
Dataset balance_everything(const Dataset& ds, const RunConfig& cfg, std::size_t repeat,
                           ImputerModel& imputer, std::size_t& generated) {
    const RowSet all = ds.all_rows();
    imputer = fit_imputer(ds, all);
    const Dataset imputed = apply_imputer(ds, imputer);
    Dataset augmented =
        adasyn(imputed, all, adasyn_for(cfg, repeat, RunSeeds::kWholeDataset));
    generated += augmented.rows() - imputed.rows();
    return augmented;
}

SetupReport run_before_partitioning(const Dataset& ds, const RunConfig& cfg,
                                    const FoldObserver& observer) {
    SetupReport rep;
    rep.setup = Setup::BeforePartitioning;
    const auto original_counts = ds.class_counts();
    for (std::size_t repeat = 0; repeat < cfg.repeats; ++repeat) {
        ImputerModel imputer;
        const Dataset augmented = balance_everything(ds, cfg, repeat, imputer, rep.synthetic_generated);
        const FoldPlan plan = stratified_kfold(augmented.labels(), cfg.folds,
                                               RunSeeds::fold_plan(cfg.master_seed, repeat));
        if (repeat == 0) rep.warnings = plan.warnings;
        for (std::size_t fold = 0; fold < plan.k; ++fold) {
            const RowSet train = plan.train_rows(fold);
            const RowSet& test = plan.folds[fold];
            if (observer) observer({rep.setup, repeat, fold, imputer, augmented, train, test});
            const ForestModel model = train_forest(augmented, train, forest_for(cfg, repeat, fold));
            score_fold(rep, cfg, model, augmented, test, original_counts, repeat, fold);
        }
    }
    finish(rep, cfg);
    return rep;
}

}  // namespace

ExperimentReport run_setup(const Dataset& ds, const RunConfig& cfg, const FoldObserver& observer) {
    if (cfg.setup == Setup::LeakyHoldout) return run_leaky_holdout(ds, cfg, observer);
    cfg.validate();
    check_input(ds);
    ExperimentReport out{cfg, fingerprint(ds), {}};
    switch (cfg.setup) {
        case Setup::AfterPartitioning:
            out.setups.push_back(run_inside_folds(ds, cfg, true, observer));
            break;
        case Setup::NoOversampling:
            out.setups.push_back(run_inside_folds(ds, cfg, false, observer));
            break;
        case Setup::BeforePartitioning:
            out.setups.push_back(run_before_partitioning(ds, cfg, observer));
            break;
        case Setup::LeakyHoldout:
            break;
    }
    return out;
}

ExperimentReport run_leaky_holdout(const Dataset& ds, const RunConfig& cfg,
                                   const FoldObserver& observer) {
    cfg.validate();
    check_input(ds);
    RunConfig echo = cfg;
    echo.setup = Setup::LeakyHoldout;
    ExperimentReport out{echo, fingerprint(ds), {}};

    SetupReport rep;
    rep.setup = Setup::LeakyHoldout;
    const auto original_counts = ds.class_counts();
    for (std::size_t repeat = 0; repeat < cfg.repeats; ++repeat) {
        ImputerModel imputer;
        const Dataset augmented = balance_everything(ds, cfg, repeat, imputer, rep.synthetic_generated);
        const auto [train, test] = stratified_holdout(augmented.labels(), cfg.holdout_test_fraction,
                                                      RunSeeds::holdout(cfg.master_seed, repeat));
        if (observer) observer({rep.setup, repeat, 0, imputer, augmented, train, test});
        const ForestModel model = train_forest(augmented, train, forest_for(cfg, repeat, 0));
        score_fold(rep, cfg, model, augmented, test, original_counts, repeat, 0);
    }
    finish(rep, cfg);
    out.setups.push_back(std::move(rep));
    return out;
}

ExperimentReport run_setups(const Dataset& ds, const RunConfig& cfg, std::span<const Setup> setups,
                            const FoldObserver& observer) {
    if (setups.empty()) throw std::invalid_argument("run: no setups requested");
    ExperimentReport out;
    for (std::size_t i = 0; i < setups.size(); ++i) {
        RunConfig c = cfg;
        c.setup = setups[i];
        ExperimentReport r = run_setup(ds, c, observer);
        if (i == 0) {
            out.config = cfg;
            out.config.setup = setups[0];
            out.dataset = r.dataset;
        }
        for (auto& s : r.setups) out.setups.push_back(std::move(s));
    }
    return out;
}

// ---------------------------------------------------------------- JSON

namespace {

using ojson = nlohmann::ordered_json;

ojson contamination_json(const ContaminationReport& c) {
    return {{"synthetic_rows_in_eval", c.synthetic_rows_in_eval},
            {"eval_class_counts", c.eval_class_counts},
            {"original_class_counts", c.original_class_counts},
            {"flagged", c.flagged}};
}

ContaminationReport contamination_from(const nlohmann::json& j) {
    ContaminationReport c;
    c.synthetic_rows_in_eval = j.at("synthetic_rows_in_eval").get<std::size_t>();
    c.eval_class_counts = j.at("eval_class_counts").get<std::array<std::size_t, 2>>();
    c.original_class_counts = j.at("original_class_counts").get<std::array<std::size_t, 2>>();
    c.flagged = j.at("flagged").get<bool>();
    return c;
}

ojson config_json(const RunConfig& c) {
    ojson forest = {{"n_trees", c.forest.n_trees},
                    {"max_depth", c.forest.max_depth ? ojson(*c.forest.max_depth) : ojson(nullptr)},
                    {"min_leaf", c.forest.min_leaf},
                    {"mtry", c.forest.mtry ? ojson(*c.forest.mtry) : ojson(nullptr)},
                    {"bootstrap", c.forest.bootstrap}};
    return {{"folds", c.folds},
            {"holdout_test_fraction", c.holdout_test_fraction},
            {"master_seed", c.master_seed},
            {"repeats", c.repeats},
            {"threshold", c.threshold},
            {"std", c.std_kind == StdKind::Sample ? "sample" : "population"},
            {"adasyn", {{"k_neighbors", c.adasyn.k_neighbors}, {"beta", c.adasyn.beta}}},
            {"forest", forest}};
}

RunConfig config_from(const nlohmann::json& j) {
    RunConfig c;
    c.folds = j.at("folds").get<std::size_t>();
    c.holdout_test_fraction = j.at("holdout_test_fraction").get<double>();
    c.master_seed = j.at("master_seed").get<std::uint64_t>();
    c.repeats = j.at("repeats").get<std::size_t>();
    c.threshold = j.at("threshold").get<double>();
    c.std_kind = j.at("std").get<std::string>() == "population" ? StdKind::Population : StdKind::Sample;
    c.adasyn.k_neighbors = j.at("adasyn").at("k_neighbors").get<std::size_t>();
    c.adasyn.beta = j.at("adasyn").at("beta").get<double>();
    const auto& f = j.at("forest");
    c.forest.n_trees = f.at("n_trees").get<std::size_t>();
    if (!f.at("max_depth").is_null()) c.forest.max_depth = f.at("max_depth").get<std::size_t>();
    c.forest.min_leaf = f.at("min_leaf").get<std::size_t>();
    if (!f.at("mtry").is_null()) c.forest.mtry = f.at("mtry").get<std::size_t>();
    c.forest.bootstrap = f.at("bootstrap").get<bool>();
    return c;
}

ojson fingerprint_json(const DatasetFingerprint& f) {
    return {{"rows", f.rows},
            {"cols", f.cols},
            {"binary_columns", f.binary_columns},
            {"numeric_columns", f.numeric_columns},
            {"class_counts", f.class_counts},
            {"missing_cells", f.missing_cells},
            {"content_hash", f.content_hash}};
}

DatasetFingerprint fingerprint_from(const nlohmann::json& j) {
    DatasetFingerprint f;
    f.rows = j.at("rows").get<std::size_t>();
    f.cols = j.at("cols").get<std::size_t>();
    f.binary_columns = j.at("binary_columns").get<std::size_t>();
    f.numeric_columns = j.at("numeric_columns").get<std::size_t>();
    f.class_counts = j.at("class_counts").get<std::array<std::size_t, 2>>();
    f.missing_cells = j.at("missing_cells").get<std::size_t>();
    f.content_hash = j.at("content_hash").get<std::string>();
    return f;
}

ojson setup_json(const SetupReport& s) {
    ojson folds = ojson::array();
    for (const auto& f : s.folds) {
        folds.push_back({{"repeat", f.repeat},
                         {"fold", f.fold},
                         {"auroc", f.auroc},
                         {"confusion",
                          {{"tp", f.confusion.tp}, {"fp", f.confusion.fp},
                           {"tn", f.confusion.tn}, {"fn", f.confusion.fn}}},
                         {"contamination", contamination_json(f.contamination)}});
    }
    ojson skipped = ojson::array();
    for (const auto& k : s.skipped) {
        skipped.push_back({{"repeat", k.repeat},
                           {"fold", k.fold},
                           {"reason", k.reason},
                           {"contamination", contamination_json(k.contamination)}});
    }
    return {{"name", setup_name(s.setup)},
            {"folds", folds},
            {"mean_auroc", s.auroc ? ojson(s.auroc->mean) : ojson(nullptr)},
            {"std_auroc", s.auroc ? ojson(s.auroc->std) : ojson(nullptr)},
            {"skipped", skipped},
            {"warnings", s.warnings},
            {"synthetic_generated", s.synthetic_generated}};
}

SetupReport setup_from(const nlohmann::json& j) {
    SetupReport s;
    s.setup = setup_from_string(j.at("name").get<std::string>());
    for (const auto& f : j.at("folds")) {
        FoldResult r;
        r.repeat = f.at("repeat").get<std::size_t>();
        r.fold = f.at("fold").get<std::size_t>();
        r.auroc = f.at("auroc").get<double>();
        const auto& c = f.at("confusion");
        r.confusion = {c.at("tp").get<std::size_t>(), c.at("fp").get<std::size_t>(),
                       c.at("tn").get<std::size_t>(), c.at("fn").get<std::size_t>()};
        r.contamination = contamination_from(f.at("contamination"));
        s.folds.push_back(r);
    }
    if (!j.at("mean_auroc").is_null()) {
        s.auroc = Summary{j.at("mean_auroc").get<double>(), j.at("std_auroc").get<double>()};
    }
    for (const auto& k : j.at("skipped")) {
        s.skipped.push_back({k.at("repeat").get<std::size_t>(), k.at("fold").get<std::size_t>(),
                             k.at("reason").get<std::string>(),
                             contamination_from(k.at("contamination"))});
    }
    if (j.contains("warnings")) s.warnings = j.at("warnings").get<std::vector<std::string>>();
    if (j.contains("synthetic_generated")) {
        s.synthetic_generated = j.at("synthetic_generated").get<std::size_t>();
    }
    return s;
}

int setup_rank(Setup s) {
    return static_cast<int>(s);
}

std::vector<const SetupReport*> ordered_setups(std::span<const ExperimentReport> reports) {
    std::vector<const SetupReport*> all;
    for (const auto& r : reports) {
        for (const auto& s : r.setups) all.push_back(&s);
    }
    std::stable_sort(all.begin(), all.end(), [](auto* a, auto* b) {
        return setup_rank(a->setup) < setup_rank(b->setup);
    });
    return all;
}

}  // namespace

nlohmann::ordered_json to_json(const ExperimentReport& r) {
    ojson setups = ojson::array();
    for (const auto& s : r.setups) setups.push_back(setup_json(s));
    return {{"config", config_json(r.config)},
            {"dataset_fingerprint", fingerprint_json(r.dataset)},
            {"setups", setups}};
}

ExperimentReport report_from_json(const nlohmann::json& j) {
    ExperimentReport r;
    r.config = config_from(j.at("config"));
    r.dataset = fingerprint_from(j.at("dataset_fingerprint"));
    for (const auto& s : j.at("setups")) r.setups.push_back(setup_from(s));
    if (!r.setups.empty()) r.config.setup = r.setups.front().setup;
    return r;
}

nlohmann::ordered_json merged_json(std::span<const ExperimentReport> reports) {
    if (reports.empty()) throw std::invalid_argument("report: no experiment reports");
    ojson setups = ojson::array();
    for (const SetupReport* s : ordered_setups(reports)) setups.push_back(setup_json(*s));
    return {{"config", config_json(reports.front().config)},
            {"dataset_fingerprint", fingerprint_json(reports.front().dataset)},
            {"setups", setups}};
}

std::string render_table(std::span<const ExperimentReport> reports) {
    if (reports.empty()) throw std::invalid_argument("report: no experiment reports");
    std::ostringstream out;
    out << "| Method | AUROC (in %) |\n";
    out << "|---|---|\n";
    for (const SetupReport* s : ordered_setups(reports)) {
        out << "| " << setup_label(s->setup) << " | ";
        if (s->auroc) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.2f ± %.2f", 100.0 * s->auroc->mean,
                          100.0 * s->auroc->std);
            out << buf;
        } else {
            out << "n/a";
        }
        out << " |\n";
    }
    return out.str();
}

void render_report(std::span<const ExperimentReport> reports, const std::filesystem::path& out_dir) {
    const auto json = merged_json(reports);
    const auto table = render_table(reports);
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw std::runtime_error("cannot create " + out_dir.string() + ": " + ec.message());

    const auto json_path = out_dir / "report.json";
    std::ofstream js(json_path, std::ios::binary);
    if (!js) throw std::runtime_error("cannot write " + json_path.string());
    js << json.dump(2) << '\n';
    if (!js) throw std::runtime_error("write failed for " + json_path.string());

    const auto md_path = out_dir / "report.md";
    std::ofstream md(md_path, std::ios::binary);
    if (!md) throw std::runtime_error("cannot write " + md_path.string());
    md << table;
    if (!md) throw std::runtime_error("write failed for " + md_path.string());
}

}  // namespace leakaudit
