// leakaudit: generate or extract a cohort, run the leakage setups, render tables.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "leakaudit/cohort_etl.hpp"
#include "leakaudit/experiment.hpp"
#include "leakaudit/run_config.hpp"
#include "leakaudit/simd/distance.hpp"
#include "leakaudit/synth_cohort.hpp"
#include "leakaudit/tabular.hpp"

namespace fs = std::filesystem;
using namespace leakaudit;

namespace {

// Flags shared by several subcommands; only the ones given on the command
// line override the config file.
struct Overrides {
    std::optional<std::size_t> folds, repeats, k_neighbors, trees;
    std::optional<std::uint64_t> seed;
    std::optional<double> beta;

    void apply(AppConfig& cfg) const {
        if (folds) cfg.run.folds = *folds;
        if (repeats) cfg.run.repeats = *repeats;
        if (k_neighbors) cfg.run.adasyn.k_neighbors = *k_neighbors;
        if (trees) cfg.run.forest.n_trees = *trees;
        if (seed) cfg.run.master_seed = *seed;
        if (beta) cfg.run.adasyn.beta = *beta;
    }
};

AppConfig load_config(const std::string& path) {
    AppConfig cfg;
    if (!path.empty()) apply_config_file(cfg, path);
    return cfg;
}

std::vector<Setup> parse_setups(const std::string& s) {
    if (s == "all") return {std::begin(kAllSetups), std::end(kAllSetups)};
    return {setup_from_string(s)};
}

void print_summary(const ExperimentReport& r) {
    for (const auto& s : r.setups) {
        std::size_t flagged = 0;
        for (const auto& f : s.folds) flagged += f.contamination.flagged;
        for (const auto& k : s.skipped) flagged += k.contamination.flagged;
        std::cout << setup_name(s.setup) << ": ";
        if (s.auroc) {
            std::printf("AUROC %.4f +/- %.4f", s.auroc->mean, s.auroc->std);
            std::fflush(stdout);
        } else {
            std::cout << "AUROC n/a";
        }
        std::cout << "  folds=" << s.folds.size() << " skipped=" << s.skipped.size()
                  << " contaminated=" << flagged << " synthetic=" << s.synthetic_generated << '\n';
        for (const auto& w : s.warnings) std::cout << "  warning: " << w << '\n';
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Audit train/test leakage from oversampling and imputation"};
    app.require_subcommand(1);

    std::string config_path;
    Overrides ov;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "Key-value config file");
    };
    auto add_run_flags = [&](CLI::App* sub) {
        sub->add_option("--folds", ov.folds, "Number of cross-validation folds");
        sub->add_option("--seed", ov.seed, "Master seed");
        sub->add_option("--repeats", ov.repeats, "Repeat the whole procedure with derived seeds");
        sub->add_option("--beta", ov.beta, "ADASYN balance level in [0, 1]");
        sub->add_option("--k-neighbors", ov.k_neighbors, "ADASYN neighbour count");
        sub->add_option("--trees", ov.trees, "Random forest size");
    };

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic cohort");
    add_common(synth);
    std::string synth_out;
    std::optional<std::uint64_t> synth_seed;
    std::optional<std::size_t> n_total, n_minority, n_binary, n_numeric, n_informative;
    std::optional<double> signal, missing_rate;
    synth->add_option("--out", synth_out, "Output directory (dataset.csv + dataset.json)")->required();
    synth->add_option("--seed", synth_seed, "Generator seed");
    synth->add_option("--n-total", n_total, "Number of patients");
    synth->add_option("--n-minority", n_minority, "Number of long-stay patients");
    synth->add_option("--binary", n_binary, "Number of binary features");
    synth->add_option("--numeric", n_numeric, "Number of numeric features");
    synth->add_option("--informative", n_informative, "Number of informative features");
    synth->add_option("--signal", signal, "Class mean shift of informative features");
    synth->add_option("--missing-rate", missing_rate, "Missing fraction of numeric cells");

    // etl
    auto* etl_cmd = app.add_subcommand("etl", "Extract the cohort from MIMIC-III shaped CSVs");
    add_common(etl_cmd);
    std::string data_dir, etl_out;
    etl_cmd->add_option("--data-dir", data_dir, "Directory with the source CSV tables")->required();
    etl_cmd->add_option("--out", etl_out, "Output directory (cohort.csv + cohort.json)")->required();

    // run
    auto* run = app.add_subcommand("run", "Run one or all setups on a dataset");
    add_common(run);
    add_run_flags(run);
    std::string data_csv, run_out, setup = "all";
    run->add_option("--data", data_csv, "Dataset CSV (with optional JSON sidecar)")->required();
    run->add_option("--setup", setup, "i | ii | iii | holdout | all");
    run->add_option("--out", run_out, "Output directory (report.json + report.md)")->required();

    // report
    auto* report = app.add_subcommand("report", "Render report.json files as a table");
    std::vector<std::string> report_inputs;
    std::string report_out;
    report->add_option("--in", report_inputs, "One or more report.json files")->required();
    report->add_option("--out", report_out, "Output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*synth) {
            AppConfig cfg = load_config(config_path);
            auto& s = cfg.synth;
            if (synth_seed) s.seed = *synth_seed;
            if (n_total) s.n_total = *n_total;
            if (n_minority) s.n_minority = *n_minority;
            if (n_binary) s.n_binary_features = *n_binary;
            if (n_numeric) s.n_numeric_features = *n_numeric;
            if (n_informative) s.n_informative = *n_informative;
            if (signal) s.signal_strength = *signal;
            if (missing_rate) s.missing_rate = *missing_rate;
            const Dataset ds = generate_cohort(s);
            const fs::path path = fs::path(synth_out) / "dataset.csv";
            write_dataset(ds, path);
            const auto counts = ds.class_counts();
            std::cout << "wrote " << path.string() << ": " << ds.rows() << " rows, " << ds.cols()
                      << " features, " << counts[1] << " positives\n";
        } else if (*etl_cmd) {
            AppConfig cfg = load_config(config_path);
            const auto tables = etl::load_tables(data_dir, cfg.schema);
            const auto cohort = etl::extract_cohort(tables, cfg.cohort);
            const Dataset ds = etl::build_dataset(cohort, tables, cfg.cohort);
            const fs::path path = fs::path(etl_out) / "cohort.csv";
            write_dataset(ds, path);
            const auto counts = ds.class_counts();
            std::cout << "wrote " << path.string() << ": " << ds.rows() << " patients, "
                      << counts[1] << " long stays\n";
        } else if (*run) {
            AppConfig cfg = load_config(config_path);
            ov.apply(cfg);
            const Dataset ds = read_dataset(data_csv);
            const auto setups = parse_setups(setup);
            const ExperimentReport r = run_setups(ds, cfg.run, setups);
            const ExperimentReport reports[] = {r};
            render_report(reports, run_out);
            print_summary(r);
            std::cout << "simd backend: " << simd::backend_name(simd::active_backend()) << '\n';
            std::cout << "wrote " << (fs::path(run_out) / "report.json").string() << '\n';
        } else if (*report) {
            std::vector<ExperimentReport> reports;
            for (const auto& in_path : report_inputs) {
                std::ifstream in(in_path);
                if (!in) throw std::runtime_error("cannot open " + in_path);
                reports.push_back(report_from_json(nlohmann::json::parse(in)));
            }
            render_report(reports, report_out);
            std::cout << render_table(reports);
        }
    } catch (const std::exception& e) {
        std::cerr << "leakaudit: error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
