// Exit-gate suite. Prints one PASS/FAIL line per criterion and returns
// nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>

#include "leakaudit/cohort_etl.hpp"
#include "leakaudit/evaluation.hpp"
#include "leakaudit/experiment.hpp"
#include "leakaudit/model.hpp"
#include "leakaudit/resampling.hpp"
#include "leakaudit/seeding.hpp"
#include "leakaudit/synth_cohort.hpp"

using namespace leakaudit;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

int failures = 0;

void report(int id, const char* title, const std::function<Outcome()>& body) {
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s  %d. %s", o.pass ? "PASS" : "FAIL", id, title);
    if (!o.detail.empty()) std::printf("  [%s]", o.detail.c_str());
    std::printf("\n");
    std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

Dataset cohort_112_10() {
    SynthConfig s;
    s.n_total = 112;
    s.n_minority = 10;
    s.signal_strength = 1.0;
    s.missing_rate = 0.1;
    return generate_cohort(s);
}

Outcome leakage_gap() {
    const Dataset ds = cohort_112_10();
    const auto start = std::chrono::steady_clock::now();
    int good = 0;
    std::string detail;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        RunConfig cfg;
        cfg.folds = 10;
        cfg.adasyn.beta = 1.0;
        cfg.master_seed = seed;
        const Setup setups[] = {Setup::AfterPartitioning, Setup::BeforePartitioning};
        const auto rep = run_setups(ds, cfg, setups);
        const Summary after = rep.setups.at(0).auroc.value();
        const Summary before = rep.setups.at(1).auroc.value();
        const bool ok = before.mean >= 0.95 && before.std <= 0.05 && before.mean - after.mean >= 0.05;
        good += ok;
        detail += fmt("%sseed %llu: iii %.4f±%.4f vs i %.4f±%.4f%s", seed ? "; " : "",
                      static_cast<unsigned long long>(seed), before.mean, before.std, after.mean,
                      after.std, ok ? "" : " (miss)");
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    detail += fmt("; %d/5 seeds; %.2f s", good, secs);
    return {good >= 4 && secs < 60.0, detail};
}

Outcome majority_identity() {
    std::vector<std::uint8_t> y(119, 0);
    std::fill(y.begin() + 104, y.end(), 1);
    const auto b = majority_baseline(y);
    const double expect = 104.0 / 119.0;
    return {b.predicted_class == 0 && std::abs(b.accuracy - expect) <= 1e-12,
            fmt("accuracy %.15f", b.accuracy)};
}

Outcome auroc_oracle() {
    Rng rng(derive_seed(2024, "acceptance.auroc"));
    double worst = 0.0;
    for (int t = 0; t < 1000; ++t) {
        const std::size_t n = 2 + rng.below(11);
        std::vector<double> s(n);
        std::vector<std::uint8_t> y(n);
        const bool ties = rng.bernoulli(0.5);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = ties ? static_cast<double>(rng.below(4)) / 4.0 : rng.uniform01();
            y[i] = static_cast<std::uint8_t>(rng.below(2));
        }
        const std::size_t neg = rng.below(n);
        y[neg] = 0;
        y[(neg + 1 + rng.below(n - 1)) % n] = 1;
        double wins = 0.0;
        std::size_t pairs = 0;
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t b = 0; b < n; ++b) {
                if (y[a] != 1 || y[b] != 0) continue;
                ++pairs;
                wins += s[a] > s[b] ? 1.0 : (s[a] == s[b] ? 0.5 : 0.0);
            }
        }
        worst = std::max(worst, std::abs(auroc(s, y) - wins / static_cast<double>(pairs)));
    }
    return {worst <= 1e-12, fmt("1000 instances, max |diff| %.3g", worst)};
}

Dataset random_imbalanced(Rng& rng, std::size_t n0, std::size_t n1, std::size_t p) {
    std::vector<Column> cols;
    for (std::size_t j = 0; j < p; ++j) {
        cols.push_back({"f" + std::to_string(j), j % 3 == 0 ? ColumnKind::Binary : ColumnKind::Numeric});
    }
    Dataset ds(cols);
    std::vector<double> row(p);
    for (std::size_t i = 0; i < n0 + n1; ++i) {
        const int label = i < n1 ? 1 : 0;
        for (std::size_t j = 0; j < p; ++j) {
            row[j] = cols[j].kind == ColumnKind::Binary ? (rng.bernoulli(0.5) ? 1.0 : 0.0)
                                                        : rng.normal() * 3.0 + label;
        }
        ds.add_row(row, label);
    }
    return ds;
}

Outcome adasyn_exactness() {
    Rng rng(derive_seed(2024, "acceptance.adasyn"));
    std::size_t bad = 0;
    for (int t = 0; t < 200; ++t) {
        const std::size_t n1 = 1 + rng.below(20);
        const std::size_t n0 = n1 + 1 + rng.below(60);
        const Dataset ds = random_imbalanced(rng, n0, n1, 1 + rng.below(8));
        AdasynConfig cfg;
        cfg.k_neighbors = 1 + rng.below(8);
        cfg.beta = rng.bernoulli(0.5) ? 1.0 : rng.uniform01();
        cfg.seed = rng.next();
        const auto res = adasyn_detailed(ds, ds.all_rows(), cfg);
        const auto g = static_cast<std::size_t>(std::llround(cfg.beta * static_cast<double>(n0 - n1)));
        if (res.data.class_counts()[1] != n1 + g) ++bad;
        for (std::size_t s = 0; s < res.trace.samples.size(); ++s) {
            const auto& smp = res.trace.samples[s];
            for (std::size_t c = 0; c < ds.cols(); ++c) {
                const double a = ds.at(smp.seed, c), b = ds.at(smp.partner, c);
                const double out = res.data.at(ds.rows() + s, c);
                const bool between = ds.column(c).kind == ColumnKind::Binary
                                         ? (out == a || out == b)
                                         : (out >= std::min(a, b) && out <= std::max(a, b));
                if (!between || smp.lambda < 0.0 || smp.lambda > 1.0) ++bad;
            }
        }
    }
    // balanced input comes back unchanged
    const Dataset even = random_imbalanced(rng, 9, 9, 4);
    const bool balanced_ok = adasyn(even, even.all_rows(), {}) == even;
    const Dataset big = random_imbalanced(rng, 104, 15, 6);
    const Dataset grown = adasyn(big, big.all_rows(), {});
    const bool size_ok = grown.rows() == 208 && grown.class_counts()[1] == 104;
    return {bad == 0 && balanced_ok && size_ok,
            fmt("200 datasets, %zu violations; balanced identity %s; 104/15 -> %zu rows", bad,
                balanced_ok ? "ok" : "broken", grown.rows())};
}

Outcome stratification() {
    const Dataset ds = cohort_112_10();
    const auto plan = stratified_kfold(ds.labels(), 10, 7);
    bool one_each = plan.folds.size() == 10;
    for (const auto& f : plan.folds) {
        std::size_t pos = 0;
        for (auto r : f) pos += ds.label(r);
        one_each = one_each && pos == 1;
    }
    Rng rng(derive_seed(2024, "acceptance.folds"));
    std::size_t bad = 0;
    for (int t = 0; t < 500; ++t) {
        const std::size_t n = 4 + rng.below(200);
        std::vector<std::uint8_t> y(n);
        for (auto& v : y) v = rng.bernoulli(0.25) ? 1 : 0;
        y[0] = 0;
        y[1] = 1;
        const std::size_t k = 2 + rng.below(std::min<std::size_t>(n - 1, 15));
        const auto p = stratified_kfold(y, k, rng.next());
        std::size_t lo[2] = {n, n}, hi[2] = {0, 0};
        for (const auto& f : p.folds) {
            std::size_t c[2] = {0, 0};
            for (auto r : f) ++c[y[r]];
            for (int cl = 0; cl < 2; ++cl) {
                lo[cl] = std::min(lo[cl], c[cl]);
                hi[cl] = std::max(hi[cl], c[cl]);
            }
        }
        if (hi[0] - lo[0] > 1 || hi[1] - lo[1] > 1) ++bad;
    }
    return {one_each && bad == 0,
            fmt("10-positive cohort one per fold: %s; 500 random plans, %zu imbalanced", one_each ? "yes" : "no", bad)};
}

Outcome contamination() {
    std::size_t leaky_unflagged = 0, correct_flagged = 0, leaky_runs = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        SynthConfig s;
        s.seed = seed;
        const Dataset ds = generate_cohort(s);
        RunConfig cfg;
        cfg.master_seed = seed;
        const auto rep = run_setups(ds, cfg, kAllSetups);
        for (const auto& sr : rep.setups) {
            std::size_t flagged = 0;
            for (const auto& f : sr.folds) flagged += f.contamination.flagged;
            for (const auto& k : sr.skipped) flagged += k.contamination.flagged;
            const bool leaky = sr.setup == Setup::BeforePartitioning || sr.setup == Setup::LeakyHoldout;
            if (leaky && sr.synthetic_generated > 0) {
                ++leaky_runs;
                if (flagged == 0) ++leaky_unflagged;
            }
            if (!leaky && flagged > 0) ++correct_flagged;
        }
    }
    return {leaky_unflagged == 0 && correct_flagged == 0 && leaky_runs == 40,
            fmt("20 seeds: %zu/%zu leaky runs flagged, %zu correct runs flagged",
                leaky_runs - leaky_unflagged, leaky_runs, correct_flagged)};
}

Outcome train_only_imputation() {
    // 4-row fixture: rows 0-1 train, rows 2-3 test
    Dataset four({{"lab", ColumnKind::Numeric}, {"med", ColumnKind::Binary}});
    four.add_row(std::vector<double>{1.0, 1.0}, 0);
    four.add_row(std::vector<double>{3.0, 0.0}, 1);
    four.add_row(std::vector<double>{kMissing, 1.0}, 0);
    four.add_row(std::vector<double>{10.0, 0.0}, 1);
    const RowSet train{0, 1};
    const auto base = fit_imputer(four, train);
    bool fixture_ok = base.fill == std::vector<double>{2.0, 0.0};
    for (double v : {-50.0, 0.0, 1.0, 1e9}) {
        Dataset p = four;
        p.set(2, 0, v);
        p.set(3, 0, v);
        p.set(3, 1, 1.0);
        fixture_ok = fixture_ok && fit_imputer(p, train).fill == base.fill;
    }

    Rng rng(derive_seed(2024, "acceptance.impute"));
    std::size_t changed = 0, checks = 0;
    for (int t = 0; t < 50; ++t) {
        SynthConfig s;
        s.n_total = 40 + rng.below(40);
        s.n_minority = 6 + rng.below(6);
        s.n_binary_features = 3;
        s.n_numeric_features = 4;
        s.n_informative = 3;
        s.missing_rate = 0.2;
        s.seed = rng.next();
        const Dataset ds = generate_cohort(s);
        RunConfig cfg;
        cfg.setup = t % 2 ? Setup::NoOversampling : Setup::AfterPartitioning;
        cfg.folds = 5;
        cfg.forest.n_trees = 5;
        cfg.master_seed = rng.next();

        std::vector<std::vector<double>> fills;
        std::vector<RowSet> tests;
        run_setup(ds, cfg, [&](const FoldTrace& tr) {
            fills.push_back(tr.imputer.fill);
            tests.emplace_back(tr.test_rows.begin(), tr.test_rows.end());
        });
        const std::size_t fold = rng.below(fills.size());
        Dataset perturbed = ds;
        const RowIndex r = tests[fold][rng.below(tests[fold].size())];
        const std::size_t c = rng.below(ds.cols());
        if (ds.column(c).kind == ColumnKind::Binary) {
            perturbed.set(r, c, ds.at(r, c) == 1.0 ? 0.0 : 1.0);
        } else {
            perturbed.set(r, c, is_missing(ds.at(r, c)) ? 1e6 : kMissing);
        }
        std::vector<double> after;
        run_setup(perturbed, cfg, [&](const FoldTrace& tr) {
            if (tr.fold == fold) after = tr.imputer.fill;
        });
        ++checks;
        if (after != fills[fold]) ++changed;
    }
    return {fixture_ok && changed == 0,
            fmt("4-row fixture %s; %zu/%zu randomized perturbations changed the imputer",
                fixture_ok ? "ok" : "broken", changed, checks)};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome determinism() {
    const auto dir = fs::temp_directory_path() / "leakaudit_acceptance_det";
    fs::remove_all(dir);
    const std::string d = dir.string();
    const std::string exe = std::string("\"") + LEAKAUDIT_CLI + "\"";
    auto sh = [](const std::string& cmd) { return std::system((cmd + " > /dev/null 2>&1").c_str()); };
    if (sh(exe + " synth --out " + d + "/data --seed 11") != 0) return {false, "synth failed"};
    const std::string run = exe + " run --data " + d + "/data/dataset.csv --setup all --seed 5";
    if (sh(run + " --out " + d + "/a") != 0 || sh(run + " --out " + d + "/b") != 0) {
        return {false, "run failed"};
    }
    const std::string a = slurp(dir / "a" / "report.json");
    const std::string b = slurp(dir / "b" / "report.json");
    fs::remove_all(dir);
    return {!a.empty() && a == b, fmt("report.json %zu bytes, identical: %s", a.size(), a == b ? "yes" : "no")};
}

Outcome etl_fixture() {
    const fs::path dir = fs::path(LEAKAUDIT_FIXTURES) / "mimic12";
    const auto tables = etl::load_tables(dir);
    etl::CohortConfig cfg;
    cfg.medication_keys = {"heparin", "insulin"};
    cfg.lab_keys = {"Heart Rate", "glucose"};
    const auto cohort = etl::extract_cohort(tables, cfg);
    std::vector<std::int64_t> ids;
    for (const auto& r : cohort.rows) ids.push_back(r.subject_id);
    const std::vector<std::int64_t> expected{2, 5, 7, 8, 9};
    const auto& a = cohort.attrition;
    // every rule removes someone on this fixture
    const bool rules = a.admissions_after_expire_filter < a.admissions_total &&
                       a.subjects_with_keyword < a.subjects_after_expire_filter &&
                       a.subjects_with_icd9 < a.subjects_with_icu_stay;
    std::string got;
    for (auto id : ids) got += (got.empty() ? "" : ",") + std::to_string(id);
    return {ids == expected && rules,
            fmt("retained {%s}; attrition %zu/%zu/%zu/%zu/%zu/%zu", got.c_str(), a.admissions_total,
                a.admissions_after_expire_filter, a.subjects_after_expire_filter,
                a.subjects_with_keyword, a.subjects_with_icu_stay, a.subjects_with_icd9)};
}

}  // namespace

int main() {
    report(1, "leakage gap on the 112/10 synthetic cohort", leakage_gap);
    report(2, "majority-baseline accuracy 104/119", majority_identity);
    report(3, "AUROC equals the pair-counting oracle", auroc_oracle);
    report(4, "ADASYN counts, betweenness, identity, 104/15 -> 208", adasyn_exactness);
    report(5, "stratified folds", stratification);
    report(6, "contamination detection", contamination);
    report(7, "train-only imputation", train_only_imputation);
    report(8, "byte-identical CLI reports", determinism);
    report(9, "ETL fixture subject set", etl_fixture);
    std::printf("%s: %d failed\n", failures ? "FAIL" : "PASS", failures);
    return failures ? 1 : 0;
}
