#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "leakaudit/resampling.hpp"
#include "leakaudit/seeding.hpp"

using namespace leakaudit;

namespace {

Dataset points(const std::vector<std::pair<std::vector<double>, int>>& rows,
               std::vector<ColumnKind> kinds = {}) {
    const std::size_t p = rows.front().first.size();
    if (kinds.empty()) kinds.assign(p, ColumnKind::Numeric);
    std::vector<Column> cols;
    for (std::size_t j = 0; j < p; ++j) cols.push_back({"x" + std::to_string(j), kinds[j]});
    Dataset ds(cols);
    for (const auto& [x, y] : rows) ds.add_row(x, y);
    return ds;
}

Dataset counts_dataset(std::size_t n0, std::size_t n1, Rng& rng, std::size_t p = 3) {
    std::vector<Column> cols;
    for (std::size_t j = 0; j < p; ++j) {
        cols.push_back({"c" + std::to_string(j), j == 0 ? ColumnKind::Binary : ColumnKind::Numeric});
    }
    Dataset ds(cols);
    std::vector<double> row(p);
    for (std::size_t i = 0; i < n0 + n1; ++i) {
        const int y = i < n0 ? 0 : 1;
        row[0] = rng.bernoulli(y ? 0.7 : 0.3) ? 1.0 : 0.0;
        for (std::size_t j = 1; j < p; ++j) row[j] = rng.normal() + y;
        ds.add_row(row, y);
    }
    return ds;
}

}  // namespace

TEST_CASE("allocate_counts examples") {
    CHECK(allocate_counts(std::vector<double>{0.5, 0.5}, 3) == std::vector<std::size_t>{2, 1});
    CHECK(allocate_counts(std::vector<double>{1.0, 0.0}, 5) == std::vector<std::size_t>{5, 0});
    CHECK(allocate_counts(std::vector<double>{0.25, 0.75}, 0) == std::vector<std::size_t>{0, 0});
    CHECK(allocate_counts(std::vector<double>{0.2, 0.3, 0.5}, 7) == std::vector<std::size_t>{1, 2, 4});
    CHECK_THROWS(allocate_counts(std::vector<double>{0.5, 0.6}, 3));
    CHECK_THROWS(allocate_counts(std::vector<double>{-0.5, 1.5}, 3));
    CHECK_THROWS(allocate_counts(std::vector<double>{}, 3));
}

TEST_CASE("allocate_counts property: exact total, each count within one of its share") {
    Rng rng(3);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t n = 1 + rng.below(20);
        std::vector<double> w(n);
        for (auto& x : w) x = rng.bernoulli(0.2) ? 0.0 : rng.uniform01();
        double s = std::accumulate(w.begin(), w.end(), 0.0);
        if (s == 0.0) {
            w[0] = 1.0;
            s = 1.0;
        }
        for (auto& x : w) x /= s;
        const std::size_t total = rng.below(300);
        const auto c = allocate_counts(w, total);
        CHECK(std::accumulate(c.begin(), c.end(), std::size_t{0}) == total);
        for (std::size_t i = 0; i < n; ++i) {
            const double share = w[i] * static_cast<double>(total);
            CHECK(static_cast<double>(c[i]) >= std::floor(share) - 1e-9);
            CHECK(static_cast<double>(c[i]) <= std::floor(share) + 1.0);
        }
    }
}

TEST_CASE("balanced input is returned unchanged") {
    Rng rng(1);
    const Dataset ds = counts_dataset(6, 6, rng);
    const auto res = adasyn_detailed(ds, ds.all_rows(), {});
    CHECK(res.trace.generated == 0);
    CHECK(res.data == ds);
}

TEST_CASE("104 majority / 15 minority with beta = 1") {
    Rng rng(2);
    const Dataset ds = counts_dataset(104, 15, rng);
    const auto res = adasyn_detailed(ds, ds.all_rows(), {});
    CHECK(res.trace.generated == 89);
    CHECK(res.data.rows() == 208);
    CHECK(res.data.class_counts() == std::array<std::size_t, 2>{104, 104});

    AdasynConfig half;
    half.beta = 0.5;
    CHECK(adasyn_detailed(ds, ds.all_rows(), half).trace.generated == 45);  // round(44.5)
}

TEST_CASE("two-dimensional hand trace") {
    // m1=(0,0), m2=(10,10) minority; (0,1), (1,0), (0,2) majority; K=3.
    const Dataset ds = points({{{0, 0}, 1}, {{10, 10}, 1}, {{0, 1}, 0}, {{1, 0}, 0}, {{0, 2}, 0}});
    AdasynConfig cfg;
    cfg.k_neighbors = 3;
    const auto res = adasyn_detailed(ds, ds.all_rows(), cfg);
    const auto& tr = res.trace;
    CHECK(tr.generated == 1);
    CHECK(tr.k_density == 3);
    CHECK(tr.k_minority == 1);
    // m1's three nearest are the majority points at distance 1, 1, 2.
    // m2's three nearest are (0,2), (0,1), (1,0): all majority as well.
    CHECK(tr.majority_neighbors == std::vector<std::size_t>{3, 3});
    CHECK(tr.weights == std::vector<double>{0.5, 0.5});
    CHECK(tr.counts == std::vector<std::size_t>{1, 0});
    REQUIRE(res.data.rows() == 6);
    const auto s = res.data.row(5);
    CHECK(s[0] == s[1]);  // on the diagonal segment
    CHECK(s[0] >= 0.0);
    CHECK(s[0] <= 10.0);
    CHECK(res.data.label(5) == 1);
    CHECK(res.data.provenance(5) == Provenance::Synthetic);
    CHECK(tr.samples.at(0).seed == 0);
    CHECK(tr.samples.at(0).partner == 1);
}

TEST_CASE("density weighting favours minority rows surrounded by the majority") {
    // m1 sits among majority points, m2-m4 are isolated together.
    const Dataset ds = points({{{0, 0}, 1},
                               {{50, 50}, 1},
                               {{51, 50}, 1},
                               {{50, 51}, 1},
                               {{0, 1}, 0},
                               {{1, 0}, 0},
                               {{1, 1}, 0},
                               {{0, 2}, 0},
                               {{2, 0}, 0},
                               {{2, 2}, 0}});
    AdasynConfig cfg;
    cfg.k_neighbors = 2;
    const auto tr = adasyn_detailed(ds, ds.all_rows(), cfg).trace;
    CHECK(tr.majority_neighbors == std::vector<std::size_t>{2, 0, 0, 0});
    CHECK(tr.counts == std::vector<std::size_t>{2, 0, 0, 0});
}

TEST_CASE("uniform fallback when no minority row has a majority neighbour") {
    const Dataset ds = points({{{100, 100}, 1},
                               {{101, 100}, 1},
                               {{100, 101}, 1},
                               {{0, 0}, 0},
                               {{0, 1}, 0},
                               {{1, 0}, 0},
                               {{1, 1}, 0},
                               {{2, 2}, 0},
                               {{2, 1}, 0}});
    AdasynConfig cfg;
    cfg.k_neighbors = 2;
    const auto res = adasyn_detailed(ds, ds.all_rows(), cfg);
    CHECK(res.trace.uniform_fallback);
    CHECK(res.trace.counts == std::vector<std::size_t>{1, 1, 1});
    CHECK(res.data.rows() == 12);
}

TEST_CASE("single minority row is duplicated") {
    const Dataset ds = points({{{5, 5}, 1}, {{0, 0}, 0}, {{0, 1}, 0}, {{1, 0}, 0}});
    const auto res = adasyn_detailed(ds, ds.all_rows(), {});
    CHECK(res.trace.k_minority == 0);
    REQUIRE(res.data.rows() == 6);
    for (RowIndex r = 4; r < 6; ++r) {
        CHECK(res.data.at(r, 0) == 5.0);
        CHECK(res.data.at(r, 1) == 5.0);
    }
}

TEST_CASE("errors: single class, missing cells, bad config") {
    const Dataset one = points({{{0, 0}, 1}, {{1, 1}, 1}});
    CHECK_THROWS_WITH(adasyn(one, one.all_rows(), {}), doctest::Contains("single class"));

    Dataset gap = points({{{0, 0}, 1}, {{1, 1}, 0}, {{2, 2}, 0}});
    gap.set(1, 0, kMissing);
    CHECK_THROWS_WITH(adasyn(gap, gap.all_rows(), {}), doctest::Contains("missing"));
    // rows outside the selection may hold missing cells
    const RowSet ok{0, 2};
    CHECK_NOTHROW(adasyn(gap, ok, {}));

    AdasynConfig bad;
    bad.k_neighbors = 0;
    CHECK_THROWS(adasyn(one, one.all_rows(), bad));
    bad = {};
    bad.beta = 1.5;
    CHECK_THROWS(adasyn(one, one.all_rows(), bad));
}

TEST_CASE("nearest_rows orders by distance then row index") {
    const Dataset ds = points({{{0, 0}, 0}, {{1, 0}, 0}, {{0, 1}, 1}, {{3, 3}, 1}, {{-1, 0}, 0}});
    const RowSet all = ds.all_rows();
    CHECK(nearest_rows(ds, 0, all, 3) == std::vector<RowIndex>{1, 2, 4});
    CHECK(nearest_rows(ds, 0, all, 10).size() == 4);
}

TEST_CASE("adasyn properties on random imbalanced datasets") {
    Rng rng(404);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n1 = 1 + rng.below(15);
        const std::size_t n0 = n1 + 1 + rng.below(40);
        const Dataset ds = counts_dataset(n0, n1, rng, 2 + rng.below(5));
        AdasynConfig cfg;
        cfg.k_neighbors = 1 + rng.below(7);
        cfg.beta = rng.bernoulli(0.5) ? 1.0 : rng.uniform01();
        cfg.seed = rng.next();
        const RowSet rows = ds.all_rows();
        const auto res = adasyn_detailed(ds, rows, cfg);
        const auto& out = res.data;
        const auto g = static_cast<std::size_t>(std::llround(cfg.beta * static_cast<double>(n0 - n1)));

        CHECK(res.trace.generated == g);
        CHECK(out.class_counts()[1] == n1 + g);
        CHECK(out.class_counts()[0] == n0);
        for (RowIndex r = 0; r < ds.rows(); ++r) {
            CHECK(out.provenance(r) == Provenance::Original);
            for (std::size_t c = 0; c < ds.cols(); ++c) {
                CHECK(std::bit_cast<std::uint64_t>(out.at(r, c)) ==
                      std::bit_cast<std::uint64_t>(ds.at(r, c)));
            }
        }
        for (std::size_t s = 0; s < res.trace.samples.size(); ++s) {
            const RowIndex r = ds.rows() + s;
            const auto& smp = res.trace.samples[s];
            CHECK(out.provenance(r) == Provenance::Synthetic);
            CHECK(out.label(r) == 1);
            for (std::size_t c = 0; c < ds.cols(); ++c) {
                const double a = ds.at(smp.seed, c), b = ds.at(smp.partner, c);
                const double v = out.at(r, c);
                if (ds.column(c).kind == ColumnKind::Binary) {
                    CHECK((v == a || v == b));
                } else {
                    CHECK(v >= std::min(a, b));
                    CHECK(v <= std::max(a, b));
                }
            }
        }
        CHECK(adasyn(ds, rows, cfg) == out);
    }
}
