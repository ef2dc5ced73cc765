#include "peakcast/hierarchy.hpp"

#include <cmath>

#include "doctest.h"
#include "test_util.hpp"

using namespace peakcast;

TEST_SUITE_BEGIN("hierarchy");

TEST_CASE("aggregate_series block sums") {
    auto s = testutil::make_series("x", {1, 2, 3, 4});
    const HourlySeries agg = aggregate_series(s, 2);
    CHECK(agg.values == std::vector<double>{3, 7});
    CHECK(agg.step_hours == 2);
    CHECK(agg.start == s.start);

    CHECK(aggregate_series(s, 1).values == s.values);

    // sum of a k-aggregated day equals the hourly day sum
    testutil::Rng rng(3);
    auto day = testutil::make_series("d", std::vector<double>(24));
    for (auto& v : day.values) v = rng.uniform(0, 10);
    double hourly_sum = 0;
    for (double v : day.values) hourly_sum += v;
    for (int k : {2, 4, 6, 12}) {
        const auto a = aggregate_series(day, k);
        double s2 = 0;
        for (double v : a.values) s2 += v;
        CHECK(s2 == doctest::Approx(hourly_sum).epsilon(1e-12));
    }
}

TEST_CASE("aggregate_series alignment errors") {
    auto s = testutil::make_series("x", {1, 2, 3});
    CHECK_THROWS_AS((void)aggregate_series(s, 2), std::runtime_error);  // length not multiple
    auto off = testutil::make_series("x", {1, 2, 3, 4});
    off.start.hour = 2;  // not block-aligned
    CHECK_THROWS_AS((void)aggregate_series(off, 2), std::runtime_error);
    CHECK_THROWS_AS((void)aggregate_series(s, 5), std::runtime_error);  // 5 does not divide 24
}

TEST_CASE("summing matrix structure") {
    SUBCASE("toy 4-hour day with scales {1,2,4} has 7 nodes") {
        const std::vector<int> scales{1, 2, 4};
        const HierarchyStructure hs = build_summing_matrix(scales, 4);
        REQUIRE(hs.n_rows() == 7);
        CHECK(hs.summing[0] == std::vector<std::uint8_t>{1, 1, 1, 1});
        CHECK(hs.summing[1] == std::vector<std::uint8_t>{1, 1, 0, 0});
        CHECK(hs.summing[2] == std::vector<std::uint8_t>{0, 0, 1, 1});
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) CHECK(hs.summing[3 + i][j] == (i == j ? 1 : 0));
    }
    SUBCASE("bottom-only hierarchy is the identity") {
        const std::vector<int> scales{1};
        const HierarchyStructure hs = build_summing_matrix(scales, 24);
        CHECK(hs.n_rows() == 24);
        CHECK(hs.bottom_offset() == 0);
    }
    SUBCASE("default scales give 48 rows") {
        const std::vector<int> scales{1, 2, 4, 6, 12};
        const HierarchyStructure hs = build_summing_matrix(scales, 24);
        // 24/12 + 24/6 + 24/4 + 24/2 + 24 = 2+4+6+12+24
        CHECK(hs.n_rows() == 48);
        // each row of a scale has exactly (scale) contiguous ones
        std::size_t r = 0;
        for (int k : hs.scales) {
            for (int b = 0; b < 24 / k; ++b, ++r) {
                int ones = 0;
                for (int j = 0; j < 24; ++j) ones += hs.summing[r][j];
                CHECK(ones == k);
            }
        }
    }
    SUBCASE("scale must divide the day") {
        const std::vector<int> bad{1, 5};
        CHECK_THROWS_AS((void)build_summing_matrix(bad, 24), std::runtime_error);
        const std::vector<int> no_bottom{2, 4};
        CHECK_THROWS_AS((void)build_summing_matrix(no_bottom, 24), std::runtime_error);
    }
}

TEST_CASE("reconcile matches the hand least-squares toy") {
    // S = [[1,1],[1,0],[0,1]], yhat = [3,1,1], W = I -> bottom [4/3,4/3]
    const std::vector<int> scales{1, 2};
    const HierarchyStructure hs = build_summing_matrix(scales, 2);
    BaseForecasts base;
    base.mean = {3, 1, 1};
    base.var = {1, 1, 1};
    const ReconciledForecasts rec = reconcile(base, hs);
    CHECK(rec.mean[1] == doctest::Approx(4.0 / 3.0));
    CHECK(rec.mean[2] == doctest::Approx(4.0 / 3.0));
    CHECK(rec.mean[0] == doctest::Approx(8.0 / 3.0));

    // brute-force minimization of ||yhat - S b||^2 over a grid around the optimum
    double best = 1e99, best_b1 = 0, best_b2 = 0;
    for (double b1 = 0; b1 <= 3; b1 += 1e-3)
        for (double b2 = b1; b2 <= b1 + 2e-3; b2 += 1e-3) {  // symmetric problem
            const double e = (3 - b1 - b2) * (3 - b1 - b2) + (1 - b1) * (1 - b1) +
                             (1 - b2) * (1 - b2);
            if (e < best) {
                best = e;
                best_b1 = b1;
                best_b2 = b2;
            }
        }
    CHECK(rec.mean[1] == doctest::Approx(best_b1).epsilon(1e-2));
    CHECK(rec.mean[2] == doctest::Approx(best_b2).epsilon(1e-2));
}

TEST_CASE("reconcile validates dimensions and variances") {
    const std::vector<int> scales{1, 2};
    const HierarchyStructure hs = build_summing_matrix(scales, 2);
    BaseForecasts short_base{{3, 1}, {1, 1}};
    CHECK_THROWS_AS((void)reconcile(short_base, hs), std::runtime_error);
    BaseForecasts bad_var{{3, 1, 1}, {1, 0, 1}};
    CHECK_THROWS_AS((void)reconcile(bad_var, hs), std::runtime_error);
}

TEST_CASE("reconcile fixes coherent points and ignores variance scaling") {
    const std::vector<int> scales{1, 2, 4};
    const HierarchyStructure hs = build_summing_matrix(scales, 4);
    testutil::Rng rng(5);

    // coherent base: build bottom, sum upward
    std::vector<double> bottom(4);
    for (auto& v : bottom) v = rng.uniform(1, 9);
    BaseForecasts base;
    base.mean.resize(hs.n_rows());
    base.var.assign(hs.n_rows(), 2.0);
    for (std::size_t r = 0; r < hs.n_rows(); ++r) {
        double acc = 0;
        for (int j = 0; j < 4; ++j)
            if (hs.summing[r][j]) acc += bottom[j];
        base.mean[r] = acc;
    }
    const ReconciledForecasts rec = reconcile(base, hs);
    for (std::size_t r = 0; r < hs.n_rows(); ++r)
        CHECK(rec.mean[r] == doctest::Approx(base.mean[r]).epsilon(1e-12));

    // incoherent base: scaling all variances by a constant leaves means fixed
    for (auto& m : base.mean) m += rng.uniform(-1, 1);
    const ReconciledForecasts a = reconcile(base, hs);
    BaseForecasts scaled = base;
    for (auto& v : scaled.var) v *= 37.5;
    const ReconciledForecasts b = reconcile(scaled, hs);
    for (std::size_t r = 0; r < hs.n_rows(); ++r)
        CHECK(a.mean[r] == doctest::Approx(b.mean[r]).epsilon(1e-12));
}

TEST_CASE("reconciliation is a coherent idempotent projection with smaller variance") {
    const std::vector<int> scales{1, 2, 4, 6, 12};
    const HierarchyStructure hs = build_summing_matrix(scales, 24);
    testutil::Rng rng(7);
    BaseForecasts base;
    base.mean.resize(hs.n_rows());
    base.var.resize(hs.n_rows());
    for (std::size_t r = 0; r < hs.n_rows(); ++r) {
        base.mean[r] = rng.uniform(50, 150);
        base.var[r] = rng.uniform(0.5, 5.0);
    }
    const ReconciledForecasts rec = reconcile(base, hs);

    // coherence across every level simultaneously, including 4h vs 6h
    const std::size_t off = hs.bottom_offset();
    double scale_of_values = 0;
    for (double m : rec.mean) scale_of_values = std::max(scale_of_values, std::abs(m));
    for (std::size_t r = 0; r < hs.n_rows(); ++r) {
        double sum = 0;
        for (int j = 0; j < 24; ++j)
            if (hs.summing[r][j]) sum += rec.mean[off + j];
        CHECK(std::abs(rec.mean[r] - sum) <= 1e-9 * scale_of_values);
    }

    // idempotence: reconciling the reconciled point changes nothing
    BaseForecasts again;
    again.mean = rec.mean;
    again.var = base.var;
    const ReconciledForecasts rec2 = reconcile(again, hs);
    for (std::size_t r = 0; r < hs.n_rows(); ++r)
        CHECK(rec2.mean[r] == doctest::Approx(rec.mean[r]).epsilon(1e-9));

    // GLS projection cannot inflate bottom variances
    for (std::size_t j = 0; j < 24; ++j) CHECK(rec.var[off + j] <= base.var[off + j] + 1e-12);
}

TEST_CASE("reconcile_horizon") {
    SUBCASE("single scale is the identity") {
        const std::vector<int> scales{1};
        const HierarchyStructure hs = build_summing_matrix(scales, 24);
        DistForecast f;
        f.start = {2007, 1, 1, 1};
        testutil::Rng rng(9);
        for (int i = 0; i < 48; ++i) {
            f.mean.push_back(rng.uniform(10, 20));
            f.stddev.push_back(rng.uniform(0.5, 1.5));
        }
        std::map<int, DistForecast> per_scale{{1, f}};
        const DistForecast rec = reconcile_horizon(per_scale, hs);
        for (std::size_t i = 0; i < f.size(); ++i) {
            CHECK(rec.mean[i] == doctest::Approx(f.mean[i]).epsilon(1e-12));
            CHECK(rec.stddev[i] == doctest::Approx(f.stddev[i]).epsilon(1e-12));
        }
    }
    SUBCASE("days reconcile independently and concatenate in order") {
        const std::vector<int> scales{1, 12};
        const HierarchyStructure hs = build_summing_matrix(scales, 24);
        testutil::Rng rng(11);
        auto make_forecasts = [&](int n_days) {
            std::map<int, DistForecast> ps;
            DistForecast bottom, top;
            bottom.start = top.start = {2007, 1, 1, 1};
            for (int i = 0; i < 24 * n_days; ++i) {
                bottom.mean.push_back(rng.uniform(1, 5));
                bottom.stddev.push_back(1.0);
            }
            for (int i = 0; i < 2 * n_days; ++i) {
                top.mean.push_back(rng.uniform(20, 60));
                top.stddev.push_back(2.0);
            }
            ps[1] = bottom;
            ps[12] = top;
            return ps;
        };
        const auto two = make_forecasts(2);
        const DistForecast both = reconcile_horizon(two, hs);

        // reconcile each day separately and compare
        std::map<int, DistForecast> day1, day2;
        for (auto& [k, f] : two) {
            const std::size_t half = f.size() / 2;
            DistForecast a{f.start, {f.mean.begin(), f.mean.begin() + half},
                           {f.stddev.begin(), f.stddev.begin() + half}};
            DistForecast b{f.start.plus_hours(24), {f.mean.begin() + half, f.mean.end()},
                           {f.stddev.begin() + half, f.stddev.end()}};
            day1[k] = a;
            day2[k] = b;
        }
        const DistForecast r1 = reconcile_horizon(day1, hs);
        const DistForecast r2 = reconcile_horizon(day2, hs);
        for (int i = 0; i < 24; ++i) {
            CHECK(both.mean[i] == doctest::Approx(r1.mean[i]).epsilon(1e-12));
            CHECK(both.mean[24 + i] == doctest::Approx(r2.mean[i]).epsilon(1e-12));
        }
    }
    SUBCASE("coverage mismatch errors") {
        const std::vector<int> scales{1, 2};
        const HierarchyStructure hs = build_summing_matrix(scales, 24);
        DistForecast bottom, half;
        bottom.start = half.start = {2007, 1, 1, 1};
        bottom.mean.assign(24, 1.0);
        bottom.stddev.assign(24, 1.0);
        half.mean.assign(6, 2.0);  // should be 12 blocks
        half.stddev.assign(6, 1.0);
        std::map<int, DistForecast> ps{{1, bottom}, {2, half}};
        CHECK_THROWS_AS((void)reconcile_horizon(ps, hs), std::runtime_error);
    }
}

TEST_SUITE_END();
