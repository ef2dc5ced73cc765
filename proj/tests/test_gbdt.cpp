#include "peakcast/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "test_util.hpp"

using namespace peakcast;

TEST_SUITE_BEGIN("gbdt");

namespace {

FeatureMatrix matrix_from(const std::vector<std::pair<std::string, std::vector<double>>>& cols) {
    FeatureMatrix fm;
    for (const auto& [name, values] : cols) fm.add_column(name, values);
    return fm;
}

BoostConfig small_cfg() {
    BoostConfig cfg;
    cfg.num_iterations = 50;
    cfg.learning_rate = 0.1;
    cfg.max_leaves = 8;
    cfg.min_samples_leaf = 1.0;
    cfg.lambda_l2 = 0.0;
    return cfg;
}

bool trees_equal(const Tree& a, const Tree& b) {
    if (a.nodes.size() != b.nodes.size()) return false;
    for (std::size_t i = 0; i < a.nodes.size(); ++i) {
        const auto& x = a.nodes[i];
        const auto& y = b.nodes[i];
        if (x.feature != y.feature || x.threshold != y.threshold || x.left != y.left ||
            x.right != y.right || x.value != y.value)
            return false;
    }
    return true;
}

}  // namespace

TEST_CASE("fit_tree: constant gradients collapse to one leaf") {
    const std::size_t n = 30;
    auto fm = matrix_from({{"x", [] {
                                std::vector<double> v(30);
                                std::iota(v.begin(), v.end(), 0.0);
                                return v;
                            }()}});
    const std::vector<double> g(n, 0.7), h(n, 1.0), w(n, 1.0);
    const Tree t = fit_tree(fm, g, h, w, small_cfg());
    REQUIRE(t.nodes.size() == 1);
    CHECK(t.nodes[0].value == doctest::Approx(-0.7).epsilon(1e-12));
}

TEST_CASE("fit_tree: step target splits where the exhaustive oracle says") {
    testutil::Rng rng(17);
    const std::size_t n = 60;
    std::vector<double> x(n), g(n), h(n, 1.0), w(n, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = rng.uniform(0, 10);
        g[i] = x[i] < 4.0 ? 2.0 : -3.0;  // negative gradient = target direction
    }
    auto fm = matrix_from({{"x", x}});
    BoostConfig cfg = small_cfg();
    cfg.max_leaves = 2;
    const Tree t = fit_tree(fm, g, h, w, cfg);

    const auto oracle = testutil::exhaustive_best_split({x}, g, h, w, cfg.lambda_l2,
                                                        cfg.min_samples_leaf);
    REQUIRE(t.nodes.size() == 3);
    CHECK(t.nodes[0].feature == oracle.feature);
    CHECK(t.nodes[0].threshold == doctest::Approx(oracle.threshold));
    CHECK(t.nodes[t.nodes[0].left].value == doctest::Approx(oracle.left_value));
    CHECK(t.nodes[t.nodes[0].right].value == doctest::Approx(oracle.right_value));
    // the step sits between the two gradient groups
    CHECK(t.nodes[0].threshold > 3.0);
    CHECK(t.nodes[0].threshold < 4.5);
}

TEST_CASE("fit_tree agrees with the exhaustive oracle on random multivariate data") {
    testutil::Rng rng(23);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n = 40;
        std::vector<std::vector<double>> cols(3, std::vector<double>(n));
        std::vector<double> g(n), h(n), w(n, 1.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (auto& c : cols) c[i] = std::floor(rng.uniform(0, 6));
            g[i] = rng.normal();
            h[i] = 1.0 + rng.uniform(0, 1);
        }
        auto fm = matrix_from({{"a", cols[0]}, {"b", cols[1]}, {"c", cols[2]}});
        BoostConfig cfg = small_cfg();
        cfg.max_leaves = 2;
        cfg.lambda_l2 = 0.5;
        cfg.min_samples_leaf = 3.0;
        const Tree t = fit_tree(fm, g, h, w, cfg);
        const auto oracle = testutil::exhaustive_best_split(cols, g, h, w, cfg.lambda_l2,
                                                            cfg.min_samples_leaf);
        if (oracle.feature < 0) {
            CHECK(t.nodes.size() == 1);
        } else {
            REQUIRE(t.nodes.size() == 3);
            CHECK(t.nodes[0].feature == oracle.feature);
            CHECK(t.nodes[0].threshold == doctest::Approx(oracle.threshold).epsilon(1e-12));
        }
    }
}

TEST_CASE("fit_tree ignores zero-weight rows entirely") {
    testutil::Rng rng(29);
    const std::size_t n = 50;
    std::vector<double> x(n), g(n), h(n, 1.0), w(n, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = rng.uniform(0, 1);
        g[i] = x[i] < 0.5 ? 1.0 : -1.0;
    }
    for (std::size_t i = 0; i < n; i += 5) w[i] = 0.0;
    auto fm = matrix_from({{"x", x}});
    const Tree base = fit_tree(fm, g, h, w, small_cfg());

    // flip the zero-weight rows to garbage
    auto fm2 = fm;
    auto g2 = g;
    for (std::size_t i = 0; i < n; i += 5) {
        fm2.cols[0][i] = rng.uniform(-100, 100);
        g2[i] = rng.uniform(-9, 9);
    }
    const Tree flipped = fit_tree(fm2, g2, h, w, small_cfg());
    CHECK(trees_equal(base, flipped));
}

TEST_CASE("fit_gbm with 0 iterations predicts the weighted mean") {
    auto fm = matrix_from({{"x", {1, 2, 3, 4}}});
    fm.weights = {1, 1, 2, 0};
    const std::vector<double> y{10, 20, 40, 999};
    BoostConfig cfg = small_cfg();
    cfg.num_iterations = 0;
    const TreeEnsemble e = fit_gbm(fm, y, cfg);
    const auto pred = e.predict(fm);
    const double expect = (10 + 20 + 2 * 40) / 4.0;
    for (double p : pred) CHECK(p == doctest::Approx(expect));
}

TEST_CASE("fit_gbm drives training error toward zero on y = x") {
    testutil::Rng rng(31);
    const std::size_t n = 256;
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = rng.uniform(0, 100);
        y[i] = x[i];
    }
    auto fm = matrix_from({{"x", x}});
    BoostConfig cfg;
    cfg.num_iterations = 200;
    cfg.learning_rate = 0.1;
    cfg.max_leaves = 64;
    cfg.min_samples_leaf = 1.0;
    cfg.lambda_l2 = 0.0;
    FitDiagnostics diag;
    const TreeEnsemble e = fit_gbm(fm, y, cfg, &diag);
    double var = 0, mean = 0;
    for (double v : y) mean += v;
    mean /= n;
    for (double v : y) var += (v - mean) * (v - mean);
    var /= n;
    CHECK(diag.train_loss.back() < 1e-3 * var);
}

TEST_CASE("duplicating rows at half weight leaves the model unchanged") {
    testutil::Rng rng(37);
    const std::size_t n = 80;
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = std::floor(rng.uniform(0, 20));
        y[i] = 3.0 * x[i] + rng.normal();
    }
    auto fm = matrix_from({{"x", x}});
    BoostConfig cfg = small_cfg();
    cfg.num_iterations = 20;
    cfg.min_samples_leaf = 2.0;  // weighted count
    const TreeEnsemble a = fit_gbm(fm, y, cfg);

    std::vector<double> x2(x), y2(y);
    x2.insert(x2.end(), x.begin(), x.end());
    y2.insert(y2.end(), y.begin(), y.end());
    auto fm2 = matrix_from({{"x", x2}});
    fm2.weights.assign(2 * n, 0.5);
    const TreeEnsemble b = fit_gbm(fm2, y2, cfg);

    // identical up to summation roundoff: the split structure must agree
    // exactly, values to 1e-12 relative
    CHECK(a.base_mu == doctest::Approx(b.base_mu).epsilon(1e-12));
    REQUIRE(a.mu_trees.size() == b.mu_trees.size());
    for (std::size_t t = 0; t < a.mu_trees.size(); ++t) {
        const auto& ta = a.mu_trees[t].nodes;
        const auto& tb = b.mu_trees[t].nodes;
        REQUIRE(ta.size() == tb.size());
        for (std::size_t k = 0; k < ta.size(); ++k) {
            CHECK(ta[k].feature == tb[k].feature);
            CHECK(ta[k].threshold == tb[k].threshold);
            CHECK(ta[k].value == doctest::Approx(tb[k].value).epsilon(1e-12));
        }
    }
    const auto pa = a.predict(fm), pb = b.predict(fm);
    for (std::size_t i = 0; i < n; ++i) CHECK(pa[i] == doctest::Approx(pb[i]).epsilon(1e-12));
}

TEST_CASE("plain boosting training loss is monotone non-increasing") {
    testutil::Rng rng(41);
    const std::size_t n = 300;
    std::vector<double> x1(n), x2(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        x1[i] = rng.uniform(-2, 2);
        x2[i] = rng.uniform(-2, 2);
        y[i] = std::sin(x1[i]) + 0.5 * x2[i] * x2[i] + 0.2 * rng.normal();
    }
    auto fm = matrix_from({{"x1", x1}, {"x2", x2}});
    BoostConfig cfg;
    cfg.num_iterations = 120;
    cfg.learning_rate = 0.1;
    cfg.max_leaves = 15;
    cfg.min_samples_leaf = 5.0;
    cfg.lambda_l2 = 1.0;
    FitDiagnostics diag;
    (void)fit_gbm(fm, y, cfg, &diag);
    for (std::size_t i = 1; i < diag.train_loss.size(); ++i)
        CHECK(diag.train_loss[i] <= diag.train_loss[i - 1] + 1e-12);
}

TEST_CASE("row permutation yields the identical model") {
    testutil::Rng rng(43);
    const std::size_t n = 150;
    std::vector<double> x1(n), x2(n), y(n), w(n);
    for (std::size_t i = 0; i < n; ++i) {
        x1[i] = std::floor(rng.uniform(0, 12));
        x2[i] = rng.uniform(-1, 1);
        y[i] = x1[i] - 2.0 * x2[i] + 0.1 * rng.normal();
        w[i] = rng.uniform(0.5, 2.0);
    }
    auto fm = matrix_from({{"x1", x1}, {"x2", x2}});
    fm.weights = w;
    BoostConfig cfg = small_cfg();
    cfg.num_iterations = 25;
    const TreeEnsemble a = fit_gbm(fm, y, cfg);

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.next() % (i + 1)]);
    std::vector<double> px1(n), px2(n), py(n), pw(n);
    for (std::size_t i = 0; i < n; ++i) {
        px1[i] = x1[perm[i]];
        px2[i] = x2[perm[i]];
        py[i] = y[perm[i]];
        pw[i] = w[perm[i]];
    }
    auto pfm = matrix_from({{"x1", px1}, {"x2", px2}});
    pfm.weights = pw;
    const TreeEnsemble b = fit_gbm(pfm, py, cfg);
    CHECK(ensemble_to_json(a) == ensemble_to_json(b));

    // same in distributional mode
    const TreeEnsemble al = fit_gbm_lss(fm, y, cfg);
    const TreeEnsemble bl = fit_gbm_lss(pfm, py, cfg);
    CHECK(ensemble_to_json(al) == ensemble_to_json(bl));
}

TEST_CASE("gaussian nll derivatives match central finite differences") {
    auto check_at = [](double y, double mu, double s) {
        const NllDerivs d = gaussian_nll_derivs(y, mu, s);
        const double eps = 1e-6;
        const double fd_mu =
            (gaussian_nll(y, mu + eps, s) - gaussian_nll(y, mu - eps, s)) / (2 * eps);
        const double fd_s =
            (gaussian_nll(y, mu, s + eps) - gaussian_nll(y, mu, s - eps)) / (2 * eps);
        CHECK(d.g_mu == doctest::Approx(fd_mu).epsilon(1e-6));
        CHECK(d.g_s == doctest::Approx(fd_s).epsilon(1e-6));
        // second differences need a wider step to stay above cancellation
        const double he = 1e-4;
        const double fd_h_mu = (gaussian_nll(y, mu + he, s) - 2 * gaussian_nll(y, mu, s) +
                                gaussian_nll(y, mu - he, s)) /
                               (he * he);
        const double fd_h_s = (gaussian_nll(y, mu, s + he) - 2 * gaussian_nll(y, mu, s) +
                               gaussian_nll(y, mu, s - he)) /
                              (he * he);
        CHECK(d.h_mu == doctest::Approx(fd_h_mu).epsilon(1e-5));
        CHECK(d.h_s == doctest::Approx(fd_h_s).epsilon(1e-5));
    };
    check_at(1.0, 0.3, 0.2);  // the pinned point
    testutil::Rng rng(47);
    for (int i = 0; i < 100; ++i)
        check_at(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-1, 1));
}

TEST_CASE("exact-fit gradient vanishes") {
    const NllDerivs d = gaussian_nll_derivs(2.5, 2.5, 0.7);
    CHECK(d.g_mu == 0.0);
}

TEST_CASE("lss recovers the gaussian mle on an iid sample") {
    testutil::Rng rng(53);
    const std::size_t n = 400;
    std::vector<double> y(n);
    for (auto& v : y) v = 10.0 + 3.0 * rng.normal();
    // constant feature: no split is admissible, every tree is one Newton step
    auto fm = matrix_from({{"c", std::vector<double>(n, 1.0)}});
    BoostConfig cfg;
    cfg.num_iterations = 200;
    cfg.learning_rate = 0.3;
    cfg.max_leaves = 8;
    cfg.min_samples_leaf = 1.0;
    cfg.lambda_l2 = 0.0;
    const TreeEnsemble e = fit_gbm_lss(fm, y, cfg);
    auto [mu, sigma] = e.predict_dist(fm);

    double mean = 0;
    for (double v : y) mean += v;
    mean /= n;
    double ss = 0;
    for (double v : y) ss += (v - mean) * (v - mean);
    const double mle_sigma = std::sqrt(ss / n);

    CHECK(mu[0] == doctest::Approx(mean).epsilon(0.02));
    CHECK(sigma[0] == doctest::Approx(mle_sigma).epsilon(0.02));
}

TEST_CASE("constant target floors the log-scale base score") {
    auto fm = matrix_from({{"x", {1, 2, 3, 4, 5}}});
    const std::vector<double> y(5, 7.0);
    BoostConfig cfg = small_cfg();
    cfg.num_iterations = 1;
    const TreeEnsemble e = fit_gbm_lss(fm, y, cfg);
    CHECK(std::isfinite(e.base_s));
    CHECK(e.base_s == doctest::Approx(std::log(1e-9 * 8.0)));
    auto [mu, sigma] = e.predict_dist(fm);
    for (double s : sigma) CHECK(s > 0.0);
}

TEST_CASE("dart with zero drop rate and no fallback reproduces plain boosting") {
    testutil::Rng rng(59);
    const std::size_t n = 200;
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = rng.uniform(0, 10);
        y[i] = std::cos(x[i]) + 0.1 * rng.normal();
    }
    auto fm = matrix_from({{"x", x}});
    BoostConfig plain = small_cfg();
    plain.num_iterations = 40;
    BoostConfig dart = plain;
    dart.dart.enabled = true;
    dart.dart.drop_rate = 0.0;
    dart.dart.empty_fallback = false;
    dart.dart.rng_seed = 123;
    // compare the fitted model, not the recorded configs
    auto strip = [&](TreeEnsemble e) {
        e.config = plain;
        return ensemble_to_json(e);
    };
    CHECK(strip(fit_gbm(fm, y, plain)) == strip(fit_gbm(fm, y, dart)));
    CHECK(strip(fit_gbm_lss(fm, y, plain)) == strip(fit_gbm_lss(fm, y, dart)));
}

TEST_CASE("dart normalization: one dropped tree halves both scales") {
    testutil::Rng rng(61);
    const std::size_t n = 100;
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = rng.uniform(0, 1);
        y[i] = x[i] < 0.5 ? 1.0 : 5.0;
    }
    auto fm = matrix_from({{"x", x}});
    BoostConfig cfg = small_cfg();
    cfg.learning_rate = 0.4;
    cfg.dart.enabled = true;
    cfg.dart.drop_rate = 0.0;
    cfg.dart.empty_fallback = true;  // forces |D| = 1 from iteration 2 on

    GbmTrainer trainer(fm, y, cfg, BoostMode::L2);
    trainer.step();
    CHECK(trainer.last_drop_count() == 0);  // nothing to drop yet
    CHECK(trainer.ensemble().mu_scales[0] == doctest::Approx(0.4));
    trainer.step();
    CHECK(trainer.last_drop_count() == 1);
    CHECK(trainer.ensemble().mu_scales[0] == doctest::Approx(0.2));  // halved
    CHECK(trainer.ensemble().mu_scales[1] == doctest::Approx(0.2));  // lr / (1+1)
}

TEST_CASE("dart one-step toy: ensemble output is preserved when the refit is exact") {
    // two-level step target, stump fits the residual exactly, lr = 1:
    // drop {T0}, refit the same tree, halve both; output is unchanged.
    std::vector<double> x{0, 0, 0, 0, 1, 1, 1, 1};
    std::vector<double> y{2, 2, 2, 2, 8, 8, 8, 8};
    auto fm = matrix_from({{"x", x}});
    BoostConfig cfg = small_cfg();
    cfg.learning_rate = 1.0;
    cfg.max_leaves = 2;
    cfg.dart.enabled = true;
    cfg.dart.drop_rate = 0.0;
    cfg.dart.empty_fallback = true;

    GbmTrainer trainer(fm, y, cfg, BoostMode::L2);
    trainer.step();
    const auto after1 = trainer.ensemble().predict(fm);
    for (std::size_t i = 0; i < y.size(); ++i) CHECK(after1[i] == doctest::Approx(y[i]));
    trainer.step();
    const auto after2 = trainer.ensemble().predict(fm);
    for (std::size_t i = 0; i < y.size(); ++i)
        CHECK(after2[i] == doctest::Approx(after1[i]).epsilon(1e-12));
}

TEST_CASE("dart keeps every scale in (0, 1]") {
    testutil::Rng rng(67);
    const std::size_t n = 150;
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = rng.uniform(0, 10);
        y[i] = x[i] + rng.normal();
    }
    auto fm = matrix_from({{"x", x}});
    BoostConfig cfg = small_cfg();
    cfg.num_iterations = 60;
    cfg.dart.enabled = true;
    cfg.dart.drop_rate = 0.2;
    cfg.dart.rng_seed = 7;
    const TreeEnsemble e = fit_gbm(fm, y, cfg);
    for (double s : e.mu_scales) {
        CHECK(s > 0.0);
        CHECK(s <= 1.0);
    }
}

TEST_CASE("prediction mechanics") {
    auto fm = matrix_from({{"x", {1, 2, 3}}});

    SUBCASE("empty ensemble returns the base score") {
        TreeEnsemble e;
        e.base_mu = 4.5;
        e.schema = {"x"};
        for (double p : e.predict(fm)) CHECK(p == 4.5);
    }
    SUBCASE("single stump adds its scaled value") {
        TreeEnsemble e;
        e.base_mu = 1.0;
        e.schema = {"x"};
        Tree t;
        t.nodes.push_back({0, 2.5, 1, 2, 0.0});
        t.nodes.push_back({-1, 0, -1, -1, 10.0});
        t.nodes.push_back({-1, 0, -1, -1, 20.0});
        e.mu_trees.push_back(t);
        e.mu_scales.push_back(0.1);
        const auto p = e.predict(fm);
        CHECK(p[0] == doctest::Approx(2.0));  // 1 + 0.1*10
        CHECK(p[2] == doctest::Approx(3.0));  // 1 + 0.1*20
    }
    SUBCASE("schema mismatch names the missing column") {
        TreeEnsemble e;
        e.schema = {"x", "temp_gone"};
        CHECK_THROWS_WITH_AS((void)e.predict(fm), doctest::Contains("temp_gone"),
                             std::runtime_error);
    }
}

TEST_CASE("gain importance credits only features the trees split on") {
    testutil::Rng rng(73);
    const std::size_t n = 200;
    std::vector<double> x1(n), x2(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        x1[i] = rng.uniform(0, 10);
        x2[i] = rng.uniform(0, 10);
        y[i] = 2.0 * x1[i];  // x2 is pure noise for the target
    }
    auto fm = matrix_from({{"x1", x1}, {"x2", x2}});
    BoostConfig cfg = small_cfg();
    cfg.num_iterations = 30;
    cfg.min_samples_leaf = 20;
    cfg.lambda_l2 = 1.0;
    const TreeEnsemble e = fit_gbm(fm, y, cfg);
    const auto imp = gain_importance(e);
    REQUIRE(imp.size() == 2);
    CHECK(imp[0].first == "x1");  // sorted by total gain, descending
    CHECK(imp[0].second > 0.0);
    CHECK(imp[0].second > 100.0 * std::max(imp[1].second, 1e-12));

    const std::string csv = gain_importance_csv(e);
    CHECK(csv.find("feature,total_gain") != std::string::npos);
    CHECK(csv.find("x1,") != std::string::npos);
}

TEST_CASE("serialization round trip preserves predictions exactly") {
    testutil::Rng rng(71);
    const std::size_t n = 120;
    std::vector<double> x1(n), x2(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        x1[i] = rng.uniform(0, 5);
        x2[i] = rng.uniform(0, 5);
        y[i] = x1[i] * x2[i] + rng.normal();
    }
    auto fm = matrix_from({{"x1", x1}, {"x2", x2}});
    BoostConfig cfg = small_cfg();
    cfg.num_iterations = 15;
    const TreeEnsemble e = fit_gbm_lss(fm, y, cfg);
    const std::string dumped = ensemble_to_json(e);
    const TreeEnsemble back = ensemble_from_json(dumped);
    CHECK(ensemble_to_json(back) == dumped);
    const auto [m1, s1] = e.predict_dist(fm);
    const auto [m2, s2] = back.predict_dist(fm);
    CHECK(m1 == m2);
    CHECK(s1 == s2);
}

TEST_SUITE_END();
