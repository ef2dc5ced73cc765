#include "peakcast/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace peakcast {

TrendModel fit_trend(std::span<const double> y) {
    const std::size_t n = y.size();
    if (n < 2) throw std::runtime_error("fit_trend: need at least 2 points");
    // OLS on t = 1..T; mean of t is (T+1)/2
    const double tbar = 0.5 * static_cast<double>(n + 1);
    double ybar = 0.0;
    for (double v : y) ybar += v;
    ybar /= static_cast<double>(n);
    double stt = 0.0, sty = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dt = static_cast<double>(i + 1) - tbar;
        stt += dt * dt;
        sty += dt * (y[i] - ybar);
    }
    TrendModel tm;
    tm.beta1 = sty / stt;
    tm.beta0 = ybar - tm.beta1 * tbar;
    tm.fit_length = n;
    return tm;
}

std::vector<double> detrend(std::span<const double> y, const TrendModel& tm) {
    std::vector<double> out(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) out[i] = y[i] - tm.at(i + 1);
    return out;
}

std::vector<double> retrend(std::span<const double> values, const TrendModel& tm,
                            std::size_t first_index) {
    std::vector<double> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = values[i] + tm.at(first_index + i);
    return out;
}

std::vector<double> log_transform(std::span<const double> y, const TimePoint& start,
                                  int step_hours) {
    std::vector<double> out(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (!(y[i] > 0.0))
            throw std::runtime_error(
                "log_transform: non-positive value at " +
                start.plus_hours(static_cast<std::int64_t>(i) * step_hours).to_string());
        out[i] = std::log(y[i]);
    }
    return out;
}

std::vector<double> inverse_log(std::span<const double> values) {
    std::vector<double> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = std::exp(values[i]);
    return out;
}

double empirical_quantile(std::span<const double> y, double q) {
    if (y.empty()) throw std::runtime_error("empirical_quantile: empty input");
    std::vector<double> sorted(y.begin(), y.end());
    std::sort(sorted.begin(), sorted.end());
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= sorted.size()) return sorted.back();
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

std::vector<double> outlier_weights(std::span<const double> y, double q) {
    if (!(q >= 0.0 && q < 1.0)) throw std::runtime_error("outlier_weights: q must be in [0,1)");
    std::vector<double> w(y.size(), 1.0);
    if (q == 0.0) return w;
    const double cut = empirical_quantile(y, q);
    for (std::size_t i = 0; i < y.size(); ++i)
        if (y[i] < cut) w[i] = 0.0;
    return w;
}

std::vector<Fold> ts_cv_folds(std::size_t n_rows, int n_folds, std::size_t fold_length) {
    if (n_folds < 1 || fold_length < 1) throw std::runtime_error("ts_cv_folds: invalid fold spec");
    const std::size_t test_total = static_cast<std::size_t>(n_folds) * fold_length;
    if (test_total >= n_rows)
        throw std::runtime_error("ts_cv_folds: not enough data for " + std::to_string(n_folds) +
                                 " folds of " + std::to_string(fold_length));
    std::vector<Fold> folds;
    for (int f = 0; f < n_folds; ++f) {
        Fold fold;
        fold.test_begin = n_rows - test_total + static_cast<std::size_t>(f) * fold_length;
        fold.test_end = fold.test_begin + fold_length;
        fold.train_begin = 0;
        fold.train_end = fold.test_begin;
        folds.push_back(fold);
    }
    return folds;
}

std::vector<Fold> yearly_cv_folds(const TimePoint& start, std::size_t n_rows, int n_folds) {
    if (n_folds < 1) throw std::runtime_error("yearly_cv_folds: n_folds must be >= 1");
    const std::int64_t end_hour = start.absolute_hour() + static_cast<std::int64_t>(n_rows);
    // last calendar year fully contained in the index
    int last_year = TimePoint::from_absolute_hour(end_hour - 1).year;
    while ((TimePoint{last_year + 1, 1, 1, 1}).absolute_hour() > end_hour) --last_year;
    std::vector<Fold> folds;
    for (int f = 0; f < n_folds; ++f) {
        const int year = last_year - (n_folds - 1 - f);
        const TimePoint y_begin{year, 1, 1, 1};
        const TimePoint y_end{year + 1, 1, 1, 1};
        const std::int64_t b = y_begin.absolute_hour() - start.absolute_hour();
        const std::int64_t e = y_end.absolute_hour() - start.absolute_hour();
        if (b <= 0 || e > static_cast<std::int64_t>(n_rows))
            throw std::runtime_error("yearly_cv_folds: index does not cover " +
                                     std::to_string(n_folds) + " whole years plus training data");
        Fold fold;
        fold.train_begin = 0;
        fold.train_end = static_cast<std::size_t>(b);
        fold.test_begin = static_cast<std::size_t>(b);
        fold.test_end = static_cast<std::size_t>(e);
        folds.push_back(fold);
    }
    return folds;
}

int FeatureConfig::warmup_steps() const {
    int w = lag_steps;
    for (int win : rolling_windows) w = std::max(w, win);
    return w;
}

FeatureMatrix build_features(const std::vector<HourlySeries>& temps,
                             const HolidayCalendar& holidays, const FeatureConfig& fc) {
    if (temps.empty()) throw std::runtime_error("build_features: no temperature series");
    for (const auto& t : temps)
        if (!(t.start == temps.front().start) || t.size() != temps.front().size() ||
            t.step_hours != temps.front().step_hours)
            throw std::runtime_error("build_features: series '" + t.name +
                                     "' does not share the common time index");
    const TimePoint start = temps.front().start;
    std::vector<FeatureMatrix> blocks;
    if (fc.calendar)
        blocks.push_back(calendar_features(start, temps.front().size(),
                                           temps.front().step_hours, holidays));
    if (fc.current_temp) blocks.push_back(series_features(temps));
    if (fc.lag_steps > 0) blocks.push_back(lag_features(temps, LagSpec{fc.lag_steps}));
    if (!fc.rolling_windows.empty() && !fc.rolling_stats.empty()) {
        std::vector<RollingSpec> specs;
        for (int w : fc.rolling_windows)
            for (RollingStat s : fc.rolling_stats) specs.push_back({s, w});
        blocks.push_back(rolling_features(temps, specs));
    }
    if (fc.aggregated) {
        const auto specs = default_agg_specs();
        blocks.push_back(aggregated_features(temps, specs));
    }
    if (blocks.empty()) throw std::runtime_error("build_features: every feature block is disabled");
    return assemble(blocks);
}

namespace {

ScoreFn negative_mse_scorer() {
    return [](std::span<const double> preds, std::span<const double> targets) {
        double acc = 0.0;
        for (std::size_t i = 0; i < preds.size(); ++i) {
            const double r = preds[i] - targets[i];
            acc += r * r;
        }
        return -acc / static_cast<double>(preds.size());
    };
}

}  // namespace

namespace {

std::vector<double> transformed_target(const Dataset& ds, const PipelineConfig& cfg,
                                       std::optional<TrendModel>* trend_out) {
    // log first, then the linear trend on the transformed scale
    std::vector<double> target =
        cfg.log_transform ? log_transform(ds.load.values, ds.load.start, ds.load.step_hours)
                          : ds.load.values;
    if (cfg.detrend) {
        const TrendModel tm = fit_trend(target);
        target = detrend(target, tm);
        if (trend_out) *trend_out = tm;
    }
    return target;
}

}  // namespace

namespace {

FeatureMatrix slice_rows(const FeatureMatrix& fm, std::size_t begin, std::size_t end,
                         std::span<const double> weights = {}) {
    FeatureMatrix out;
    if (weights.empty())
        out.weights.assign(end - begin, 1.0);
    else
        out.weights.assign(weights.begin() + begin, weights.begin() + end);
    for (std::size_t c = 0; c < fm.n_cols(); ++c)
        out.add_column(fm.names[c], {fm.cols[c].begin() + begin, fm.cols[c].begin() + end},
                       {fm.miss[c].begin() + begin, fm.miss[c].begin() + end});
    return out;
}

}  // namespace

SelectionOutcome run_selection(const Dataset& ds, const PipelineConfig& cfg) {
    ds.validate();
    std::vector<double> target = transformed_target(ds, cfg, nullptr);
    FeatureMatrix fm = build_features(ds.temperatures, ds.holidays, cfg.features);
    fm.weights = outlier_weights(ds.load.values, cfg.outlier_quantile);

    const int n_folds = std::max(1, cfg.selection.n_folds);
    std::size_t holdout = std::max<std::size_t>(
        24, static_cast<std::size_t>(cfg.selection.holdout_fraction *
                                     static_cast<double>(fm.rows)));
    const std::size_t fold_len = std::max<std::size_t>(1, holdout / n_folds);
    holdout = fold_len * static_cast<std::size_t>(n_folds);
    if (holdout >= fm.rows)
        throw std::runtime_error("selection: holdout fraction leaves no training rows");
    const auto folds = ts_cv_folds(fm.rows, n_folds, fold_len);

    SelectionOutcome out;
    out.feature_names = fm.names;

    // one cluster structure for all folds, from the pooled out-of-sample tail
    const FeatureMatrix tail = slice_rows(fm, fm.rows - holdout, fm.rows);
    const CorrelationMatrix cm = correlation_matrix(tail, cfg.selection.method);
    out.merges = linkage(cm);
    out.clusters = flat_clusters(out.merges, cm.names, cfg.selection.cluster_threshold);

    // drops are pooled over every fold: per cluster, n_folds * K repetitions
    const int reps = cfg.selection.repetitions;
    std::vector<double> sum(out.clusters.size(), 0.0), sumsq(out.clusters.size(), 0.0);
    double baseline_sum = 0.0;
    BoostConfig probe_cfg = cfg.boost;
    probe_cfg.num_iterations = std::min(cfg.boost.num_iterations, cfg.selection.model_iterations);

    for (std::size_t f = 0; f < folds.size(); ++f) {
        const Fold& fold = folds[f];
        FeatureMatrix train_fm = slice_rows(fm, fold.train_begin, fold.train_end, fm.weights);
        std::vector<double> train_y(target.begin() + fold.train_begin,
                                    target.begin() + fold.train_end);
        const TreeEnsemble probe = fit_gbm(train_fm, train_y, probe_cfg);

        FeatureMatrix eval_fm = slice_rows(fm, fold.test_begin, fold.test_end);
        std::vector<double> eval_y(target.begin() + fold.test_begin,
                                   target.begin() + fold.test_end);
        PredictFn predict = [&probe](const FeatureMatrix& m) { return probe.predict(m); };
        const ImportanceReport rep =
            cpfi(predict, eval_fm, eval_y, negative_mse_scorer(), out.clusters, reps,
                 cfg.selection.rng_seed + 0x9e3779b9u * static_cast<std::uint64_t>(f));
        baseline_sum += rep.baseline_score;
        for (std::size_t c = 0; c < rep.entries.size(); ++c) {
            const auto& e = rep.entries[c];
            sum[c] += static_cast<double>(reps) * e.mean_drop;
            sumsq[c] += static_cast<double>(reps - 1) * e.std_drop * e.std_drop +
                        static_cast<double>(reps) * e.mean_drop * e.mean_drop;
        }
    }

    out.report.baseline_score = baseline_sum / static_cast<double>(folds.size());
    const double n = static_cast<double>(folds.size()) * static_cast<double>(reps);
    for (std::size_t c = 0; c < out.clusters.size(); ++c) {
        ImportanceEntry e;
        e.cluster_id = out.clusters[c].id;
        e.members = out.clusters[c].members;
        e.repetitions = static_cast<int>(n);
        e.mean_drop = sum[c] / n;
        e.std_drop = n > 1 ? std::sqrt(std::max(0.0, (sumsq[c] - n * e.mean_drop * e.mean_drop) /
                                                         (n - 1.0)))
                           : 0.0;
        out.report.entries.push_back(std::move(e));
    }
    out.informative = informative_clusters(out.report);
    for (const auto& cl : out.clusters)
        if (out.informative.count(cl.id))
            for (const auto& name : cl.members) out.selected_columns.push_back(name);
    return out;
}

TrainedPipeline train_forecaster(const Dataset& ds, const PipelineConfig& cfg) {
    ds.validate();
    TrainedPipeline tp;
    tp.cfg = cfg;
    tp.train_start = ds.load.start;
    tp.train_length = ds.load.size();
    tp.step_hours = ds.load.step_hours;

    std::vector<double> target = transformed_target(ds, cfg, &tp.trend);

    // outliers are detected on the raw load scale
    tp.weights = outlier_weights(ds.load.values, cfg.outlier_quantile);

    FeatureMatrix fm = build_features(ds.temperatures, ds.holidays, cfg.features);
    fm.weights = tp.weights;
    tp.selected_columns = fm.names;

    if (cfg.selection.enabled) {
        SelectionOutcome sel = run_selection(ds, cfg);
        tp.selection_report = sel.report;
        tp.informative = sel.informative;
        // degenerate guard: when nothing clears the bar, keep the full set
        if (!sel.selected_columns.empty()) {
            tp.selected_columns = sel.selected_columns;
            fm = fm.select(tp.selected_columns);
            fm.weights = tp.weights;
        }
    }

    tp.model = cfg.mode == BoostMode::L2 ? fit_gbm(fm, target, cfg.boost)
                                         : fit_gbm_lss(fm, target, cfg.boost);
    return tp;
}

ForecastBundle predict_horizon(const TrainedPipeline& tp, const std::vector<HourlySeries>& temps,
                               const HolidayCalendar& holidays, const TimePoint& horizon_start,
                               std::size_t horizon_len) {
    if (horizon_len == 0) throw std::runtime_error("predict_horizon: empty horizon");
    const auto [avail_start, avail_len] = align(temps);
    const int step = temps.front().step_hours;
    const std::int64_t gap = horizon_start.absolute_hour() - avail_start.absolute_hour();
    if (gap % step != 0)
        throw std::runtime_error("predict_horizon: horizon start " + horizon_start.to_string() +
                                 " is off the " + std::to_string(step) + "-hour grid");
    const std::int64_t offset = gap / step;
    const int warmup = tp.cfg.features.warmup_steps();
    if (offset < warmup)
        throw std::runtime_error(
            "predict_horizon: temperatures must cover " + std::to_string(warmup) +
            " warm-up steps before the horizon (have " + std::to_string(offset) + ")");
    if (offset + static_cast<std::int64_t>(horizon_len) > static_cast<std::int64_t>(avail_len))
        throw std::runtime_error("predict_horizon: temperatures end before the horizon does");

    FeatureMatrix fm = build_features(temps, holidays, tp.cfg.features);
    FeatureMatrix sliced;
    sliced.weights.assign(horizon_len, 1.0);
    for (std::size_t c = 0; c < fm.n_cols(); ++c) {
        std::vector<double> col(fm.cols[c].begin() + offset,
                                fm.cols[c].begin() + offset + horizon_len);
        std::vector<std::uint8_t> miss(fm.miss[c].begin() + offset,
                                       fm.miss[c].begin() + offset + horizon_len);
        sliced.add_column(fm.names[c], std::move(col), std::move(miss));
    }
    for (std::size_t r = 0; r < sliced.rows; ++r)
        if (!sliced.row_valid(r))
            throw std::runtime_error("predict_horizon: missing features inside the horizon at " +
                                     horizon_start.plus_hours(static_cast<std::int64_t>(r) * step)
                                         .to_string());
    if (!tp.selected_columns.empty()) sliced = sliced.select(tp.selected_columns);

    std::vector<double> mu, sigma;
    if (tp.model.mode == BoostMode::GaussianNLL) {
        auto [m, s] = tp.model.predict_dist(sliced);
        mu = std::move(m);
        sigma = std::move(s);
    } else {
        mu = tp.model.predict(sliced);
        sigma.assign(mu.size(), 0.0);
    }

    // inverse transforms in reverse order: retrend, then exp
    if (tp.trend) {
        const std::int64_t t_first =
            (horizon_start.absolute_hour() - tp.train_start.absolute_hour()) / tp.step_hours + 1;
        if (t_first <= 0) throw std::runtime_error("predict_horizon: horizon precedes training data");
        mu = retrend(mu, *tp.trend, static_cast<std::size_t>(t_first));
    }
    if (tp.cfg.log_transform) {
        // sigma through exp by first-order propagation around the mean
        std::vector<double> mu_orig = inverse_log(mu);
        for (std::size_t i = 0; i < sigma.size(); ++i) sigma[i] *= mu_orig[i];
        mu = std::move(mu_orig);
    }
    if (tp.model.mode == BoostMode::L2) {
        // degenerate spread for the point-only mode so downstream interval
        // code stays total
        const double eps = 1e-9;
        for (double& s : sigma) s = std::max(s, eps);
    }

    ForecastBundle out;
    out.point.start = horizon_start;
    out.point.values = mu;
    out.dist.start = horizon_start;
    out.dist.mean = mu;
    out.dist.stddev = sigma;
    if (step == 1 && horizon_start.hour == 1 && horizon_len % 24 == 0)
        out.peaks = extract_daily_peaks(out.point);
    return out;
}

}  // namespace peakcast
