#pragma once

#include <optional>
#include <span>

#include "peakcast/core.hpp"
#include "peakcast/features.hpp"
#include "peakcast/gbdt.hpp"
#include "peakcast/selection.hpp"

namespace peakcast {

/// Ordinary least squares line over progressive time indices 1..T.
struct TrendModel {
    double beta0 = 0.0;
    double beta1 = 0.0;
    std::size_t fit_length = 0;

    double at(std::size_t t) const { return beta0 + beta1 * static_cast<double>(t); }  // t is 1-based
};

TrendModel fit_trend(std::span<const double> y);
std::vector<double> detrend(std::span<const double> y, const TrendModel& tm);
/// Adds the extrapolated line at indices first_index .. first_index+n-1
/// (1-based, counted from the start of the fitting window).
std::vector<double> retrend(std::span<const double> values, const TrendModel& tm,
                            std::size_t first_index);

std::vector<double> log_transform(std::span<const double> y, const TimePoint& start,
                                  int step_hours = 1);
std::vector<double> inverse_log(std::span<const double> values);

/// Weight 0 for targets strictly below the empirical q-quantile (linear
/// interpolation between order statistics), 1 otherwise.
std::vector<double> outlier_weights(std::span<const double> y, double q);
double empirical_quantile(std::span<const double> y, double q);

struct Fold {
    std::size_t train_begin = 0, train_end = 0;  // half-open row ranges
    std::size_t test_begin = 0, test_end = 0;
};

/// Expanding-window folds: the last n_folds*fold_length rows are split
/// into consecutive test blocks; train is everything before each block.
std::vector<Fold> ts_cv_folds(std::size_t n_rows, int n_folds, std::size_t fold_length);

/// Expanding-window folds on calendar-year boundaries (handles leap years);
/// the last n_folds full years of the hourly index become the test blocks.
std::vector<Fold> yearly_cv_folds(const TimePoint& start, std::size_t n_rows, int n_folds);

struct FeatureConfig {
    bool calendar = true;
    bool current_temp = true;
    int lag_steps = 48;                             // 0 disables the lag block
    std::vector<int> rolling_windows = {3, 24, 168, 720};
    std::vector<RollingStat> rolling_stats = {RollingStat::Mean, RollingStat::Max,
                                              RollingStat::Min, RollingStat::Median,
                                              RollingStat::Std};
    bool aggregated = true;

    int warmup_steps() const;
};

struct SelectionConfig {
    bool enabled = false;
    CorrMethod method = CorrMethod::Spearman;
    double cluster_threshold = 0.1;
    int repetitions = 100;       // permutations per fold
    double holdout_fraction = 0.25;
    int n_folds = 1;             // out-of-sample folds tiling the holdout tail
    int model_iterations = 150;  // iterations of the probe model used for scoring
    std::uint64_t rng_seed = 7;
};

struct PipelineConfig {
    bool log_transform = false;
    bool detrend = true;
    double outlier_quantile = 0.005;
    FeatureConfig features;
    SelectionConfig selection;
    BoostConfig boost;
    BoostMode mode = BoostMode::GaussianNLL;
};

struct TrainedPipeline {
    PipelineConfig cfg;
    std::optional<TrendModel> trend;
    std::vector<double> weights;          // training row weights (outliers zeroed)
    std::vector<std::string> selected_columns;
    std::optional<ImportanceReport> selection_report;
    std::set<int> informative;
    TreeEnsemble model;
    TimePoint train_start;
    std::size_t train_length = 0;
    int step_hours = 1;
};

struct ForecastBundle {
    PointForecast point;
    DistForecast dist;
    std::vector<PeakForecast> peaks;  // bottom (hourly) forecasts only
};

/// Feature assembly shared by training and prediction: calendar block,
/// current temperatures, lags, rolling statistics, aggregated statistics,
/// in that order.
FeatureMatrix build_features(const std::vector<HourlySeries>& temps,
                             const HolidayCalendar& holidays, const FeatureConfig& fc);

struct SelectionOutcome {
    std::vector<std::string> feature_names;
    std::vector<LinkageMerge> merges;
    std::vector<FeatureCluster> clusters;
    ImportanceReport report;
    std::set<int> informative;
    std::vector<std::string> selected_columns;  // union of informative clusters
};

/// Clustered-permutation feature selection on a holdout tail of the
/// dataset: probe model on the head, correlation clustering and CPFI on
/// the holdout.
SelectionOutcome run_selection(const Dataset& ds, const PipelineConfig& cfg);

/// Full training pass over the dataset: optional log transform and
/// detrending of the target, feature assembly, optional clustered-
/// permutation feature selection, outlier down-weighting, and the boosted
/// model fit.
TrainedPipeline train_forecaster(const Dataset& ds, const PipelineConfig& cfg);

/// Forecast `horizon_len` steps starting right at `horizon_start`. The
/// supplied temperatures must cover the horizon plus the feature warm-up.
ForecastBundle predict_horizon(const TrainedPipeline& pipeline,
                               const std::vector<HourlySeries>& temps,
                               const HolidayCalendar& holidays, const TimePoint& horizon_start,
                               std::size_t horizon_len);

}  // namespace peakcast
