#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "peakcast/core.hpp"

namespace peakcast {

// standard normal helpers
double normal_pdf(double z);
double normal_cdf(double z);
double normal_quantile(double p);  // inverse CDF, p in (0,1)

/// Mean absolute percentage error, in percent. Errors on any zero actual.
double mape(std::span<const double> actual, std::span<const double> forecast);

/// MAPE over matched daily peak values.
double magnitude(std::span<const PeakForecast> actual, std::span<const PeakForecast> forecast);

/// Mean absolute error between actual and forecast peak hours.
double timing_qual(std::span<const int> actual_hours, std::span<const int> forecast_hours);

/// Non-uniform peak-hour cost: 0 for a hit, |d| for |d|=1, 2|d| for
/// 2<=|d|<=4, and 10 for |d|>=5, averaged over days.
double timing_final(std::span<const int> actual_hours, std::span<const int> forecast_hours);

/// Per day, both profiles are normalized by their own maximum and the
/// absolute differences are summed over the 5-hour window centred on the
/// actual peak hour (clipped to hours 1..24); mean over days. Inputs are
/// concatenated whole days of 24 values.
double shape(std::span<const double> actual_days, std::span<const double> forecast_days);

/// Closed-form CRPS of a Gaussian predictive distribution.
double crps_gaussian(double mu, double sigma, double y);

/// Interval score at nominal coverage 1-alpha.
double interval_score(double lower, double upper, double y, double alpha = 0.1);

/// Percent of observations falling inside [lo, hi].
double coverage(std::span<const double> lo, std::span<const double> hi,
                std::span<const double> ys);

/// Symmetric percentage improvement of m_new over m_origin.
double skill(double m_origin, double m_new);

/// Central (coverage) interval of each Gaussian in the forecast.
std::pair<std::vector<double>, std::vector<double>> gaussian_interval(
    const DistForecast& dist, double coverage_level = 0.9);

struct ScoreReport {
    double mape_h = 0.0;
    double magnitude = 0.0;
    double timing_qual = 0.0;
    double timing_final = 0.0;
    double shape = 0.0;
    double crps_mean = 0.0;
    double interval_score_mean = 0.0;
    double coverage_pct = 0.0;

    std::vector<std::pair<std::string, double>> fields() const;
};

/// Full report from hourly actuals vs a distributional forecast, both
/// covering the same whole days.
ScoreReport score_forecast(std::span<const double> actual, const DistForecast& forecast,
                           double interval_coverage = 0.9);

ScoreReport skill_report(const ScoreReport& origin, const ScoreReport& improved);

std::string score_report_csv(const ScoreReport& r, const ScoreReport* skill_vs = nullptr);
std::string score_report_json(const ScoreReport& r, const ScoreReport* skill_vs = nullptr);

}  // namespace peakcast
