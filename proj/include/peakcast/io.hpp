#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "peakcast/core.hpp"
#include "peakcast/hierarchy.hpp"
#include "peakcast/metrics.hpp"
#include "peakcast/pipeline.hpp"

namespace peakcast {

TimePoint parse_timestamp(const std::string& text);   // ISO 8601, hourly
std::string format_timestamp(const TimePoint& tp);    // YYYY-MM-DDTHH:00:00

/// data.csv: header `timestamp,load,<temp columns...>`, strictly hourly
/// timestamps. Lines starting with '#' are skipped. Errors carry the
/// 1-based file line. `load_column` picks the target by name (multi-target
/// files keep one load column per target); `exclude` drops the remaining
/// target columns from the temperature set.
Dataset ingest_csv(const std::string& path, const std::string& load_column = "load",
                   const std::vector<std::string>& exclude = {});
HolidayCalendar ingest_holidays(const std::string& path);  // date[,name] rows

void write_dataset_csv(const std::string& path, const Dataset& ds);
void write_holidays_csv(const std::string& path, const HolidayCalendar& cal);

void write_forecast_csv(const std::string& path, const DistForecast& dist,
                        double interval_coverage = 0.9);
/// `step_hours_out`, when given, receives the file's time step (scale
/// forecast files are k-hourly); otherwise the file must be hourly.
DistForecast read_forecast_csv(const std::string& path, int* step_hours_out = nullptr);
void write_peaks_csv(const std::string& path, const std::vector<PeakForecast>& peaks);
void write_scale_forecast_csv(const std::string& path, const DistForecast& dist, int scale);
void write_reconciliation_report_csv(const std::string& path,
                                     const std::vector<ReconciliationRow>& rows);
void write_text_file(const std::string& path, const std::string& content);

// ---------------------------------------------------------------------------
// Config file: INI-style sections of key = value pairs, '#' comments.
// ---------------------------------------------------------------------------

class ConfigFile {
public:
    static ConfigFile parse_file(const std::string& path);
    static ConfigFile parse_string(const std::string& text, const std::string& origin = "config");

    bool has(const std::string& key) const { return kv_.count(key) > 0; }
    std::string get_string(const std::string& key, const std::string& def) const;
    bool get_bool(const std::string& key, bool def) const;
    int get_int(const std::string& key, int def) const;
    double get_double(const std::string& key, double def) const;
    std::vector<int> get_int_list(const std::string& key, const std::vector<int>& def) const;

    /// Keys the caller never looked up; used to reject typos.
    std::vector<std::string> unused_keys() const;

private:
    std::map<std::string, std::string> kv_;  // "section.key" -> value
    mutable std::map<std::string, bool> used_;
};

struct RunConfig {
    std::string data_csv;
    std::string holidays_csv;
    std::string load_column = "load";
    std::vector<std::string> exclude_columns;  // other targets in multi-target files
    PipelineConfig pipeline;
    bool hierarchy_enabled = false;
    std::vector<int> hierarchy_scales = {1, 2, 4, 6, 12};
    std::size_t horizon_hours = 8760;
};

RunConfig run_config_from_file(const std::string& path);

// ---------------------------------------------------------------------------
// Synthetic data
// ---------------------------------------------------------------------------

struct SyntheticSpec {
    int years = 4;
    int start_year = 2002;
    std::uint64_t rng_seed = 1;
    double base_load = 1000.0;       // MW
    double trend_slope = 0.01;       // MW per hour
    double daily_amplitude = 120.0;
    double weekly_amplitude = 40.0;
    double annual_amplitude = 80.0;
    double comfort_temp = 60.0;      // deg F
    double heating_sensitivity = 3.0;  // MW per deg F below comfort
    double cooling_sensitivity = 4.0;  // MW per deg F above comfort
    int temp_lag_hours = 2;
    double noise_std = 8.0;
    double holiday_effect = -60.0;
    int n_stations = 4;
    int n_noise_features = 0;
};

struct SyntheticTruth {
    SyntheticSpec spec;
    std::vector<std::string> driver_columns;  // real temperature series
    std::vector<std::string> noise_columns;
};

struct SyntheticResult {
    Dataset dataset;
    SyntheticTruth truth;
};

/// Seeded synthetic load + temperature dataset with known structure:
/// annual/daily sinusoidal temperatures with AR(1) noise per station, load
/// with linear trend, daily/weekly/annual seasonality, U-shaped lagged
/// temperature response, holiday dips, and Gaussian noise. Optional
/// pure-noise feature series are appended after the stations.
SyntheticResult gen_synthetic(const SyntheticSpec& spec);

std::string synthetic_truth_json(const SyntheticTruth& truth);

}  // namespace peakcast
