#pragma once

#include <span>

#include "peakcast/core.hpp"

namespace peakcast {

enum class RollingStat { Mean, Max, Min, Median, Std };

struct RollingSpec {
    RollingStat stat = RollingStat::Mean;
    int window = 24;  // in index steps, >= 1
};

enum class AggFunc { Mean, Max, Min, Median, Rms, Crest, Peak, Impulse, Margin, Shape, PeakToPeak };
enum class AggPeriod { YearMonthDay, MonthHour };

struct AggSpec {
    AggFunc func = AggFunc::Mean;
    AggPeriod period = AggPeriod::YearMonthDay;
    bool centered = false;  // required true for the signal-processing funcs
};

struct LagSpec {
    int max_lag = 48;  // lags 1..max_lag, in index steps
};

/// The seven signal-processing aggregates of a vector. The four ratio
/// statistics are undefined when the signal is identically zero; the flag
/// reports that case (rms/peak/peak_to_peak are still 0 then).
struct SignalStats {
    double rms = 0.0;
    double peak = 0.0;          // max |x|
    double crest = 0.0;         // peak / rms
    double impulse = 0.0;       // peak / mean|x|
    double margin = 0.0;        // peak / (sum |x|^(1/2))^2
    double shape = 0.0;         // rms / mean|x|
    double peak_to_peak = 0.0;  // max(x) - min(x)
    bool ratios_defined = true;
};

SignalStats signal_stats(std::span<const double> x);

/// Integer label-encoded calendar columns over n steps from `start`:
/// Year, Month, Week (ISO), Day, Weekday (Mon=1), Hour, Holiday, HolidayName,
/// Weekend, WeekOfMonth, Season (DJF=1..SON=4), DayOfYear,
/// DaysSinceLastHoliday, DaysUntilNextHoliday. The two holiday-distance
/// columns fall back to 9999 when no holiday exists in that direction.
FeatureMatrix calendar_features(const TimePoint& start, std::size_t n, int step_hours,
                                const HolidayCalendar& holidays);

/// The series' own values at time t, one column per series.
FeatureMatrix series_features(const std::vector<HourlySeries>& series);

/// One column per series and lag h in 1..max_lag holding value(t-h); the
/// first h rows of each column are masked missing.
FeatureMatrix lag_features(const std::vector<HourlySeries>& series, const LagSpec& spec);

/// Rolling statistics over the strictly-past window t-1..t-w; the first w
/// rows are masked. Std is the sample standard deviation (w-1 denominator,
/// 0 when w == 1).
FeatureMatrix rolling_features(const std::vector<HourlySeries>& series,
                               std::span<const RollingSpec> specs);

/// Group aggregates: the value at t is func over every observation sharing
/// t's group key (calendar day, or month-hour pair). Signal-processing
/// funcs see the group values minus the group mean. Each aggregate column
/// is paired with a difference column (actual minus aggregate).
FeatureMatrix aggregated_features(const std::vector<HourlySeries>& series,
                                  std::span<const AggSpec> specs);

std::vector<RollingSpec> default_rolling_specs();  // 5 stats x {3,24,168,720}
std::vector<AggSpec> default_agg_specs();          // 11 funcs x 2 periods

const char* to_string(RollingStat s);
const char* to_string(AggFunc f);
const char* to_string(AggPeriod p);

}  // namespace peakcast
