#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace peakcast {

// ---------------------------------------------------------------------------
// Civil date arithmetic (proleptic Gregorian, days since 1970-01-01).
// ---------------------------------------------------------------------------

std::int64_t days_from_civil(int year, int month, int day);
void civil_from_days(std::int64_t z, int& year, int& month, int& day);
bool is_leap_year(int year);
int days_in_month(int year, int month);
int iso_weekday(std::int64_t civil_day);          // Mon=1 .. Sun=7
int iso_week_number(int year, int month, int day);
int day_of_year(int year, int month, int day);    // 1..366

/// One hour of one calendar day. Hours run 1..24 (hour h covers the h-th
/// hour of the day), so "2002-01-01T00:00" in a data file is hour 1.
struct TimePoint {
    int year = 1970;
    int month = 1;  // 1..12
    int day = 1;    // 1..31
    int hour = 1;   // 1..24

    bool valid() const;
    std::int64_t civil_day() const { return days_from_civil(year, month, day); }
    /// Absolute hour index; consecutive hours differ by exactly 1.
    std::int64_t absolute_hour() const { return civil_day() * 24 + (hour - 1); }
    static TimePoint from_absolute_hour(std::int64_t h);
    TimePoint plus_hours(std::int64_t n) const { return from_absolute_hour(absolute_hour() + n); }

    std::string to_string() const;  // "YYYY-MM-DD h24"

    friend bool operator==(const TimePoint& a, const TimePoint& b) {
        return a.year == b.year && a.month == b.month && a.day == b.day && a.hour == b.hour;
    }
    friend bool operator<(const TimePoint& a, const TimePoint& b) {
        return a.absolute_hour() < b.absolute_hour();
    }
    friend bool operator<=(const TimePoint& a, const TimePoint& b) {
        return a.absolute_hour() <= b.absolute_hour();
    }
};

/// Evenly spaced series of real values (load in MW, temperature in deg F).
/// Ingested data is strictly hourly (step_hours = 1); temporally aggregated
/// series reuse the container with step_hours = aggregation scale.
struct HourlySeries {
    TimePoint start;
    std::vector<double> values;
    std::string name;
    int step_hours = 1;

    std::size_t size() const { return values.size(); }
    TimePoint time_at(std::size_t i) const {
        return start.plus_hours(static_cast<std::int64_t>(i) * step_hours);
    }
    TimePoint end() const { return time_at(values.size()); }  // one past last
};

/// Holiday dates keyed by civil day, with optional names label-encoded
/// 1..K in sorted-name order (0 = not a holiday).
class HolidayCalendar {
public:
    void add(int year, int month, int day, const std::string& name = "");
    bool contains(std::int64_t civil_day) const { return days_.count(civil_day) > 0; }
    int name_id(std::int64_t civil_day) const;
    const std::map<std::int64_t, std::string>& days() const { return days_; }
    std::size_t size() const { return days_.size(); }

private:
    std::map<std::int64_t, std::string> days_;
    mutable std::map<std::string, int> name_ids_;
    void rebuild_name_ids() const;
};

/// The ingested problem data: one load series plus at least one temperature
/// series, all sharing the same hourly index.
struct Dataset {
    HourlySeries load;
    std::vector<HourlySeries> temperatures;
    HolidayCalendar holidays;

    void validate() const;  // throws on index mismatch or empty temperatures
};

/// Named feature columns over a shared time index. Cells may be missing
/// (lag/rolling warm-up); weights are per-row training weights.
struct FeatureMatrix {
    std::vector<std::string> names;
    std::vector<std::vector<double>> cols;        // column-major
    std::vector<std::vector<std::uint8_t>> miss;  // 1 = missing, parallel to cols
    std::vector<double> weights;                  // per row, >= 0
    std::size_t rows = 0;

    std::size_t n_cols() const { return cols.size(); }
    void add_column(std::string name, std::vector<double> values,
                    std::vector<std::uint8_t> missing = {});
    int column_index(const std::string& name) const;  // -1 if absent
    bool row_valid(std::size_t r) const;              // no missing cell in row r
    /// Keep only the named columns, in the given order.
    FeatureMatrix select(const std::vector<std::string>& keep) const;
};

/// Column-wise concatenation. Blocks must share the row count and have
/// pairwise distinct column names; weights come from the first block.
FeatureMatrix assemble(const std::vector<FeatureMatrix>& blocks);

struct PointForecast {
    TimePoint start;
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    TimePoint time_at(std::size_t i) const { return start.plus_hours(static_cast<std::int64_t>(i)); }
};

/// Per-hour Gaussian predictive distribution. stddev strictly positive.
struct DistForecast {
    TimePoint start;
    std::vector<double> mean;
    std::vector<double> stddev;

    std::size_t size() const { return mean.size(); }
    TimePoint time_at(std::size_t i) const { return start.plus_hours(static_cast<std::int64_t>(i)); }
};

struct PeakForecast {
    int year = 1970;
    int month = 1;
    int day = 1;
    double peak_value = 0.0;
    int peak_hour = 1;  // 1..24
};

/// One peak per whole day of the forecast. The forecast must cover whole
/// days starting at hour 1; ties in the daily maximum go to the earliest
/// hour.
std::vector<PeakForecast> extract_daily_peaks(const PointForecast& forecast);

/// Intersection of the series' time ranges as (start, length in steps).
/// All series must share step_hours. Throws if the intersection is empty.
std::pair<TimePoint, std::size_t> align(const std::vector<HourlySeries>& series);

}  // namespace peakcast
