#include "peakcast/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace peakcast {

std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& year, int& month, int& day) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    day = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    month = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    year = static_cast<int>(y + (month <= 2));
}

bool is_leap_year(int year) {
    return (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
}

int days_in_month(int year, int month) {
    static const int lengths[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (month == 2 && is_leap_year(year)) return 29;
    return lengths[month - 1];
}

int iso_weekday(std::int64_t civil_day) {
    // 1970-01-01 was a Thursday.
    return static_cast<int>(((civil_day + 3) % 7 + 7) % 7) + 1;
}

int day_of_year(int year, int month, int day) {
    return static_cast<int>(days_from_civil(year, month, day) - days_from_civil(year, 1, 1)) + 1;
}

int iso_week_number(int year, int month, int day) {
    const int doy = day_of_year(year, month, day);
    const int wd = iso_weekday(days_from_civil(year, month, day));
    int week = (doy - wd + 10) / 7;
    if (week < 1) {
        // belongs to the last ISO week of the previous year
        return iso_week_number(year - 1, 12, 28);
    }
    if (week == 53) {
        // week 53 exists only if Dec 28 falls in it
        const int wd_dec28 = iso_weekday(days_from_civil(year, 12, 28));
        const int doy_dec28 = day_of_year(year, 12, 28);
        if ((doy_dec28 - wd_dec28 + 10) / 7 < 53) return 1;
    }
    return week;
}

bool TimePoint::valid() const {
    if (month < 1 || month > 12) return false;
    if (day < 1 || day > days_in_month(year, month)) return false;
    return hour >= 1 && hour <= 24;
}

TimePoint TimePoint::from_absolute_hour(std::int64_t h) {
    std::int64_t d = h >= 0 ? h / 24 : (h - 23) / 24;
    TimePoint tp;
    civil_from_days(d, tp.year, tp.month, tp.day);
    tp.hour = static_cast<int>(h - d * 24) + 1;
    return tp;
}

std::string TimePoint::to_string() const {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d h%02d", year, month, day, hour);
    return buf;
}

void HolidayCalendar::add(int year, int month, int day, const std::string& name) {
    days_[days_from_civil(year, month, day)] = name;
    name_ids_.clear();
}

void HolidayCalendar::rebuild_name_ids() const {
    std::set<std::string> uniq;
    for (const auto& [d, n] : days_)
        if (!n.empty()) uniq.insert(n);
    int id = 1;
    for (const auto& n : uniq) name_ids_[n] = id++;
}

int HolidayCalendar::name_id(std::int64_t civil_day) const {
    auto it = days_.find(civil_day);
    if (it == days_.end() || it->second.empty()) return 0;
    if (name_ids_.empty()) rebuild_name_ids();
    return name_ids_.at(it->second);
}

void Dataset::validate() const {
    if (load.values.empty()) throw std::runtime_error("dataset: empty load series");
    if (temperatures.empty()) throw std::runtime_error("dataset: at least one temperature series required");
    for (const auto& t : temperatures) {
        if (!(t.start == load.start) || t.size() != load.size() || t.step_hours != load.step_hours)
            throw std::runtime_error("dataset: temperature series '" + t.name +
                                     "' does not share the load time index");
    }
}

void FeatureMatrix::add_column(std::string name, std::vector<double> values,
                               std::vector<std::uint8_t> missing) {
    if (cols.empty()) {
        rows = values.size();
        if (weights.empty()) weights.assign(rows, 1.0);
    } else if (values.size() != rows) {
        throw std::runtime_error("feature matrix: column '" + name + "' has " +
                                 std::to_string(values.size()) + " rows, expected " +
                                 std::to_string(rows));
    }
    if (missing.empty()) missing.assign(values.size(), 0);
    if (missing.size() != values.size())
        throw std::runtime_error("feature matrix: mask size mismatch for column '" + name + "'");
    names.push_back(std::move(name));
    cols.push_back(std::move(values));
    miss.push_back(std::move(missing));
}

int FeatureMatrix::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return static_cast<int>(i);
    return -1;
}

bool FeatureMatrix::row_valid(std::size_t r) const {
    for (const auto& m : miss)
        if (m[r]) return false;
    return true;
}

FeatureMatrix FeatureMatrix::select(const std::vector<std::string>& keep) const {
    FeatureMatrix out;
    out.weights = weights;
    for (const auto& name : keep) {
        int c = column_index(name);
        if (c < 0) throw std::runtime_error("feature matrix: unknown column '" + name + "'");
        out.add_column(name, cols[c], miss[c]);
    }
    out.rows = rows;
    return out;
}

FeatureMatrix assemble(const std::vector<FeatureMatrix>& blocks) {
    if (blocks.empty()) throw std::runtime_error("assemble: empty block list");
    FeatureMatrix out;
    out.weights = blocks.front().weights;
    for (const auto& b : blocks) {
        if (b.rows != blocks.front().rows)
            throw std::runtime_error("assemble: blocks differ in row count");
        for (std::size_t c = 0; c < b.n_cols(); ++c) {
            if (out.column_index(b.names[c]) >= 0)
                throw std::runtime_error("assemble: duplicate column name '" + b.names[c] + "'");
            out.add_column(b.names[c], b.cols[c], b.miss[c]);
        }
    }
    out.rows = blocks.front().rows;
    return out;
}

std::vector<PeakForecast> extract_daily_peaks(const PointForecast& forecast) {
    if (forecast.start.hour != 1)
        throw std::runtime_error("extract_daily_peaks: forecast does not start at hour 1 of " +
                                 forecast.start.to_string());
    if (forecast.values.empty() || forecast.values.size() % 24 != 0) {
        TimePoint offending = forecast.start.plus_hours(
            static_cast<std::int64_t>(forecast.values.size() / 24) * 24);
        throw std::runtime_error("extract_daily_peaks: partial day at " + offending.to_string());
    }
    std::vector<PeakForecast> peaks;
    peaks.reserve(forecast.values.size() / 24);
    for (std::size_t d = 0; d * 24 < forecast.values.size(); ++d) {
        const double* day = forecast.values.data() + d * 24;
        int best = 0;
        for (int h = 1; h < 24; ++h)
            if (day[h] > day[best]) best = h;
        TimePoint tp = forecast.start.plus_hours(static_cast<std::int64_t>(d) * 24);
        peaks.push_back({tp.year, tp.month, tp.day, day[best], best + 1});
    }
    return peaks;
}

std::pair<TimePoint, std::size_t> align(const std::vector<HourlySeries>& series) {
    if (series.empty()) throw std::runtime_error("align: no series given");
    const int step = series.front().step_hours;
    std::int64_t lo = series.front().start.absolute_hour();
    std::int64_t hi = series.front().end().absolute_hour();
    for (const auto& s : series) {
        if (s.values.empty()) throw std::runtime_error("align: series '" + s.name + "' is empty");
        if (s.step_hours != step) throw std::runtime_error("align: mixed step sizes");
        lo = std::max(lo, s.start.absolute_hour());
        hi = std::min(hi, s.end().absolute_hour());
    }
    if (lo >= hi)
        throw std::runtime_error("align: series time ranges have empty intersection");
    return {TimePoint::from_absolute_hour(lo), static_cast<std::size_t>((hi - lo) / step)};
}

}  // namespace peakcast
