#include "peakcast/features.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <stdexcept>

namespace peakcast {

namespace {

constexpr double kMissingValue = std::numeric_limits<double>::quiet_NaN();

double vec_mean(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

double vec_median(std::vector<double> x) {
    std::sort(x.begin(), x.end());
    const std::size_t n = x.size();
    return n % 2 == 1 ? x[n / 2] : 0.5 * (x[n / 2 - 1] + x[n / 2]);
}

double vec_sample_std(std::span<const double> x) {
    if (x.size() < 2) return 0.0;
    const double m = vec_mean(x);
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

int season_of_month(int month) {
    if (month == 12 || month <= 2) return 1;  // DJF
    if (month <= 5) return 2;                 // MAM
    if (month <= 8) return 3;                 // JJA
    return 4;                                 // SON
}

}  // namespace

const char* to_string(RollingStat s) {
    switch (s) {
        case RollingStat::Mean: return "mean";
        case RollingStat::Max: return "max";
        case RollingStat::Min: return "min";
        case RollingStat::Median: return "median";
        case RollingStat::Std: return "std";
    }
    return "?";
}

const char* to_string(AggFunc f) {
    switch (f) {
        case AggFunc::Mean: return "mean";
        case AggFunc::Max: return "max";
        case AggFunc::Min: return "min";
        case AggFunc::Median: return "median";
        case AggFunc::Rms: return "rms";
        case AggFunc::Crest: return "crest";
        case AggFunc::Peak: return "peak";
        case AggFunc::Impulse: return "impulse";
        case AggFunc::Margin: return "margin";
        case AggFunc::Shape: return "shape";
        case AggFunc::PeakToPeak: return "pp";
    }
    return "?";
}

const char* to_string(AggPeriod p) {
    return p == AggPeriod::YearMonthDay ? "ymd" : "mh";
}

SignalStats signal_stats(std::span<const double> x) {
    if (x.empty()) throw std::runtime_error("signal_stats: empty input");
    const double n = static_cast<double>(x.size());
    SignalStats st;
    double sum_sq = 0.0, sum_abs = 0.0, sum_sqrt_abs = 0.0;
    double vmax = x[0], vmin = x[0];
    for (double v : x) {
        sum_sq += v * v;
        sum_abs += std::abs(v);
        sum_sqrt_abs += std::sqrt(std::abs(v));
        vmax = std::max(vmax, v);
        vmin = std::min(vmin, v);
    }
    st.rms = std::sqrt(sum_sq / n);
    st.peak = std::max(std::abs(vmax), std::abs(vmin));
    st.peak_to_peak = vmax - vmin;
    if (sum_abs == 0.0) {
        st.ratios_defined = false;
        st.crest = st.impulse = st.margin = st.shape = kMissingValue;
        return st;
    }
    const double mean_abs = sum_abs / n;
    st.crest = st.peak / st.rms;
    st.impulse = st.peak / mean_abs;
    st.margin = st.peak / (sum_sqrt_abs * sum_sqrt_abs);
    st.shape = st.rms / mean_abs;
    return st;
}

FeatureMatrix calendar_features(const TimePoint& start, std::size_t n, int step_hours,
                                const HolidayCalendar& holidays) {
    if (n == 0) throw std::runtime_error("calendar_features: empty index");
    std::vector<std::vector<double>> c(14, std::vector<double>(n));

    // sorted holiday civil days for the distance columns
    std::vector<std::int64_t> hdays;
    hdays.reserve(holidays.days().size());
    for (const auto& [d, name] : holidays.days()) hdays.push_back(d);

    for (std::size_t i = 0; i < n; ++i) {
        const TimePoint t = start.plus_hours(static_cast<std::int64_t>(i) * step_hours);
        const std::int64_t cd = t.civil_day();
        const int wd = iso_weekday(cd);
        c[0][i] = t.year;
        c[1][i] = t.month;
        c[2][i] = iso_week_number(t.year, t.month, t.day);
        c[3][i] = t.day;
        c[4][i] = wd;
        c[5][i] = t.hour;
        c[6][i] = holidays.contains(cd) ? 1 : 0;
        c[7][i] = holidays.name_id(cd);
        c[8][i] = (wd >= 6) ? 1 : 0;
        c[9][i] = (t.day - 1) / 7 + 1;
        c[10][i] = season_of_month(t.month);
        c[11][i] = day_of_year(t.year, t.month, t.day);
        // days since last holiday (<= today) and until next (>= today)
        auto it = std::upper_bound(hdays.begin(), hdays.end(), cd);
        c[12][i] = (it == hdays.begin()) ? 9999 : static_cast<double>(cd - *std::prev(it));
        auto jt = std::lower_bound(hdays.begin(), hdays.end(), cd);
        c[13][i] = (jt == hdays.end()) ? 9999 : static_cast<double>(*jt - cd);
    }

    static const char* kNames[14] = {
        "Year", "Month", "Week", "Day", "Weekday", "Hour", "Holiday", "HolidayName",
        "Weekend", "WeekOfMonth", "Season", "DayOfYear", "DaysSinceLastHoliday",
        "DaysUntilNextHoliday"};
    FeatureMatrix fm;
    for (int k = 0; k < 14; ++k) fm.add_column(kNames[k], std::move(c[k]));
    return fm;
}

FeatureMatrix series_features(const std::vector<HourlySeries>& series) {
    FeatureMatrix fm;
    for (const auto& s : series) fm.add_column(s.name, s.values);
    return fm;
}

FeatureMatrix lag_features(const std::vector<HourlySeries>& series, const LagSpec& spec) {
    if (spec.max_lag < 1) throw std::runtime_error("lag_features: max_lag must be >= 1");
    FeatureMatrix fm;
    for (const auto& s : series) {
        const std::size_t n = s.size();
        if (static_cast<std::size_t>(spec.max_lag) >= n)
            throw std::runtime_error("lag_features: max_lag " + std::to_string(spec.max_lag) +
                                     " >= length of series '" + s.name + "'");
        for (int h = 1; h <= spec.max_lag; ++h) {
            std::vector<double> col(n, kMissingValue);
            std::vector<std::uint8_t> m(n, 0);
            for (int i = 0; i < h; ++i) m[i] = 1;
            for (std::size_t i = h; i < n; ++i) col[i] = s.values[i - h];
            fm.add_column(s.name + "_lag" + std::to_string(h), std::move(col), std::move(m));
        }
    }
    return fm;
}

FeatureMatrix rolling_features(const std::vector<HourlySeries>& series,
                               std::span<const RollingSpec> specs) {
    FeatureMatrix fm;
    for (const auto& s : series) {
        const std::size_t n = s.size();
        for (const auto& spec : specs) {
            const int w = spec.window;
            if (w < 1) throw std::runtime_error("rolling_features: window must be >= 1");
            if (static_cast<std::size_t>(w) >= n)
                throw std::runtime_error("rolling_features: window " + std::to_string(w) +
                                         " >= length of series '" + s.name + "'");
            std::vector<double> col(n, kMissingValue);
            std::vector<std::uint8_t> m(n, 0);
            for (int i = 0; i < w; ++i) m[i] = 1;
            // window at t covers values[t-w .. t-1]
            switch (spec.stat) {
                case RollingStat::Mean: {
                    double acc = 0.0;
                    for (int i = 0; i < w; ++i) acc += s.values[i];
                    for (std::size_t t = w; t < n; ++t) {
                        col[t] = acc / w;
                        acc += s.values[t] - s.values[t - w];
                    }
                    break;
                }
                case RollingStat::Max:
                case RollingStat::Min: {
                    const bool want_max = spec.stat == RollingStat::Max;
                    auto dominates = [&](double a, double b) { return want_max ? a >= b : a <= b; };
                    std::deque<std::size_t> dq;  // indices with monotone values, front = extreme
                    auto push = [&](std::size_t j) {
                        while (!dq.empty() && dominates(s.values[j], s.values[dq.back()]))
                            dq.pop_back();
                        dq.push_back(j);
                    };
                    for (std::size_t j = 0; j + 1 < static_cast<std::size_t>(w); ++j) push(j);
                    for (std::size_t t = w; t < n; ++t) {
                        push(t - 1);
                        while (dq.front() + w < t) dq.pop_front();
                        col[t] = s.values[dq.front()];
                    }
                    break;
                }
                case RollingStat::Median: {
                    std::vector<double> window(s.values.begin(), s.values.begin() + w);
                    std::sort(window.begin(), window.end());
                    for (std::size_t t = w; t < n; ++t) {
                        col[t] = w % 2 == 1 ? window[w / 2]
                                            : 0.5 * (window[w / 2 - 1] + window[w / 2]);
                        if (t + 1 < n) {
                            // slide: remove values[t-w], insert values[t]
                            auto out = std::lower_bound(window.begin(), window.end(),
                                                        s.values[t - w]);
                            window.erase(out);
                            auto in = std::lower_bound(window.begin(), window.end(), s.values[t]);
                            window.insert(in, s.values[t]);
                        }
                    }
                    break;
                }
                case RollingStat::Std: {
                    for (std::size_t t = w; t < n; ++t)
                        col[t] = vec_sample_std({s.values.data() + t - w,
                                                 static_cast<std::size_t>(w)});
                    break;
                }
            }
            fm.add_column(s.name + "_roll_" + to_string(spec.stat) + std::to_string(w),
                          std::move(col), std::move(m));
        }
    }
    return fm;
}

namespace {

double agg_value(AggFunc f, std::span<const double> group, const SignalStats& centered,
                 bool& undefined) {
    undefined = false;
    switch (f) {
        case AggFunc::Mean: return vec_mean(group);
        case AggFunc::Max: return *std::max_element(group.begin(), group.end());
        case AggFunc::Min: return *std::min_element(group.begin(), group.end());
        case AggFunc::Median: return vec_median({group.begin(), group.end()});
        case AggFunc::Rms: return centered.rms;
        case AggFunc::Peak: return centered.peak;
        case AggFunc::PeakToPeak: return centered.peak_to_peak;
        case AggFunc::Crest:
            undefined = !centered.ratios_defined;
            return centered.crest;
        case AggFunc::Impulse:
            undefined = !centered.ratios_defined;
            return centered.impulse;
        case AggFunc::Margin:
            undefined = !centered.ratios_defined;
            return centered.margin;
        case AggFunc::Shape:
            undefined = !centered.ratios_defined;
            return centered.shape;
    }
    return 0.0;
}

bool is_signal_func(AggFunc f) {
    switch (f) {
        case AggFunc::Rms:
        case AggFunc::Crest:
        case AggFunc::Peak:
        case AggFunc::Impulse:
        case AggFunc::Margin:
        case AggFunc::Shape:
        case AggFunc::PeakToPeak: return true;
        default: return false;
    }
}

}  // namespace

FeatureMatrix aggregated_features(const std::vector<HourlySeries>& series,
                                  std::span<const AggSpec> specs) {
    for (const auto& spec : specs)
        if (is_signal_func(spec.func) && !spec.centered)
            throw std::runtime_error(
                "aggregated_features: signal-processing funcs require centered = true");

    FeatureMatrix fm;
    for (const auto& s : series) {
        const std::size_t n = s.size();
        // group rows by key, per period
        for (int p = 0; p < 2; ++p) {
            const AggPeriod period = p == 0 ? AggPeriod::YearMonthDay : AggPeriod::MonthHour;
            bool used = false;
            for (const auto& spec : specs) used |= spec.period == period;
            if (!used) continue;

            std::map<std::int64_t, std::vector<std::size_t>> groups;
            for (std::size_t i = 0; i < n; ++i) {
                const TimePoint t = s.time_at(i);
                const std::int64_t key = period == AggPeriod::YearMonthDay
                                             ? t.civil_day()
                                             : t.month * 100 + t.hour;
                groups[key].push_back(i);
            }

            // per group: raw values, centered values, and their stats
            struct GroupCache {
                std::vector<double> raw;
                SignalStats centered_stats;
                double mean = 0.0;
            };
            std::map<std::int64_t, GroupCache> cache;
            for (const auto& [key, idx] : groups) {
                GroupCache g;
                g.raw.reserve(idx.size());
                for (std::size_t i : idx) g.raw.push_back(s.values[i]);
                g.mean = vec_mean(g.raw);
                std::vector<double> centered(g.raw);
                for (double& v : centered) v -= g.mean;
                g.centered_stats = signal_stats(centered);
                cache.emplace(key, std::move(g));
            }

            for (const auto& spec : specs) {
                if (spec.period != period) continue;
                std::vector<double> agg(n), diff(n);
                std::vector<std::uint8_t> m(n, 0);
                for (const auto& [key, idx] : groups) {
                    const GroupCache& g = cache.at(key);
                    bool undefined = false;
                    const double v = agg_value(spec.func, g.raw, g.centered_stats, undefined);
                    for (std::size_t i : idx) {
                        agg[i] = undefined ? kMissingValue : v;
                        diff[i] = undefined ? kMissingValue : s.values[i] - v;
                        m[i] = undefined ? 1 : 0;
                    }
                }
                const std::string base = s.name + "_agg_" + to_string(period) + "_" +
                                         to_string(spec.func);
                fm.add_column(base, std::move(agg), m);
                fm.add_column(s.name + "_aggdiff_" + to_string(period) + "_" + to_string(spec.func),
                              std::move(diff), std::move(m));
            }
        }
    }
    return fm;
}

std::vector<RollingSpec> default_rolling_specs() {
    std::vector<RollingSpec> specs;
    for (int w : {3, 24, 168, 720})
        for (RollingStat s : {RollingStat::Mean, RollingStat::Max, RollingStat::Min,
                              RollingStat::Median, RollingStat::Std})
            specs.push_back({s, w});
    return specs;
}

std::vector<AggSpec> default_agg_specs() {
    std::vector<AggSpec> specs;
    for (AggPeriod p : {AggPeriod::YearMonthDay, AggPeriod::MonthHour})
        for (AggFunc f : {AggFunc::Mean, AggFunc::Max, AggFunc::Min, AggFunc::Median,
                          AggFunc::Rms, AggFunc::Crest, AggFunc::Peak, AggFunc::Impulse,
                          AggFunc::Margin, AggFunc::Shape, AggFunc::PeakToPeak})
            specs.push_back({f, p, is_signal_func(f)});
    return specs;
}

}  // namespace peakcast
