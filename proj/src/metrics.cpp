#include "peakcast/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace peakcast {

namespace {
constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kSqrt2Pi = 2.5066282746310002;
constexpr double kInvSqrtPi = 0.5641895835477563;
}  // namespace

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / kSqrt2Pi; }

double normal_cdf(double z) { return 0.5 * std::erfc(-z / kSqrt2); }

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::runtime_error("normal_quantile: p must be in (0,1)");
    // Acklam's rational approximation, then two Halley refinements.
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    double x;
    if (p < plow) {
        double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - plow) {
        double q = p - 0.5, r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    for (int it = 0; it < 2; ++it) {
        const double e = normal_cdf(x) - p;
        const double u = e * kSqrt2Pi * std::exp(0.5 * x * x);
        x = x - u / (1.0 + 0.5 * x * u);
    }
    return x;
}

double mape(std::span<const double> actual, std::span<const double> forecast) {
    if (actual.size() != forecast.size() || actual.empty())
        throw std::runtime_error("mape: length mismatch or empty input");
    double acc = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        if (actual[i] == 0.0)
            throw std::runtime_error("mape: actual value is 0 at position " + std::to_string(i));
        acc += std::abs(actual[i] - forecast[i]) / std::abs(actual[i]);
    }
    return acc / static_cast<double>(actual.size()) * 100.0;
}

double magnitude(std::span<const PeakForecast> actual, std::span<const PeakForecast> forecast) {
    if (actual.size() != forecast.size() || actual.empty())
        throw std::runtime_error("magnitude: length mismatch or empty input");
    std::vector<double> a(actual.size()), f(actual.size());
    for (std::size_t i = 0; i < actual.size(); ++i) {
        if (actual[i].year != forecast[i].year || actual[i].month != forecast[i].month ||
            actual[i].day != forecast[i].day)
            throw std::runtime_error("magnitude: mismatched dates at position " +
                                     std::to_string(i));
        a[i] = actual[i].peak_value;
        f[i] = forecast[i].peak_value;
    }
    return mape(a, f);
}

namespace {
void check_hours(std::span<const int> hours, const char* where) {
    for (int h : hours)
        if (h < 1 || h > 24)
            throw std::runtime_error(std::string(where) + ": peak hour out of [1,24]");
}
}  // namespace

double timing_qual(std::span<const int> actual_hours, std::span<const int> forecast_hours) {
    if (actual_hours.size() != forecast_hours.size() || actual_hours.empty())
        throw std::runtime_error("timing_qual: length mismatch or empty input");
    check_hours(actual_hours, "timing_qual");
    check_hours(forecast_hours, "timing_qual");
    double acc = 0.0;
    for (std::size_t i = 0; i < actual_hours.size(); ++i)
        acc += std::abs(actual_hours[i] - forecast_hours[i]);
    return acc / static_cast<double>(actual_hours.size());
}

double timing_final(std::span<const int> actual_hours, std::span<const int> forecast_hours) {
    if (actual_hours.size() != forecast_hours.size() || actual_hours.empty())
        throw std::runtime_error("timing_final: length mismatch or empty input");
    check_hours(actual_hours, "timing_final");
    check_hours(forecast_hours, "timing_final");
    double acc = 0.0;
    for (std::size_t i = 0; i < actual_hours.size(); ++i) {
        const int d = std::abs(actual_hours[i] - forecast_hours[i]);
        if (d == 0)
            acc += 0.0;
        else if (d == 1)
            acc += 1.0;
        else if (d <= 4)
            acc += 2.0 * d;
        else
            acc += 10.0;
    }
    return acc / static_cast<double>(actual_hours.size());
}

double shape(std::span<const double> actual_days, std::span<const double> forecast_days) {
    if (actual_days.size() != forecast_days.size() || actual_days.empty() ||
        actual_days.size() % 24 != 0)
        throw std::runtime_error("shape: inputs must be equal-length whole days");
    const std::size_t n_days = actual_days.size() / 24;
    double total = 0.0;
    for (std::size_t d = 0; d < n_days; ++d) {
        const double* ya = actual_days.data() + d * 24;
        const double* yf = forecast_days.data() + d * 24;
        double amax = ya[0], fmax = yf[0];
        int peak = 0;
        for (int h = 1; h < 24; ++h) {
            if (ya[h] > amax) {
                amax = ya[h];
                peak = h;
            }
            fmax = std::max(fmax, yf[h]);
        }
        if (amax <= 0.0 || fmax <= 0.0)
            throw std::runtime_error("shape: non-positive daily maximum on day " +
                                     std::to_string(d + 1));
        const int lo = std::max(0, peak - 2), hi = std::min(23, peak + 2);
        for (int h = lo; h <= hi; ++h) total += std::abs(ya[h] / amax - yf[h] / fmax);
    }
    return total / static_cast<double>(n_days);
}

double crps_gaussian(double mu, double sigma, double y) {
    if (sigma <= 0.0) throw std::runtime_error("crps_gaussian: sigma must be > 0");
    const double z = (y - mu) / sigma;
    return sigma * (z * (2.0 * normal_cdf(z) - 1.0) + 2.0 * normal_pdf(z) - kInvSqrtPi);
}

double interval_score(double lower, double upper, double y, double alpha) {
    if (lower > upper) throw std::runtime_error("interval_score: lower > upper");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::runtime_error("interval_score: alpha must be in (0,1)");
    double s = upper - lower;
    if (y < lower) s += 2.0 / alpha * (lower - y);
    if (y > upper) s += 2.0 / alpha * (y - upper);
    return s;
}

double coverage(std::span<const double> lo, std::span<const double> hi,
                std::span<const double> ys) {
    if (lo.size() != ys.size() || hi.size() != ys.size() || ys.empty())
        throw std::runtime_error("coverage: length mismatch or empty input");
    std::size_t inside = 0;
    for (std::size_t i = 0; i < ys.size(); ++i)
        if (ys[i] >= lo[i] && ys[i] <= hi[i]) ++inside;
    return 100.0 * static_cast<double>(inside) / static_cast<double>(ys.size());
}

double skill(double m_origin, double m_new) {
    const double denom = 0.5 * (m_origin + m_new);
    if (denom == 0.0) throw std::runtime_error("skill: zero metric mean");
    return (m_origin - m_new) / denom * 100.0;
}

std::pair<std::vector<double>, std::vector<double>> gaussian_interval(const DistForecast& dist,
                                                                      double coverage_level) {
    const double z = normal_quantile(0.5 + coverage_level / 2.0);
    std::vector<double> lo(dist.size()), hi(dist.size());
    for (std::size_t i = 0; i < dist.size(); ++i) {
        lo[i] = dist.mean[i] - z * dist.stddev[i];
        hi[i] = dist.mean[i] + z * dist.stddev[i];
    }
    return {std::move(lo), std::move(hi)};
}

ScoreReport score_forecast(std::span<const double> actual, const DistForecast& forecast,
                           double interval_coverage) {
    if (actual.size() != forecast.size() || actual.empty() || actual.size() % 24 != 0)
        throw std::runtime_error("score_forecast: inputs must be equal-length whole days");
    ScoreReport r;
    r.mape_h = mape(actual, forecast.mean);

    PointForecast act{forecast.start, {actual.begin(), actual.end()}};
    PointForecast fc{forecast.start, forecast.mean};
    const auto peaks_a = extract_daily_peaks(act);
    const auto peaks_f = extract_daily_peaks(fc);
    r.magnitude = magnitude(peaks_a, peaks_f);
    std::vector<int> ha(peaks_a.size()), hf(peaks_f.size());
    for (std::size_t i = 0; i < peaks_a.size(); ++i) {
        ha[i] = peaks_a[i].peak_hour;
        hf[i] = peaks_f[i].peak_hour;
    }
    r.timing_qual = timing_qual(ha, hf);
    r.timing_final = timing_final(ha, hf);
    r.shape = shape(actual, forecast.mean);

    double crps_acc = 0.0, is_acc = 0.0;
    auto [lo, hi] = gaussian_interval(forecast, interval_coverage);
    const double alpha = 1.0 - interval_coverage;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        crps_acc += crps_gaussian(forecast.mean[i], forecast.stddev[i], actual[i]);
        is_acc += interval_score(lo[i], hi[i], actual[i], alpha);
    }
    r.crps_mean = crps_acc / static_cast<double>(actual.size());
    r.interval_score_mean = is_acc / static_cast<double>(actual.size());
    r.coverage_pct = coverage(lo, hi, actual);
    return r;
}

ScoreReport skill_report(const ScoreReport& origin, const ScoreReport& improved) {
    ScoreReport s;
    s.mape_h = skill(origin.mape_h, improved.mape_h);
    s.magnitude = skill(origin.magnitude, improved.magnitude);
    s.timing_qual = origin.timing_qual + improved.timing_qual == 0.0
                        ? 0.0
                        : skill(origin.timing_qual, improved.timing_qual);
    s.timing_final = origin.timing_final + improved.timing_final == 0.0
                         ? 0.0
                         : skill(origin.timing_final, improved.timing_final);
    s.shape = origin.shape + improved.shape == 0.0 ? 0.0 : skill(origin.shape, improved.shape);
    s.crps_mean = skill(origin.crps_mean, improved.crps_mean);
    s.interval_score_mean = skill(origin.interval_score_mean, improved.interval_score_mean);
    s.coverage_pct = skill(origin.coverage_pct, improved.coverage_pct);
    return s;
}

std::vector<std::pair<std::string, double>> ScoreReport::fields() const {
    return {{"mape_h", mape_h},
            {"magnitude", magnitude},
            {"timing_qual", timing_qual},
            {"timing_final", timing_final},
            {"shape", shape},
            {"crps_mean", crps_mean},
            {"interval_score_mean", interval_score_mean},
            {"coverage_pct", coverage_pct}};
}

namespace {
std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}
}  // namespace

std::string score_report_csv(const ScoreReport& r, const ScoreReport* skill_vs) {
    std::ostringstream out;
    out << "# peakcast 1\nmetric,value";
    if (skill_vs) out << ",skill_pct";
    out << "\n";
    const auto f = r.fields();
    const auto s = skill_vs ? skill_vs->fields() : f;
    for (std::size_t i = 0; i < f.size(); ++i) {
        out << f[i].first << "," << fmt_double(f[i].second);
        if (skill_vs) out << "," << fmt_double(s[i].second);
        out << "\n";
    }
    return out.str();
}

std::string score_report_json(const ScoreReport& r, const ScoreReport* skill_vs) {
    std::ostringstream out;
    out << "{\n";
    const auto f = r.fields();
    for (std::size_t i = 0; i < f.size(); ++i)
        out << "  \"" << f[i].first << "\": " << fmt_double(f[i].second) << ",\n";
    if (skill_vs) {
        out << "  \"skill_pct\": {\n";
        const auto s = skill_vs->fields();
        for (std::size_t i = 0; i < s.size(); ++i)
            out << "    \"" << s[i].first << "\": " << fmt_double(s[i].second)
                << (i + 1 < s.size() ? ",\n" : "\n");
        out << "  },\n";
    }
    out << "  \"version\": 1\n}\n";
    return out.str();
}

}  // namespace peakcast
