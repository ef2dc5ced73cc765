#include "peakcast/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace peakcast {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (char ch : line) {
        if (ch == '"') {
            quoted = !quoted;
        } else if (ch == ',' && !quoted) {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    fields.push_back(cur);
    return fields;
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& s, std::size_t line_no, const std::string& what) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error("line " + std::to_string(line_no) + ": non-numeric " + what +
                                 " value '" + s + "'");
    }
}

constexpr const char* kVersionLine = "# peakcast 1";

}  // namespace

TimePoint parse_timestamp(const std::string& text) {
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
    char sep = 0;
    const int n = std::sscanf(text.c_str(), "%d-%d-%d%c%d:%d:%d", &y, &mo, &d, &sep, &h, &mi, &s);
    if (n < 6 || (sep != 'T' && sep != ' ') || mi != 0 || (n == 7 && s != 0))
        throw std::runtime_error("bad timestamp '" + text + "' (expected YYYY-MM-DDTHH:00:00)");
    TimePoint tp{y, mo, d, h + 1};
    if (h < 0 || h > 23 || !tp.valid())
        throw std::runtime_error("bad timestamp '" + text + "'");
    return tp;
}

std::string format_timestamp(const TimePoint& tp) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:00:00", tp.year, tp.month, tp.day,
                  tp.hour - 1);
    return buf;
}

Dataset ingest_csv(const std::string& path, const std::string& load_column,
                   const std::vector<std::string>& exclude) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open data file '" + path + "'");
    std::string line;
    std::size_t line_no = 0;
    // header
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        header = split_csv_line(line);
        break;
    }
    for (auto& h : header) h = trim(h);
    if (header.size() < 3 || header[0] != "timestamp")
        throw std::runtime_error("line " + std::to_string(line_no) +
                                 ": header must be timestamp,<load>,<temperature columns>");
    int load_idx = -1;
    std::vector<int> temp_idx;
    for (std::size_t c = 1; c < header.size(); ++c) {
        if (header[c] == load_column) {
            load_idx = static_cast<int>(c);
        } else if (std::find(exclude.begin(), exclude.end(), header[c]) == exclude.end()) {
            temp_idx.push_back(static_cast<int>(c));
        }
    }
    if (load_idx < 0)
        throw std::runtime_error("data file '" + path + "': no load column named '" +
                                 load_column + "'");
    if (temp_idx.empty())
        throw std::runtime_error("data file '" + path + "': no temperature columns");

    Dataset ds;
    ds.load.name = header[load_idx];
    ds.temperatures.resize(temp_idx.size());
    for (std::size_t c = 0; c < temp_idx.size(); ++c)
        ds.temperatures[c].name = header[temp_idx[c]];

    std::int64_t prev_hour = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != header.size())
            throw std::runtime_error("line " + std::to_string(line_no) + ": expected " +
                                     std::to_string(header.size()) + " columns, found " +
                                     std::to_string(fields.size()));
        TimePoint tp;
        try {
            tp = parse_timestamp(trim(fields[0]));
        } catch (const std::exception& e) {
            throw std::runtime_error("line " + std::to_string(line_no) + ": " + e.what());
        }
        const std::int64_t ah = tp.absolute_hour();
        if (first) {
            ds.load.start = tp;
            for (auto& t : ds.temperatures) t.start = tp;
            first = false;
        } else if (ah == prev_hour) {
            throw std::runtime_error("line " + std::to_string(line_no) +
                                     ": duplicated timestamp " + tp.to_string());
        } else if (ah != prev_hour + 1) {
            throw std::runtime_error("line " + std::to_string(line_no) +
                                     ": gap or disorder before " + tp.to_string());
        }
        prev_hour = ah;
        ds.load.values.push_back(parse_double(trim(fields[load_idx]), line_no, ds.load.name));
        for (std::size_t c = 0; c < temp_idx.size(); ++c)
            ds.temperatures[c].values.push_back(
                parse_double(trim(fields[temp_idx[c]]), line_no, ds.temperatures[c].name));
    }
    if (ds.load.values.empty()) throw std::runtime_error("data file '" + path + "' has no rows");
    ds.validate();
    return ds;
}

HolidayCalendar ingest_holidays(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open holiday file '" + path + "'");
    HolidayCalendar cal;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t == "date,name" || t == "date") continue;
        const auto fields = split_csv_line(t);
        int y = 0, m = 0, d = 0;
        if (std::sscanf(fields[0].c_str(), "%d-%d-%d", &y, &m, &d) != 3 ||
            !TimePoint{y, m, d, 1}.valid())
            throw std::runtime_error("holiday file line " + std::to_string(line_no) +
                                     ": bad date '" + fields[0] + "'");
        cal.add(y, m, d, fields.size() > 1 ? trim(fields[1]) : "");
    }
    return cal;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << content;
    if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

void write_dataset_csv(const std::string& path, const Dataset& ds) {
    std::ostringstream out;
    out << kVersionLine << "\ntimestamp,load";
    for (const auto& t : ds.temperatures) out << "," << t.name;
    out << "\n";
    for (std::size_t i = 0; i < ds.load.size(); ++i) {
        out << format_timestamp(ds.load.time_at(i)) << "," << fmt(ds.load.values[i]);
        for (const auto& t : ds.temperatures) out << "," << fmt(t.values[i]);
        out << "\n";
    }
    write_text_file(path, out.str());
}

void write_holidays_csv(const std::string& path, const HolidayCalendar& cal) {
    std::ostringstream out;
    out << kVersionLine << "\ndate,name\n";
    for (const auto& [day, name] : cal.days()) {
        int y, m, d;
        civil_from_days(day, y, m, d);
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", y, m, d);
        out << buf << "," << name << "\n";
    }
    write_text_file(path, out.str());
}

void write_forecast_csv(const std::string& path, const DistForecast& dist,
                        double interval_coverage) {
    auto [lo, hi] = gaussian_interval(dist, interval_coverage);
    std::ostringstream out;
    out << kVersionLine << "\ntimestamp,mean,stddev,lo90,hi90\n";
    for (std::size_t i = 0; i < dist.size(); ++i)
        out << format_timestamp(dist.time_at(i)) << "," << fmt(dist.mean[i]) << ","
            << fmt(dist.stddev[i]) << "," << fmt(lo[i]) << "," << fmt(hi[i]) << "\n";
    write_text_file(path, out.str());
}

DistForecast read_forecast_csv(const std::string& path, int* step_hours_out) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open forecast file '" + path + "'");
    DistForecast f;
    std::string line;
    std::size_t line_no = 0;
    bool first = true, header_seen = false;
    std::int64_t prev = 0;
    int step = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            header_seen = true;  // timestamp,mean,stddev[,...]
            continue;
        }
        const auto fields = split_csv_line(line);
        if (fields.size() < 3)
            throw std::runtime_error(path + " line " + std::to_string(line_no) +
                                     ": expected timestamp,mean,stddev");
        const TimePoint tp = parse_timestamp(trim(fields[0]));
        if (first) {
            f.start = tp;
            first = false;
        } else {
            const std::int64_t d = tp.absolute_hour() - prev;
            if (d <= 0)
                throw std::runtime_error(path + " line " + std::to_string(line_no) +
                                         ": timestamps not increasing");
            if (step == 0)
                step = static_cast<int>(d);
            else if (d != step)
                throw std::runtime_error(path + " line " + std::to_string(line_no) +
                                         ": uneven time step");
        }
        prev = tp.absolute_hour();
        f.mean.push_back(parse_double(trim(fields[1]), line_no, "mean"));
        f.stddev.push_back(parse_double(trim(fields[2]), line_no, "stddev"));
    }
    if (f.mean.empty()) throw std::runtime_error("forecast file '" + path + "' has no rows");
    if (step == 0) step = 1;
    if (step_hours_out)
        *step_hours_out = step;
    else if (step != 1)
        throw std::runtime_error("forecast file '" + path + "' is " + std::to_string(step) +
                                 "-hourly; expected hourly data");
    return f;
}

void write_peaks_csv(const std::string& path, const std::vector<PeakForecast>& peaks) {
    std::ostringstream out;
    out << kVersionLine << "\ndate,peak_value,peak_hour\n";
    for (const auto& p : peaks) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", p.year, p.month, p.day);
        out << buf << "," << fmt(p.peak_value) << "," << p.peak_hour << "\n";
    }
    write_text_file(path, out.str());
}

void write_scale_forecast_csv(const std::string& path, const DistForecast& dist, int scale) {
    std::ostringstream out;
    out << kVersionLine << "\n# scale " << scale << "\ntimestamp,mean,stddev\n";
    for (std::size_t i = 0; i < dist.size(); ++i)
        out << format_timestamp(dist.start.plus_hours(static_cast<std::int64_t>(i) * scale)) << ","
            << fmt(dist.mean[i]) << "," << fmt(dist.stddev[i]) << "\n";
    write_text_file(path, out.str());
}

void write_reconciliation_report_csv(const std::string& path,
                                     const std::vector<ReconciliationRow>& rows) {
    std::ostringstream out;
    out << kVersionLine << "\nday,node,base_mean,base_var,reconciled_mean,reconciled_var\n";
    for (const auto& r : rows)
        out << r.day_index << "," << r.node << "," << fmt(r.base_mean) << "," << fmt(r.base_var)
            << "," << fmt(r.rec_mean) << "," << fmt(r.rec_var) << "\n";
    write_text_file(path, out.str());
}

// ---------------------------------------------------------------------------
// Config file
// ---------------------------------------------------------------------------

ConfigFile ConfigFile::parse_string(const std::string& text, const std::string& origin) {
    ConfigFile cf;
    std::istringstream in(text);
    std::string line, section;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw std::runtime_error(origin + " line " + std::to_string(line_no) +
                                         ": unterminated section header");
            section = trim(t.substr(1, t.size() - 2));
            continue;
        }
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(origin + " line " + std::to_string(line_no) +
                                     ": expected key = value");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty())
            throw std::runtime_error(origin + " line " + std::to_string(line_no) + ": empty key");
        cf.kv_[section.empty() ? key : section + "." + key] = value;
    }
    return cf;
}

ConfigFile ConfigFile::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_string(ss.str(), path);
}

std::string ConfigFile::get_string(const std::string& key, const std::string& def) const {
    used_[key] = true;
    auto it = kv_.find(key);
    return it == kv_.end() ? def : it->second;
}

bool ConfigFile::get_bool(const std::string& key, bool def) const {
    const std::string v = get_string(key, def ? "true" : "false");
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw std::runtime_error("config key '" + key + "': expected a boolean, got '" + v + "'");
}

int ConfigFile::get_int(const std::string& key, int def) const {
    const std::string v = get_string(key, std::to_string(def));
    try {
        std::size_t pos = 0;
        const int r = std::stoi(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return r;
    } catch (const std::exception&) {
        throw std::runtime_error("config key '" + key + "': expected an integer, got '" + v + "'");
    }
}

double ConfigFile::get_double(const std::string& key, double def) const {
    const std::string v = get_string(key, fmt(def));
    try {
        std::size_t pos = 0;
        const double r = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return r;
    } catch (const std::exception&) {
        throw std::runtime_error("config key '" + key + "': expected a number, got '" + v + "'");
    }
}

std::vector<int> ConfigFile::get_int_list(const std::string& key,
                                          const std::vector<int>& def) const {
    used_[key] = true;
    auto it = kv_.find(key);
    if (it == kv_.end()) return def;
    std::vector<int> out;
    std::stringstream ss(it->second);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const std::string t = trim(item);
        if (t.empty()) continue;
        try {
            out.push_back(std::stoi(t));
        } catch (const std::exception&) {
            throw std::runtime_error("config key '" + key + "': bad list element '" + t + "'");
        }
    }
    return out;
}

std::vector<std::string> ConfigFile::unused_keys() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : kv_)
        if (!used_.count(k)) out.push_back(k);
    return out;
}

RunConfig run_config_from_file(const std::string& path) {
    const ConfigFile cf = ConfigFile::parse_file(path);
    RunConfig rc;
    rc.data_csv = cf.get_string("data.csv", "");
    rc.holidays_csv = cf.get_string("data.holidays", "");
    rc.load_column = cf.get_string("data.load_column", rc.load_column);
    {
        std::stringstream ss(cf.get_string("data.exclude", ""));
        std::string item;
        while (std::getline(ss, item, ',')) {
            const std::string t = trim(item);
            if (!t.empty()) rc.exclude_columns.push_back(t);
        }
    }

    PipelineConfig& p = rc.pipeline;
    p.log_transform = cf.get_bool("transform.log", p.log_transform);
    p.detrend = cf.get_bool("transform.detrend", p.detrend);
    p.outlier_quantile = cf.get_double("transform.outlier_quantile", p.outlier_quantile);

    FeatureConfig& f = p.features;
    f.calendar = cf.get_bool("features.calendar", f.calendar);
    f.current_temp = cf.get_bool("features.current_temp", f.current_temp);
    f.lag_steps = cf.get_int("features.lag_hours", f.lag_steps);
    f.rolling_windows = cf.get_int_list("features.rolling_windows", f.rolling_windows);
    f.aggregated = cf.get_bool("features.aggregated", f.aggregated);

    SelectionConfig& s = p.selection;
    s.enabled = cf.get_bool("selection.enabled", s.enabled);
    const std::string method = cf.get_string("selection.method", "spearman");
    if (method == "spearman")
        s.method = CorrMethod::Spearman;
    else if (method == "pearson")
        s.method = CorrMethod::Pearson;
    else
        throw std::runtime_error("config key 'selection.method': unknown method '" + method + "'");
    s.cluster_threshold = cf.get_double("selection.cluster_threshold", s.cluster_threshold);
    s.repetitions = cf.get_int("selection.repetitions", s.repetitions);
    s.holdout_fraction = cf.get_double("selection.holdout_fraction", s.holdout_fraction);
    s.n_folds = cf.get_int("selection.folds", s.n_folds);
    s.model_iterations = cf.get_int("selection.model_iterations", s.model_iterations);
    s.rng_seed = static_cast<std::uint64_t>(cf.get_int("selection.seed",
                                                       static_cast<int>(s.rng_seed)));

    const std::string mode = cf.get_string("model.mode", "gaussian");
    if (mode == "gaussian")
        p.mode = BoostMode::GaussianNLL;
    else if (mode == "l2")
        p.mode = BoostMode::L2;
    else
        throw std::runtime_error("config key 'model.mode': unknown mode '" + mode + "'");
    BoostConfig& b = p.boost;
    b.num_iterations = cf.get_int("model.iterations", b.num_iterations);
    b.learning_rate = cf.get_double("model.learning_rate", b.learning_rate);
    b.max_leaves = cf.get_int("model.max_leaves", b.max_leaves);
    b.min_samples_leaf = cf.get_double("model.min_samples_leaf", b.min_samples_leaf);
    b.lambda_l2 = cf.get_double("model.lambda_l2", b.lambda_l2);
    b.dart.enabled = cf.get_bool("model.dart", b.dart.enabled);
    b.dart.drop_rate = cf.get_double("model.drop_rate", b.dart.drop_rate);
    b.dart.rng_seed = static_cast<std::uint64_t>(
        cf.get_int("model.dart_seed", static_cast<int>(b.dart.rng_seed)));

    rc.hierarchy_enabled = cf.get_bool("hierarchy.enabled", rc.hierarchy_enabled);
    rc.hierarchy_scales = cf.get_int_list("hierarchy.scales", rc.hierarchy_scales);
    rc.horizon_hours = static_cast<std::size_t>(
        cf.get_int("forecast.horizon_hours", static_cast<int>(rc.horizon_hours)));

    const auto unused = cf.unused_keys();
    if (!unused.empty())
        throw std::runtime_error("config: unknown key '" + unused.front() + "'");
    return rc;
}

// ---------------------------------------------------------------------------
// Synthetic data
// ---------------------------------------------------------------------------

namespace {

/// Deterministic normal deviates independent of the standard library's
/// distribution implementations.
class Randn {
public:
    explicit Randn(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}

    double uniform() {
        // splitmix64 stream
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        z ^= z >> 31;
        return (static_cast<double>(z >> 11) + 0.5) * 0x1.0p-53;
    }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u = uniform(), v = uniform();
        const double r = std::sqrt(-2.0 * std::log(u));
        const double a = 6.283185307179586 * v;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace

SyntheticResult gen_synthetic(const SyntheticSpec& spec) {
    if (spec.years < 1) throw std::runtime_error("gen_synthetic: years must be >= 1");
    if (spec.n_stations < 1) throw std::runtime_error("gen_synthetic: need at least one station");

    const TimePoint start{spec.start_year, 1, 1, 1};
    const std::int64_t end_hour = TimePoint{spec.start_year + spec.years, 1, 1, 1}.absolute_hour();
    const std::size_t n = static_cast<std::size_t>(end_hour - start.absolute_hour());

    SyntheticResult res;
    Dataset& ds = res.dataset;
    for (int y = spec.start_year; y < spec.start_year + spec.years + 1; ++y) {
        ds.holidays.add(y, 1, 1, "NewYear");
        ds.holidays.add(y, 7, 4, "Independence");
        ds.holidays.add(y, 12, 25, "Christmas");
    }

    // temperatures: shared seasonal shape, station-specific phase and noise
    std::vector<HourlySeries> temps;
    for (int st = 0; st < spec.n_stations; ++st) {
        Randn rng(spec.rng_seed * 1000003ULL + static_cast<std::uint64_t>(st) + 1);
        HourlySeries t;
        t.start = start;
        t.name = "T" + std::to_string(st + 1);
        t.values.resize(n);
        const double phase = 0.3 * static_cast<double>(st);
        double ar = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const TimePoint tp = start.plus_hours(static_cast<std::int64_t>(i));
            const double doy = day_of_year(tp.year, tp.month, tp.day) +
                               (tp.hour - 1) / 24.0;
            const double annual = -std::cos(6.283185307179586 * doy / 365.25);
            const double daily =
                std::sin(6.283185307179586 * (tp.hour - 1) / 24.0 + phase);
            ar = 0.95 * ar + 1.2 * rng.normal();
            t.values[i] = 55.0 + 22.0 * annual + 7.0 * daily + ar;
        }
        temps.push_back(std::move(t));
    }

    // true driver: mean temperature across stations, lagged
    std::vector<double> mean_temp(n, 0.0);
    for (const auto& t : temps)
        for (std::size_t i = 0; i < n; ++i) mean_temp[i] += t.values[i];
    for (double& v : mean_temp) v /= spec.n_stations;

    Randn load_rng(spec.rng_seed * 7919ULL + 17);
    ds.load.start = start;
    ds.load.name = "load";
    ds.load.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const TimePoint tp = start.plus_hours(static_cast<std::int64_t>(i));
        const double doy = day_of_year(tp.year, tp.month, tp.day);
        const int wd = iso_weekday(tp.civil_day());
        double v = spec.base_load + spec.trend_slope * static_cast<double>(i + 1);
        v += spec.daily_amplitude * std::sin(6.283185307179586 * (tp.hour - 7) / 24.0);
        v += spec.weekly_amplitude * ((wd <= 5) ? 1.0 : -1.0);
        v += spec.annual_amplitude * std::cos(6.283185307179586 * doy / 365.25);
        const std::size_t lag_i = i >= static_cast<std::size_t>(spec.temp_lag_hours)
                                      ? i - spec.temp_lag_hours
                                      : 0;
        const double temp = mean_temp[lag_i];
        if (temp < spec.comfort_temp)
            v += spec.heating_sensitivity * (spec.comfort_temp - temp);
        else
            v += spec.cooling_sensitivity * (temp - spec.comfort_temp);
        if (ds.holidays.contains(tp.civil_day())) v += spec.holiday_effect;
        v += spec.noise_std * load_rng.normal();
        ds.load.values[i] = v;
    }

    for (const auto& t : temps) res.truth.driver_columns.push_back(t.name);
    for (int j = 0; j < spec.n_noise_features; ++j) {
        Randn rng(spec.rng_seed * 524287ULL + 100 + static_cast<std::uint64_t>(j));
        HourlySeries t;
        t.start = start;
        t.name = "noise" + std::to_string(j + 1);
        t.values.resize(n);
        for (std::size_t i = 0; i < n; ++i) t.values[i] = rng.normal();
        res.truth.noise_columns.push_back(t.name);
        temps.push_back(std::move(t));
    }
    ds.temperatures = std::move(temps);
    res.truth.spec = spec;
    return res;
}

std::string synthetic_truth_json(const SyntheticTruth& truth) {
    nlohmann::json j;
    const SyntheticSpec& s = truth.spec;
    j["years"] = s.years;
    j["start_year"] = s.start_year;
    j["rng_seed"] = s.rng_seed;
    j["base_load"] = s.base_load;
    j["trend_slope"] = s.trend_slope;
    j["daily_amplitude"] = s.daily_amplitude;
    j["weekly_amplitude"] = s.weekly_amplitude;
    j["annual_amplitude"] = s.annual_amplitude;
    j["comfort_temp"] = s.comfort_temp;
    j["heating_sensitivity"] = s.heating_sensitivity;
    j["cooling_sensitivity"] = s.cooling_sensitivity;
    j["temp_lag_hours"] = s.temp_lag_hours;
    j["noise_std"] = s.noise_std;
    j["holiday_effect"] = s.holiday_effect;
    j["n_stations"] = s.n_stations;
    j["n_noise_features"] = s.n_noise_features;
    j["driver_columns"] = truth.driver_columns;
    j["noise_columns"] = truth.noise_columns;
    return j.dump(2) + "\n";
}

}  // namespace peakcast
