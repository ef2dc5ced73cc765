#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "peakcast/gbdt.hpp"
#include "peakcast/hierarchy.hpp"
#include "peakcast/io.hpp"
#include "peakcast/metrics.hpp"
#include "peakcast/pipeline.hpp"

namespace {

using namespace peakcast;

namespace fs = std::filesystem;

std::string out_path(const std::string& dir, const std::string& file) {
    return (fs::path(dir) / file).string();
}

void ensure_out_dir(std::string& dir) {
    if (const char* env = std::getenv("PEAKCAST_OUT"); env && dir.empty()) dir = env;
    if (dir.empty()) dir = ".";
    fs::create_directories(dir);
}

struct LoadedData {
    Dataset full;
    std::size_t train_len = 0;
};

LoadedData load_for_run(const RunConfig& rc) {
    if (rc.data_csv.empty()) throw std::runtime_error("config: data.csv is required");
    LoadedData ld;
    ld.full = ingest_csv(rc.data_csv, rc.load_column, rc.exclude_columns);
    if (!rc.holidays_csv.empty()) ld.full.holidays = ingest_holidays(rc.holidays_csv);
    if (rc.horizon_hours == 0 || rc.horizon_hours >= ld.full.load.size())
        throw std::runtime_error("config: horizon_hours must leave training data");
    ld.train_len = ld.full.load.size() - rc.horizon_hours;
    return ld;
}

Dataset head_dataset(const Dataset& full, std::size_t len, int scale = 1) {
    Dataset ds;
    ds.holidays = full.holidays;
    auto cut = [&](const HourlySeries& s) {
        HourlySeries h = s;
        h.values.assign(s.values.begin(), s.values.begin() + len);
        return scale > 1 ? aggregate_series(h, scale) : h;
    };
    ds.load = cut(full.load);
    for (const auto& t : full.temperatures) ds.temperatures.push_back(cut(t));
    return ds;
}

void apply_seed_override(RunConfig& rc, long seed) {
    if (seed < 0) return;
    rc.pipeline.boost.dart.rng_seed = static_cast<std::uint64_t>(seed);
    rc.pipeline.selection.rng_seed = static_cast<std::uint64_t>(seed);
}

int cmd_synth(const std::string& out_dir, const SyntheticSpec& spec) {
    const SyntheticResult res = gen_synthetic(spec);
    write_dataset_csv(out_path(out_dir, "data.csv"), res.dataset);
    write_holidays_csv(out_path(out_dir, "holidays.csv"), res.dataset.holidays);
    write_text_file(out_path(out_dir, "truth.json"), synthetic_truth_json(res.truth));
    std::cout << "wrote " << res.dataset.load.size() << " hours, " << spec.n_stations
              << " stations to " << out_dir << "\n";
    return 0;
}

std::string pipeline_artifacts_json(const TrainedPipeline& tp) {
    std::ostringstream out;
    out << "{\n  \"format_version\": 1,\n";
    out << "  \"log_transform\": " << (tp.cfg.log_transform ? "true" : "false") << ",\n";
    if (tp.trend)
        out << "  \"trend\": {\"beta0\": " << tp.trend->beta0 << ", \"beta1\": "
            << tp.trend->beta1 << ", \"fit_length\": " << tp.trend->fit_length << "},\n";
    else
        out << "  \"trend\": null,\n";
    std::size_t zeroed = 0;
    for (double w : tp.weights)
        if (w == 0.0) ++zeroed;
    out << "  \"outlier_quantile\": " << tp.cfg.outlier_quantile << ",\n";
    out << "  \"zero_weight_rows\": " << zeroed << ",\n";
    out << "  \"zero_weight_timestamps\": [";
    bool first = true;
    for (std::size_t i = 0; i < tp.weights.size(); ++i)
        if (tp.weights[i] == 0.0) {
            out << (first ? "" : ", ") << "\""
                << format_timestamp(tp.train_start.plus_hours(
                       static_cast<std::int64_t>(i) * tp.step_hours))
                << "\"";
            first = false;
        }
    out << "],\n  \"selected_columns\": [";
    for (std::size_t i = 0; i < tp.selected_columns.size(); ++i)
        out << (i ? ", " : "") << "\"" << tp.selected_columns[i] << "\"";
    out << "]\n}\n";
    return out.str();
}

int cmd_forecast(const std::string& config_path, std::string out_dir, long seed,
                 const std::string& ldc) {
    RunConfig rc = run_config_from_file(config_path);
    apply_seed_override(rc, seed);
    if (!ldc.empty()) rc.load_column = ldc;
    ensure_out_dir(out_dir);
    const LoadedData ld = load_for_run(rc);
    const TimePoint horizon_start = ld.full.load.time_at(ld.train_len);

    const std::vector<int> scales =
        rc.hierarchy_enabled ? rc.hierarchy_scales : std::vector<int>{1};
    for (int k : scales) {
        if (k > 1 && (ld.train_len % k != 0 || rc.horizon_hours % k != 0))
            throw std::runtime_error("hierarchy: train and horizon must be multiples of scale " +
                                     std::to_string(k));
        const Dataset train = head_dataset(ld.full, ld.train_len, k);
        const TrainedPipeline tp = train_forecaster(train, rc.pipeline);
        std::vector<HourlySeries> temps;
        for (const auto& t : ld.full.temperatures)
            temps.push_back(k > 1 ? aggregate_series(t, k) : t);
        const ForecastBundle fb =
            predict_horizon(tp, temps, ld.full.holidays, horizon_start, rc.horizon_hours / k);
        if (k == 1) {
            write_forecast_csv(out_path(out_dir, "forecasts.csv"), fb.dist);
            write_peaks_csv(out_path(out_dir, "peaks.csv"), fb.peaks);
            write_text_file(out_path(out_dir, "model.json"), ensemble_to_json(tp.model));
            write_text_file(out_path(out_dir, "pipeline.json"), pipeline_artifacts_json(tp));
            write_text_file(out_path(out_dir, "gain_importance.csv"),
                            gain_importance_csv(tp.model));
            if (tp.selection_report)
                write_text_file(out_path(out_dir, "importance.csv"),
                                importance_report_csv(*tp.selection_report, tp.informative));
        }
        if (rc.hierarchy_enabled)
            write_scale_forecast_csv(out_path(out_dir, "forecast_scale" + std::to_string(k) +
                                                           ".csv"),
                                     fb.dist, k);
        std::cout << "scale " << k << ": trained on " << ld.train_len / k
                  << " rows, forecast " << rc.horizon_hours / k << " rows\n";
    }
    return 0;
}

int cmd_select(const std::string& config_path, std::string out_dir, long seed,
               const std::string& ldc) {
    RunConfig rc = run_config_from_file(config_path);
    apply_seed_override(rc, seed);
    if (!ldc.empty()) rc.load_column = ldc;
    ensure_out_dir(out_dir);
    const LoadedData ld = load_for_run(rc);
    const Dataset train = head_dataset(ld.full, ld.train_len);
    const SelectionOutcome sel = run_selection(train, rc.pipeline);
    write_text_file(out_path(out_dir, "importance.csv"),
                    importance_report_csv(sel.report, sel.informative));
    write_text_file(out_path(out_dir, "dendrogram.csv"),
                    linkage_csv(sel.merges, sel.feature_names));
    std::cout << sel.clusters.size() << " clusters, " << sel.informative.size()
              << " informative\n";
    return 0;
}

int cmd_reconcile(const std::string& config_path, std::string in_dir, std::string out_dir) {
    RunConfig rc = run_config_from_file(config_path);
    ensure_out_dir(out_dir);
    if (in_dir.empty()) in_dir = out_dir;
    std::map<int, DistForecast> per_scale;
    for (int k : rc.hierarchy_scales) {
        const std::string path = out_path(in_dir, "forecast_scale" + std::to_string(k) + ".csv");
        int step = 0;
        per_scale[k] = read_forecast_csv(path, &step);
        if (step != k && per_scale[k].size() > 1)
            throw std::runtime_error(path + ": expected " + std::to_string(k) +
                                     "-hourly rows, found " + std::to_string(step) + "-hourly");
    }
    const HierarchyStructure hs = build_summing_matrix(rc.hierarchy_scales);
    std::vector<ReconciliationRow> report;
    const DistForecast rec = reconcile_horizon(per_scale, hs, &report);
    write_forecast_csv(out_path(out_dir, "reconciled.csv"), rec);
    PointForecast point{rec.start, rec.mean};
    write_peaks_csv(out_path(out_dir, "reconciled_peaks.csv"), extract_daily_peaks(point));
    write_reconciliation_report_csv(out_path(out_dir, "reconciliation_report.csv"), report);
    std::cout << "reconciled " << rec.size() / 24 << " days across " << rc.hierarchy_scales.size()
              << " scales\n";
    return 0;
}

int cmd_score(const std::string& actual_csv, const std::string& forecast_csv,
              const std::string& reference_csv, std::string out_dir,
              const std::string& load_column) {
    ensure_out_dir(out_dir);
    const Dataset actual = ingest_csv(actual_csv, load_column);
    const DistForecast forecast = read_forecast_csv(forecast_csv);
    const std::int64_t offset =
        forecast.start.absolute_hour() - actual.load.start.absolute_hour();
    if (offset < 0 ||
        offset + static_cast<std::int64_t>(forecast.size()) >
            static_cast<std::int64_t>(actual.load.size()))
        throw std::runtime_error("score: forecast window not covered by the actuals");
    const std::span<const double> y(actual.load.values.data() + offset, forecast.size());

    const ScoreReport report = score_forecast(y, forecast);
    if (!reference_csv.empty()) {
        const DistForecast ref = read_forecast_csv(reference_csv);
        if (!(ref.start == forecast.start) || ref.size() != forecast.size())
            throw std::runtime_error("score: reference forecast covers a different window");
        const ScoreReport ref_report = score_forecast(y, ref);
        const ScoreReport sk = skill_report(ref_report, report);
        write_text_file(out_path(out_dir, "scores.csv"), score_report_csv(report, &sk));
        write_text_file(out_path(out_dir, "scores.json"), score_report_json(report, &sk));
    } else {
        write_text_file(out_path(out_dir, "scores.csv"), score_report_csv(report));
        write_text_file(out_path(out_dir, "scores.json"), score_report_json(report));
    }
    std::cout << "mape_h " << report.mape_h << ", magnitude " << report.magnitude
              << ", timing " << report.timing_qual << ", coverage " << report.coverage_pct
              << "%\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"long-term electricity load and daily-peak forecasting toolkit"};
    app.require_subcommand(1);

    std::string config_path, out_dir, in_dir, ldc;
    long seed = -1;

    // synth
    auto* synth = app.add_subcommand("synth", "generate a seeded synthetic dataset");
    SyntheticSpec spec;
    std::string synth_out, synth_config;
    synth->add_option("--out", synth_out, "output directory")->required();
    synth->add_option("--config", synth_config, "config file with a [synth] section");
    auto* opt_seed = synth->add_option("--seed", spec.rng_seed, "generator seed");
    auto* opt_years = synth->add_option("--years", spec.years, "number of calendar years");
    auto* opt_start = synth->add_option("--start-year", spec.start_year, "first calendar year");
    auto* opt_stations = synth->add_option("--stations", spec.n_stations, "temperature stations");
    auto* opt_noise_f =
        synth->add_option("--noise-features", spec.n_noise_features, "pure-noise series");
    auto* opt_slope = synth->add_option("--trend-slope", spec.trend_slope, "MW per hour");
    auto* opt_nstd = synth->add_option("--noise-std", spec.noise_std, "load noise std (MW)");

    // forecast
    auto* forecast = app.add_subcommand("forecast", "train and forecast the horizon");
    forecast->add_option("--config", config_path, "config file")->required();
    forecast->add_option("--out", out_dir, "output directory");
    forecast->add_option("--seed", seed, "override model/selection seeds");
    forecast->add_option("--ldc", ldc, "load column name (overrides data.load_column)");

    // select-features
    auto* select = app.add_subcommand("select-features",
                                      "clustered-permutation feature selection report");
    select->add_option("--config", config_path, "config file")->required();
    select->add_option("--out", out_dir, "output directory");
    select->add_option("--seed", seed, "override model/selection seeds");
    select->add_option("--ldc", ldc, "load column name (overrides data.load_column)");

    // reconcile
    auto* reconcile = app.add_subcommand("reconcile", "reconcile per-scale forecasts");
    reconcile->add_option("--config", config_path, "config file")->required();
    reconcile->add_option("--in", in_dir, "directory with forecast_scale*.csv");
    reconcile->add_option("--out", out_dir, "output directory");
    reconcile->add_option("--seed", seed, "accepted for interface uniformity");

    // score
    auto* score = app.add_subcommand("score", "score a forecast against actuals");
    std::string actual_csv, forecast_csv, reference_csv, score_ldc = "load";
    score->add_option("--actual", actual_csv, "actuals data.csv")->required();
    score->add_option("--forecast", forecast_csv, "forecast csv")->required();
    score->add_option("--reference", reference_csv, "reference forecast for skill scores");
    score->add_option("--ldc", score_ldc, "load column name in the actuals file");
    score->add_option("--out", out_dir, "output directory");
    score->add_option("--config", config_path, "accepted for interface uniformity");
    score->add_option("--seed", seed, "accepted for interface uniformity");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) {
            if (!synth_config.empty()) {
                const ConfigFile cf = ConfigFile::parse_file(synth_config);
                if (opt_seed->empty())
                    spec.rng_seed = static_cast<std::uint64_t>(cf.get_int("synth.seed", 1));
                if (opt_years->empty()) spec.years = cf.get_int("synth.years", spec.years);
                if (opt_start->empty())
                    spec.start_year = cf.get_int("synth.start_year", spec.start_year);
                if (opt_stations->empty())
                    spec.n_stations = cf.get_int("synth.stations", spec.n_stations);
                if (opt_noise_f->empty())
                    spec.n_noise_features =
                        cf.get_int("synth.noise_features", spec.n_noise_features);
                if (opt_slope->empty())
                    spec.trend_slope = cf.get_double("synth.trend_slope", spec.trend_slope);
                if (opt_nstd->empty())
                    spec.noise_std = cf.get_double("synth.noise_std", spec.noise_std);
            }
            ensure_out_dir(synth_out);
            return cmd_synth(synth_out, spec);
        }
        if (forecast->parsed()) return cmd_forecast(config_path, out_dir, seed, ldc);
        if (select->parsed()) return cmd_select(config_path, out_dir, seed, ldc);
        if (reconcile->parsed()) return cmd_reconcile(config_path, in_dir, out_dir);
        if (score->parsed())
            return cmd_score(actual_csv, forecast_csv, reference_csv, out_dir, score_ldc);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
