// Command-line front end: simulate | ingest | estimate | tune | recover.
//
// Exit codes: 0 success (and recover pass), 1 recover tolerance failure,
// 2 usage error, 3 parse error, 4 validation error, 5 numerical error.

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "cdt/config.hpp"
#include "cdt/errors.hpp"
#include "cdt/ingest.hpp"
#include "cdt/io.hpp"
#include "cdt/kalman.hpp"
#include "cdt/layout.hpp"
#include "cdt/svar.hpp"

namespace fs = std::filesystem;
using namespace cdt;

namespace {

constexpr const char* kVersion = "0.1.0";

using Manifest = std::vector<std::pair<std::string, std::string>>;

void echo_config(const KeyValues& kv, Manifest& manifest) {
    for (const auto& [key, value] : kv.entries()) manifest.emplace_back("cfg." + key, value);
}

fs::path ensure_output_dir(const std::string& output) {
    fs::path dir = output.empty() ? fs::path(".") : fs::path(output);
    fs::create_directories(dir);
    return dir;
}

/// Merged option state for one subcommand: config file first, flags override.
struct Options {
    std::string config_path;
    std::string input;
    std::string output;
    bool plots = false;
    bool stddev = false;
    bool do_standardize = false;
    KeyValues kv;

    void add_common(CLI::App* cmd) {
        cmd->add_option("--config", config_path, "flat key=value config file");
        cmd->add_option("--output", output, "output directory (default .)");
    }

    // flag-to-key overrides registered through CLI11 callbacks
    void add_override(CLI::App* cmd, const std::string& flag, const std::string& key,
                      const std::string& desc) {
        cmd->add_option_function<std::string>(
            flag, [this, key](const std::string& v) { overrides.emplace_back(key, v); }, desc);
    }

    void finalize() {
        if (!config_path.empty()) kv = KeyValues::from_file(config_path);
        for (const auto& [key, value] : overrides) kv.set(key, value);
    }

    std::vector<std::pair<std::string, std::string>> overrides;
};

std::vector<std::string> series_labels(const ObservationSeries<double>& series,
                                       const KeyValues& kv) {
    if (kv.has("labels")) return labels_from_config(kv, series.channels());
    return series.channel_labels;
}

ObservationSeries<double> ingest_directory(const fs::path& dir, const KeyValues& kv,
                                           bool do_standardize, Manifest& manifest) {
    std::vector<int> channels;
    if (kv.has("channels")) channels = parse_int_list(kv.get("channels"));
    const auto snapshots = read_snapshot_dir(dir, channels);
    const FeatureKind feature = feature_kind_from_string(kv.get_or("feature", "rms"));
    const double gap = kv.has("gap_threshold") ? kv.get_double("gap_threshold")
                                               : default_gap_threshold(snapshots);
    auto series = to_observation_series(snapshots, feature, gap);
    if (do_standardize || kv.get_int_or("standardize", 0) != 0) series = standardize(series);
    manifest.emplace_back("snapshots", std::to_string(snapshots.size()));
    manifest.emplace_back("feature", to_string(feature));
    manifest.emplace_back("gap_threshold_seconds", format_double(gap));
    return series;
}

ObservationSeries<double> load_input(const std::string& input, const KeyValues& kv,
                                     bool do_standardize, Manifest& manifest) {
    if (input.empty()) throw validation_error("--input is required");
    const fs::path path(input);
    if (fs::is_directory(path)) return ingest_directory(path, kv, do_standardize, manifest);
    manifest.emplace_back("input_digest", file_digest(path));
    return read_series_csv(path);
}

NoiseConfig<double> noise_from_config(const KeyValues& kv) {
    NoiseConfig<double> noise;
    noise.q = kv.get_double_or("q", 1e-5);
    noise.r = kv.get_double_or("r", 1.0);
    noise.p0 = kv.get_double_or("p0", 1.0);
    return noise;
}

struct EstimateOutput {
    std::vector<double> time;
    std::vector<VectorX<double>> means;
    std::vector<VectorX<double>> stddevs;
};

EstimateOutput run_estimator(const ObservationSeries<double>& series, const StateLayout& layout,
                             const NoiseConfig<double>& noise, const std::string& mode,
                             int lag_depth) {
    const auto result = filter_pass(series, layout, noise);
    std::vector<Belief<double>> beliefs;
    if (mode == "filter") {
        for (const auto& step : result.steps) beliefs.push_back(step.filtered);
    } else if (mode == "smooth") {
        beliefs = rts_smooth(result);
    } else if (mode == "fixed-lag") {
        beliefs = fixed_lag_smooth(result, lag_depth);
    } else {
        throw validation_error("unknown mode: " + mode + " (expected filter|smooth|fixed-lag)");
    }

    EstimateOutput out;
    for (std::size_t i = 0; i < beliefs.size(); ++i) {
        out.time.push_back(series.timestamps[result.steps[i].n]);
        out.means.push_back(beliefs[i].mean);
        out.stddevs.push_back(beliefs[i].cov.diagonal().cwiseMax(0.0).cwiseSqrt());
    }
    return out;
}

void write_factor_plots(const fs::path& dir, const StateLayout& layout,
                        const EstimateOutput& est) {
    for (int k = 0; k < layout.nodes(); ++k) {
        std::vector<PlotSeries> curves;
        for (int off = 0; off < layout.block_size(); ++off) {
            const int idx = layout.block_start(k) + off;
            PlotSeries curve;
            curve.name = layout.column_name(idx);
            for (const auto& mean : est.means) curve.y.push_back(mean[idx]);
            curves.push_back(std::move(curve));
        }
        const std::string label = layout.graph().node_labels[k];
        write_svg_plot(dir / ("factors_" + label + ".svg"),
                       "Causal factors into " + label, est.time, curves);
    }
}

int cmd_simulate(Options& opt) {
    opt.finalize();
    const auto spec = svar_spec_from_config(opt.kv);
    const auto report = validate(spec);
    if (!report.ok) {
        for (const auto& f : report.failures)
            std::cerr << "invalid schedule at index " << f.index << ": " << f.reason << "\n";
        return 4;
    }
    const auto sim = simulate(spec);

    const int g = spec.schedule.base.nodes();
    const auto labels = labels_from_config(opt.kv, g);
    StateLayout layout(GraphSpec{g, labels});

    auto series = sim.series;
    series.channel_labels = labels;

    const fs::path dir = ensure_output_dir(opt.output);
    write_series_csv(dir / "series.csv", series);

    std::vector<double> time;
    std::vector<VectorX<double>> truth;
    for (int n = 0; n < series.samples(); ++n) {
        time.push_back(series.timestamps[n]);
        truth.push_back(pack(sim.truth[n], layout));
    }
    write_trajectory_csv(dir / "truth.csv", layout, time, truth);

    Manifest manifest{{"command", "simulate"}, {"version", kVersion}};
    echo_config(opt.kv, manifest);
    manifest.emplace_back("series_digest", file_digest(dir / "series.csv"));
    manifest.emplace_back("truth_digest", file_digest(dir / "truth.csv"));
    write_manifest(dir / "manifest.txt", manifest);
    std::cout << "wrote " << (dir / "series.csv").string() << " (" << series.samples()
              << " samples, G=" << g << ")\n";
    return 0;
}

int cmd_ingest(Options& opt) {
    opt.finalize();
    Manifest manifest{{"command", "ingest"}, {"version", kVersion}};
    if (opt.input.empty()) throw validation_error("--input snapshot directory is required");
    auto series = ingest_directory(opt.input, opt.kv, opt.do_standardize, manifest);
    if (opt.kv.has("labels")) series.channel_labels = labels_from_config(opt.kv, series.channels());

    const fs::path dir = ensure_output_dir(opt.output);
    write_series_csv(dir / "series.csv", series);
    echo_config(opt.kv, manifest);
    manifest.emplace_back("series_digest", file_digest(dir / "series.csv"));
    write_manifest(dir / "manifest.txt", manifest);
    std::cout << "wrote " << (dir / "series.csv").string() << " (" << series.samples()
              << " samples, G=" << series.channels() << ")\n";
    return 0;
}

int cmd_estimate(Options& opt) {
    opt.finalize();
    Manifest manifest{{"command", "estimate"}, {"version", kVersion}};
    const auto series = load_input(opt.input, opt.kv, opt.do_standardize, manifest);

    StateLayout layout(GraphSpec{series.channels(), series_labels(series, opt.kv)});
    const auto noise = noise_from_config(opt.kv);
    const std::string mode = opt.kv.get_or("mode", "smooth");
    const int lag_depth = static_cast<int>(opt.kv.get_int_or("lag_depth", 0));
    const auto est = run_estimator(series, layout, noise, mode, lag_depth);

    const fs::path dir = ensure_output_dir(opt.output);
    const bool with_sd = opt.stddev || opt.kv.get_int_or("stddev", 0) != 0;
    write_trajectory_csv(dir / "estimates.csv", layout, est.time, est.means,
                         with_sd ? &est.stddevs : nullptr);
    if (opt.plots || opt.kv.get_int_or("plots", 0) != 0) write_factor_plots(dir, layout, est);

    echo_config(opt.kv, manifest);
    manifest.emplace_back("mode", mode);
    manifest.emplace_back("estimates_digest", file_digest(dir / "estimates.csv"));
    write_manifest(dir / "manifest.txt", manifest);
    std::cout << "wrote " << (dir / "estimates.csv").string() << " (" << est.time.size()
              << " steps, " << layout.dim() << " factors)\n";
    return 0;
}

int cmd_tune(Options& opt) {
    opt.finalize();
    Manifest manifest{{"command", "tune"}, {"version", kVersion}};
    const auto series = load_input(opt.input, opt.kv, opt.do_standardize, manifest);
    StateLayout layout(GraphSpec{series.channels(), series_labels(series, opt.kv)});

    const auto q_grid = parse_double_list(opt.kv.get("q_grid"));
    const auto r_grid = parse_double_list(opt.kv.get("r_grid"));
    const double p0 = opt.kv.get_double_or("p0", 1.0);
    const auto tuned = tune_noise(series, layout, q_grid, r_grid, p0);

    const fs::path dir = ensure_output_dir(opt.output);
    {
        std::ofstream out(dir / "tune.csv");
        out << "q,r,loglik,selected\n";
        for (const auto& entry : tuned.table)
            out << format_double(entry.q) << ',' << format_double(entry.r) << ','
                << format_double(entry.loglik) << ','
                << (entry.q == tuned.best.q && entry.r == tuned.best.r ? 1 : 0) << '\n';
    }
    echo_config(opt.kv, manifest);
    manifest.emplace_back("selected_q", format_double(tuned.best.q));
    manifest.emplace_back("selected_r", format_double(tuned.best.r));
    manifest.emplace_back("selected_p0", format_double(tuned.best.p0));
    write_manifest(dir / "manifest.txt", manifest);
    std::cout << "selected q=" << format_double(tuned.best.q)
              << " r=" << format_double(tuned.best.r) << "\n";
    return 0;
}

int cmd_recover(Options& opt) {
    opt.finalize();
    const auto spec = svar_spec_from_config(opt.kv);
    const auto sim = simulate(spec);

    const int g = spec.schedule.base.nodes();
    StateLayout layout(GraphSpec{g, labels_from_config(opt.kv, g)});
    const auto noise = noise_from_config(opt.kv);
    const std::string mode = opt.kv.get_or("mode", "smooth");
    const int lag_depth = static_cast<int>(opt.kv.get_int_or("lag_depth", 0));
    const auto est = run_estimator(sim.series, layout, noise, mode, lag_depth);

    const int n = sim.series.samples();
    const int score_start = static_cast<int>(opt.kv.get_int_or("score_start", n / 4));
    const double tolerance = opt.kv.get_double_or("tolerance", 0.05);

    VectorX<double> sq_err = VectorX<double>::Zero(layout.dim());
    int scored = 0;
    for (std::size_t i = 0; i < est.means.size(); ++i) {
        const int step_n = static_cast<int>(i) + 1; // steps cover n = 1 .. N-1
        if (step_n < score_start) continue;
        const VectorX<double> truth = pack(sim.truth[step_n], layout);
        sq_err += (est.means[i] - truth).cwiseAbs2();
        ++scored;
    }
    if (scored == 0) throw validation_error("score window is empty");
    const VectorX<double> rmse = (sq_err / scored).cwiseSqrt();
    const bool pass = (rmse.array() <= tolerance).all();

    const fs::path dir = ensure_output_dir(opt.output);
    {
        std::ofstream out(dir / "recover.csv");
        out << "factor,rmse\n";
        for (int i = 0; i < layout.dim(); ++i)
            out << layout.column_name(i) << ',' << format_double(rmse[i]) << '\n';
    }
    Manifest manifest{{"command", "recover"}, {"version", kVersion}};
    echo_config(opt.kv, manifest);
    manifest.emplace_back("mode", mode);
    manifest.emplace_back("scored_steps", std::to_string(scored));
    manifest.emplace_back("tolerance", format_double(tolerance));
    manifest.emplace_back("max_rmse", format_double(rmse.maxCoeff()));
    manifest.emplace_back("result", pass ? "pass" : "fail");
    manifest.emplace_back("recover_digest", file_digest(dir / "recover.csv"));
    write_manifest(dir / "manifest.txt", manifest);

    std::cout << (pass ? "PASS" : "FAIL") << " max per-factor RMSE "
              << format_double(rmse.maxCoeff()) << " vs tolerance " << format_double(tolerance)
              << " over " << scored << " steps\n";
    return pass ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Causal factor estimation for connected assets"};
    app.require_subcommand(1);

    Options opt;
    int (*run)(Options&) = nullptr;

    auto* simulate_cmd = app.add_subcommand("simulate", "generate a synthetic series with known factors");
    auto* ingest_cmd = app.add_subcommand("ingest", "parse a snapshot directory into a series CSV");
    auto* estimate_cmd = app.add_subcommand("estimate", "estimate causal factor trajectories");
    auto* tune_cmd = app.add_subcommand("tune", "grid-search noise settings by log-likelihood");
    auto* recover_cmd = app.add_subcommand("recover", "simulate, estimate, and score recovery");

    for (auto* cmd : {simulate_cmd, ingest_cmd, estimate_cmd, tune_cmd, recover_cmd}) {
        opt.add_common(cmd);
        opt.add_override(cmd, "--seed", "seed", "simulation seed");
    }
    for (auto* cmd : {ingest_cmd, estimate_cmd, tune_cmd}) {
        cmd->add_option("--input", opt.input, "input series CSV or snapshot directory");
        opt.add_override(cmd, "--feature", "feature", "rms|kurtosis|peak|crest");
        opt.add_override(cmd, "--channels", "channels", "comma-separated raw column indices");
        opt.add_override(cmd, "--gap-threshold", "gap_threshold", "contiguity threshold, seconds");
        cmd->add_flag("--standardize", opt.do_standardize, "standardize channels");
    }
    for (auto* cmd : {estimate_cmd, recover_cmd}) {
        opt.add_override(cmd, "--mode", "mode", "filter|smooth|fixed-lag");
        opt.add_override(cmd, "--lag-depth", "lag_depth", "fixed-lag smoother depth L");
        opt.add_override(cmd, "--q", "q", "process noise scale");
        opt.add_override(cmd, "--r", "r", "measurement noise scale");
        opt.add_override(cmd, "--p0", "p0", "initial state variance");
    }
    estimate_cmd->add_flag("--plots", opt.plots, "write per-node SVG factor plots");
    estimate_cmd->add_flag("--stddev", opt.stddev, "append posterior stddev columns");
    opt.add_override(tune_cmd, "--q-grid", "q_grid", "comma-separated q candidates");
    opt.add_override(tune_cmd, "--r-grid", "r_grid", "comma-separated r candidates");
    opt.add_override(recover_cmd, "--tolerance", "tolerance", "per-factor RMSE tolerance");

    simulate_cmd->callback([&] { run = cmd_simulate; });
    ingest_cmd->callback([&] { run = cmd_ingest; });
    estimate_cmd->callback([&] { run = cmd_estimate; });
    tune_cmd->callback([&] { run = cmd_tune; });
    recover_cmd->callback([&] { run = cmd_recover; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        return run(opt);
    } catch (const parse_error& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 3;
    } catch (const validation_error& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 4;
    } catch (const numerical_error& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 5;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
}
