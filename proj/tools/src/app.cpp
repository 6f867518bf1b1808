#include "mtt/cli/app.hpp"

#include "mtt/cli/config.hpp"
#include "mtt/cli/csv.hpp"
#include "mtt/cli/log_io.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <optional>
#include <ostream>

namespace mtt::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kVersion = "0.1.0";

struct CommonOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir = "mtt_out";
    std::optional<std::string> filter;
    std::optional<std::string> sensor;
};

struct SweepOptions {
    std::string seeds = "1..20";
    std::vector<std::string> grid;
};

/// A configuration problem detected while preparing a run (exit code 1).
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::shared_ptr<spdlog::logger> make_logger(std::ostream& err) {
    auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
    auto logger = std::make_shared<spdlog::logger>("mtt", sink);
    logger->set_pattern("[%l] %v");
    auto level = spdlog::level::warn;
    if (const char* env = std::getenv("MTT_LOG")) {
        const std::string v(env);
        if (v == "error") level = spdlog::level::err;
        else if (v == "warn") level = spdlog::level::warn;
        else if (v == "info") level = spdlog::level::info;
        else if (v == "debug") level = spdlog::level::debug;
    }
    logger->set_level(level);
    return logger;
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

ExperimentConfig prepare_config(const CommonOptions& opts) {
    ExperimentConfig cfg = opts.config_path.empty() ? parse_config("") : load_config(opts.config_path);
    auto snapshot = config_snapshot(cfg);
    if (opts.seed) snapshot["scenario.seed"] = std::to_string(*opts.seed);
    if (opts.filter) snapshot["filter.type"] = *opts.filter;
    if (opts.sensor) snapshot["sensor.type"] = *opts.sensor;
    std::string text;
    for (const auto& [k, v] : snapshot) text += k + " = " + v + "\n";
    return parse_config(text);
}

json manifest_json(const std::string& command, const ExperimentConfig& cfg, const std::string& started,
                   const std::vector<fs::path>& outputs) {
    json files = json::array();
    for (const auto& p : outputs) files.push_back(p.string());
    return {{"tool", "mtt"},
            {"version", kVersion},
            {"command", command},
            {"seed", cfg.scenario.seed},
            {"filter", std::string(to_string(cfg.filter))},
            {"sensor", std::string(to_string(cfg.sensor.kind))},
            {"config", config_snapshot(cfg)},
            {"started_at", started},
            {"finished_at", utc_timestamp()},
            {"outputs", files}};
}

struct TrackSummary {
    double mean_rmse = 0.0;
    double mean_card_err = 0.0;
};

TrackSummary summarize(const MetricReport& report) {
    TrackSummary s;
    if (report.steps.empty()) return s;
    for (const auto& m : report.steps) {
        s.mean_rmse += m.rmse;
        s.mean_card_err += m.cardinality_error;
    }
    s.mean_rmse /= static_cast<double>(report.steps.size());
    s.mean_card_err /= static_cast<double>(report.steps.size());
    return s;
}

TrackSummary track_into(const ExperimentConfig& cfg, const fs::path& dir, spdlog::logger& logger) {
    const auto started = utc_timestamp();
    Rng rng(cfg.scenario.seed);
    TrackingLog log;
    try {
        log = run_experiment(cfg, rng);
    } catch (const UnsupportedCombinationError& e) {
        throw UsageError(e.what());
    }
    const auto report = evaluate_metrics(truth_of(log), log, cfg.metrics);
    const auto degenerate = std::count_if(log.steps.begin(), log.steps.end(), [](const auto& r) { return r.degenerate; });
    if (degenerate > 0) logger.warn("{} step(s) skipped their update (no plausible combination)", degenerate);

    fs::create_directories(dir);
    const auto metrics_path = dir / "metrics.csv";
    const auto particles_path = dir / "particles.json";
    const auto manifest_path = dir / "manifest.json";
    write_csv(metrics_table(log, report), metrics_path);
    write_json(to_json(log), particles_path);
    write_json(manifest_json("track", cfg, started, {metrics_path, particles_path, manifest_path}), manifest_path);
    logger.info("wrote {}, {}, {}", metrics_path.string(), particles_path.string(), manifest_path.string());
    return summarize(report);
}

int cmd_simulate(const CommonOptions& opts, std::ostream& out, spdlog::logger& logger) {
    const auto cfg = prepare_config(opts);
    const auto started = utc_timestamp();
    Rng rng(cfg.scenario.seed);
    const auto truth = simulate_truth(cfg.scenario, rng);

    const fs::path dir(opts.out_dir);
    fs::create_directories(dir);
    const auto truth_path = dir / "truth.csv";
    const auto manifest_path = dir / "manifest.json";
    write_csv(truth_table(truth), truth_path);
    write_json(manifest_json("simulate", cfg, started, {truth_path, manifest_path}), manifest_path);
    logger.info("wrote {}", truth_path.string());
    out << "simulated " << truth.size() << " steps of " << cfg.scenario.n_targets << " target(s) -> "
        << truth_path.string() << '\n';
    return kExitOk;
}

int cmd_track(const CommonOptions& opts, std::ostream& out, spdlog::logger& logger) {
    const auto cfg = prepare_config(opts);
    const auto s = track_into(cfg, opts.out_dir, logger);
    out << "mean_rmse=" << format_number(s.mean_rmse) << " mean_card_err=" << format_number(s.mean_card_err) << '\n';
    return kExitOk;
}

int cmd_eval(const CommonOptions& opts, const std::string& log_path, std::ostream& out, spdlog::logger& logger) {
    const fs::path dir(opts.out_dir);
    ExperimentConfig cfg;
    if (!opts.config_path.empty()) {
        cfg = prepare_config(opts);
    } else if (fs::exists(dir / "manifest.json")) {
        const auto manifest = read_json(dir / "manifest.json");
        std::string text;
        for (const auto& [k, v] : manifest.at("config").items()) {
            text += k + " = " + v.get<std::string>() + "\n";
        }
        cfg = parse_config(text);
    } else {
        cfg = prepare_config(opts);
    }

    const fs::path source = log_path.empty() ? dir / "particles.json" : fs::path(log_path);
    const auto log = tracking_log_from_json(read_json(source));
    const auto report = evaluate_metrics(truth_of(log), log, cfg.metrics);
    fs::create_directories(dir);
    const auto eval_path = dir / "eval.csv";
    write_csv(metrics_table(log, report), eval_path);
    logger.info("wrote {}", eval_path.string());
    const auto s = summarize(report);
    out << "mean_rmse=" << format_number(s.mean_rmse) << " mean_card_err=" << format_number(s.mean_card_err) << '\n';
    return kExitOk;
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
    std::vector<std::uint64_t> seeds;
    try {
        if (const auto dots = text.find(".."); dots != std::string::npos) {
            const auto lo = std::stoull(text.substr(0, dots));
            const auto hi = std::stoull(text.substr(dots + 2));
            if (hi < lo) throw UsageError("--seeds: empty range '" + text + "'");
            for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
        } else {
            std::size_t start = 0;
            while (start <= text.size()) {
                const auto comma = text.find(',', start);
                seeds.push_back(std::stoull(text.substr(start, comma - start)));
                if (comma == std::string::npos) break;
                start = comma + 1;
            }
        }
    } catch (const std::logic_error&) {
        throw UsageError("--seeds: expected A..B or a comma-separated list, got '" + text + "'");
    }
    return seeds;
}

struct GridAxis {
    std::string key;
    std::vector<std::string> values;
};

GridAxis parse_grid_axis(const std::string& text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--grid: expected key=v1;v2;..., got '" + text + "'");
    GridAxis axis{text.substr(0, eq), {}};
    std::size_t start = eq + 1;
    while (true) {
        const auto semi = text.find(';', start);
        axis.values.push_back(text.substr(start, semi == std::string::npos ? std::string::npos : semi - start));
        if (semi == std::string::npos) break;
        start = semi + 1;
    }
    return axis;
}

int cmd_sweep(const CommonOptions& opts, const SweepOptions& sweep, std::ostream& out, spdlog::logger& logger) {
    const auto base = prepare_config(opts);
    const auto seeds = parse_seeds(sweep.seeds);
    std::vector<GridAxis> axes;
    for (const auto& g : sweep.grid) axes.push_back(parse_grid_axis(g));

    // Cartesian product of the parameter axes (a single empty point without axes).
    std::vector<std::vector<std::string>> points{{}};
    for (const auto& axis : axes) {
        std::vector<std::vector<std::string>> next;
        for (const auto& p : points)
            for (const auto& v : axis.values) {
                auto q = p;
                q.push_back(v);
                next.push_back(std::move(q));
            }
        points = std::move(next);
    }

    // Validate every grid point before running anything.
    std::vector<ExperimentConfig> point_configs;
    for (const auto& p : points) {
        auto snapshot = config_snapshot(base);
        for (std::size_t a = 0; a < axes.size(); ++a) {
            if (!snapshot.contains(axes[a].key)) throw ConfigError("unknown key '" + axes[a].key + "' in --grid");
            snapshot[axes[a].key] = p[a];
        }
        std::string text;
        for (const auto& [k, v] : snapshot) text += k + " = " + v + "\n";
        point_configs.push_back(parse_config(text));
    }

    const auto started = utc_timestamp();
    const fs::path dir(opts.out_dir);
    fs::create_directories(dir);

    CsvTable aggregate;
    aggregate.header = {"run", "seed"};
    for (const auto& axis : axes) aggregate.header.push_back(axis.key);
    aggregate.header.insert(aggregate.header.end(), {"mean_rmse", "mean_card_err"});

    std::vector<fs::path> outputs;
    int run = 0;
    for (std::size_t pi = 0; pi < points.size(); ++pi) {
        for (const auto seed : seeds) {
            auto cfg = point_configs[pi];
            cfg.scenario.seed = seed;
            const std::string name =
                axes.empty() ? "seed_" + std::to_string(seed) : "p" + std::to_string(pi) + "_seed_" + std::to_string(seed);
            const auto run_dir = dir / name;
            const auto s = track_into(cfg, run_dir, logger);
            for (const char* f : {"metrics.csv", "particles.json", "manifest.json"}) outputs.push_back(run_dir / f);

            std::vector<std::string> row{std::to_string(run++), std::to_string(seed)};
            row.insert(row.end(), points[pi].begin(), points[pi].end());
            row.push_back(format_number(s.mean_rmse));
            row.push_back(format_number(s.mean_card_err));
            aggregate.rows.push_back(std::move(row));
        }
    }

    const auto aggregate_path = dir / "sweep.csv";
    const auto manifest_path = dir / "manifest.json";
    write_csv(aggregate, aggregate_path);
    outputs.push_back(aggregate_path);
    outputs.push_back(manifest_path);
    write_json(manifest_json("sweep", base, started, outputs), manifest_path);
    out << "completed " << run << " run(s) -> " << aggregate_path.string() << '\n';
    return kExitOk;
}

void add_common(CLI::App* cmd, CommonOptions& opts, bool with_filter) {
    cmd->add_option("--config", opts.config_path, "Flat key = value configuration file")->check(CLI::ExistingFile);
    cmd->add_option("--seed", opts.seed, "Random seed (overrides scenario.seed)");
    cmd->add_option("--out", opts.out_dir, "Output directory")->capture_default_str();
    if (with_filter) {
        cmd->add_option("--filter", opts.filter, "Filter to run")->check(CLI::IsMember({"gpf", "pf", "kf"}));
        cmd->add_option("--sensor", opts.sensor, "Sensor model")->check(CLI::IsMember({"mean", "grid"}));
    }
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    auto logger = make_logger(err);

    CLI::App app{"Multi-target tracking experiments with a Gaussian particle filter", "mtt"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    CommonOptions opts;
    SweepOptions sweep;
    std::string log_path;

    auto* simulate = app.add_subcommand("simulate", "Generate ground truth only");
    add_common(simulate, opts, false);
    auto* track = app.add_subcommand("track", "Run one full tracking experiment");
    add_common(track, opts, true);
    auto* eval = app.add_subcommand("eval", "Recompute metrics from a particles.json log");
    add_common(eval, opts, false);
    eval->add_option("--log", log_path, "Log to evaluate (default: <out>/particles.json)");
    auto* sweep_cmd = app.add_subcommand("sweep", "Run a seed / parameter grid");
    add_common(sweep_cmd, opts, true);
    sweep_cmd->add_option("--seeds", sweep.seeds, "Seed range A..B or list a,b,c")->capture_default_str();
    sweep_cmd->add_option("--grid", sweep.grid, "Parameter axis key=v1;v2;... (repeatable)");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kExitOk : kExitConfigError;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(opts, out, *logger);
        if (track->parsed()) return cmd_track(opts, out, *logger);
        if (eval->parsed()) return cmd_eval(opts, log_path, out, *logger);
        return cmd_sweep(opts, sweep, out, *logger);
    } catch (const ConfigError& e) {
        logger->error("config error: {}", e.what());
        return kExitConfigError;
    } catch (const UsageError& e) {
        logger->error("{}", e.what());
        return kExitConfigError;
    } catch (const std::exception& e) {
        logger->error("runtime error: {}", e.what());
        return kExitRuntimeError;
    }
}

}  // namespace mtt::cli
