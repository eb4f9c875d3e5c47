// SPDX-License-Identifier: Apache-2.0
#include "glidecast/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "glidecast/config.hpp"
#include "glidecast/dataset.hpp"
#include "glidecast/error.hpp"
#include "glidecast/integrator.hpp"
#include "glidecast/io.hpp"
#include "glidecast/model.hpp"
#include "glidecast/training.hpp"

namespace glidecast {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Flags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    bool allow_defaults = false;
    std::string trajectory;
    std::string models = "models";
    std::optional<std::size_t> steps;
    bool rollout = false;
};

RunConfig load_config(const Flags& f, std::ostream& err) {
    RunConfig cfg;
    if (f.config.empty()) {
        if (!f.allow_defaults) {
            throw ConfigError("--config is required (or pass --allow-defaults)");
        }
        err << "warning: no --config given; using built-in defaults\n";
    } else {
        cfg = parse_config(f.config, f.allow_defaults, &err);
    }
    if (f.seed) {
        cfg.apply_seed(*f.seed);
    }
    return cfg;
}

Trajectory obtain_trajectory(const Flags& f, const RunConfig& cfg) {
    if (!f.trajectory.empty()) {
        return read_trajectory_csv(f.trajectory);
    }
    return simulate(cfg.sim_config(), cfg.constants);
}

fs::path out_path(const Flags& f, const char* fallback) {
    return f.out.empty() ? fs::path(fallback) : fs::path(f.out);
}

json echo_document(const RunConfig& cfg, const Trajectory& traj) {
    return {{"config_echo", to_json(cfg)},
            {"trajectory",
             {{"samples", traj.size()}, {"termination", std::string(to_string(traj.termination))}}}};
}

void write_echo_beside(const fs::path& artifact, const json& echo) {
    write_text_file(fs::path(artifact.string() + ".config.json"), echo.dump(2) + "\n");
}

json axis_metrics_json(const AxisMetrics& m) {
    return {{"rmse", m.rmse},
            {"mae", m.mae},
            {"mape_percent", m.mape_percent},
            {"count", m.count},
            {"mape_excluded_count", m.mape_excluded}};
}

/// Test partition scaled with the models' own normalizer.
struct HeldOut {
    WindowedPairs test;
    SequenceDataset scaled;
};

HeldOut held_out(const Trajectory& traj, const AxisModelSet& set, const RunConfig& cfg) {
    const WindowedPairs pairs = make_windows(traj, set.length);
    auto split = chronological_split(pairs, cfg.split_spec());
    HeldOut h{std::move(split.second), {}};
    h.scaled = normalize_pairs(h.test, set.normalizer);
    return h;
}

double time_at(const Trajectory& traj, std::size_t idx) {
    if (idx < traj.size()) {
        return traj.samples[idx].t;
    }
    const double dt = traj.size() > 1 ? traj.samples[1].t - traj.samples[0].t : 0.0;
    return traj.samples.back().t + dt * static_cast<double>(idx - (traj.size() - 1));
}

int cmd_simulate(const Flags& f, std::ostream& out, std::ostream& err) {
    const RunConfig cfg = load_config(f, err);
    const Trajectory traj = simulate(cfg.sim_config(), cfg.constants);
    const fs::path path = out_path(f, "trajectory.csv");
    write_trajectory_csv(path, traj);
    write_echo_beside(path, echo_document(cfg, traj));
    out << "wrote " << traj.size() << " samples to " << path.string() << " (termination: "
        << to_string(traj.termination) << ")\n";
    return kExitSuccess;
}

int cmd_make_dataset(const Flags& f, std::ostream& out, std::ostream& err) {
    const RunConfig cfg = load_config(f, err);
    const Trajectory traj = obtain_trajectory(f, cfg);
    const PreparedData data =
        prepare_dataset(traj, cfg.dataset.sequence_length, cfg.split_spec());
    const fs::path path = out_path(f, "dataset.csv");
    std::ostringstream csv;
    write_dataset_csv(csv, data.train, data.test);
    write_text_file(path, csv.str());
    write_echo_beside(path, echo_document(cfg, traj));
    out << "wrote " << data.train.size() << " train and " << data.test.size() << " test windows to "
        << path.string() << '\n';
    return kExitSuccess;
}

int cmd_train(const Flags& f, std::ostream& out, std::ostream& err) {
    const RunConfig cfg = load_config(f, err);
    const Trajectory traj = obtain_trajectory(f, cfg);
    const PreparedData data =
        prepare_dataset(traj, cfg.dataset.sequence_length, cfg.split_spec());
    AxisModelSet set = make_model_set(cfg.dataset.sequence_length, data.normalizer, cfg.seeds.model);
    const TrainHistory history = train(set, data.train, cfg.train_config());

    const fs::path dir = out_path(f, "models");
    save_model(set, dir);
    std::ostringstream csv;
    write_history_csv(csv, history);
    write_text_file(dir / "history.csv", csv.str());
    write_text_file(dir / "config.json", echo_document(cfg, traj).dump(2) + "\n");

    for (Axis a : kAxes) {
        const auto records = history.for_axis(a);
        if (!records.empty()) {
            out << to_string(a) << ": loss " << format_double(records.front().loss) << " -> "
                << format_double(records.back().loss) << '\n';
        }
    }
    out << "wrote models to " << dir.string() << '\n';
    return kExitSuccess;
}

int cmd_evaluate(const Flags& f, std::ostream& out, std::ostream& err) {
    const RunConfig cfg = load_config(f, err);
    const AxisModelSet set = load_model(f.models);
    const Trajectory traj = obtain_trajectory(f, cfg);
    const HeldOut h = held_out(traj, set, cfg);
    const EvalReport report = evaluate(set, h.scaled);

    json per_axis = json::object();
    for (Axis a : kAxes) {
        per_axis[std::string(to_string(a))] = axis_metrics_json(report.per_axis[index(a)]);
    }
    const json doc = {{"rmse", report.rmse},
                      {"mae", report.mae},
                      {"mape_percent", report.mape_percent},
                      {"mape_excluded_count", report.mape_excluded_count},
                      {"count", report.count},
                      {"aggregation", "pooled over axes and samples"},
                      {"prediction", "teacher-forced single step"},
                      {"mape_min_abs_target_m", kMapeMinTarget},
                      {"per_axis", per_axis},
                      {"config_echo", to_json(cfg)}};
    const fs::path path = out_path(f, "metrics.json");
    write_text_file(path, doc.dump(2) + "\n");
    out << "RMSE " << format_double(report.rmse) << " m, MAE " << format_double(report.mae)
        << " m, MAPE " << format_double(report.mape_percent) << " %\n";
    return kExitSuccess;
}

int cmd_rollout(const Flags& f, std::ostream& out, std::ostream& err) {
    const RunConfig cfg = load_config(f, err);
    const AxisModelSet set = load_model(f.models);
    const Trajectory traj = obtain_trajectory(f, cfg);
    const HeldOut h = held_out(traj, set, cfg);
    if (h.test.size() == 0) {
        throw InsufficientDataError("test partition is empty; nothing to seed a rollout from");
    }
    const std::size_t steps = f.steps.value_or(h.test.size());
    const std::vector<Position> predicted = rollout(set, h.test.inputs.front(), steps);
    std::vector<double> times;
    times.reserve(steps);
    for (std::size_t k = 0; k < steps; ++k) {
        times.push_back(time_at(traj, h.test.target_index.front() + k));
    }
    const fs::path path = out_path(f, "rollout.csv");
    std::ostringstream csv;
    write_positions_csv(csv, times, predicted);
    write_text_file(path, csv.str());
    write_echo_beside(path, echo_document(cfg, traj));
    out << "wrote " << steps << " autoregressive predictions to " << path.string() << '\n';
    return kExitSuccess;
}

int cmd_plot_data(const Flags& f, std::ostream& out, std::ostream& err) {
    const RunConfig cfg = load_config(f, err);
    const AxisModelSet set = load_model(f.models);
    const Trajectory traj = obtain_trajectory(f, cfg);

    std::vector<TrajectorySample> actual;
    std::vector<Position> predicted;
    if (f.rollout) {
        const HeldOut h = held_out(traj, set, cfg);
        if (h.test.size() == 0) {
            throw InsufficientDataError("test partition is empty; nothing to seed a rollout from");
        }
        predicted = rollout(set, h.test.inputs.front(), h.test.size());
        for (std::size_t idx : h.test.target_index) {
            actual.push_back(traj.samples[idx]);
        }
    } else {
        const WindowedPairs pairs = make_windows(traj, set.length);
        const SequenceDataset scaled = normalize_pairs(pairs, set.normalizer);
        const auto preds = predict_dataset(set, scaled);
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            actual.push_back(traj.samples[pairs.target_index[i]]);
            predicted.push_back({preds[0][i], preds[1][i], preds[2][i]});
        }
    }
    const fs::path path = out_path(f, "plot.csv");
    std::ostringstream csv;
    write_plot_csv(csv, actual, predicted);
    write_text_file(path, csv.str());
    json echo = echo_document(cfg, traj);
    echo["prediction"] = f.rollout ? "autoregressive rollout from first test window"
                                   : "teacher-forced single step";
    write_echo_beside(path, echo);
    out << "wrote " << actual.size() << " aligned rows to " << path.string() << '\n';
    return kExitSuccess;
}

} // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"glidecast: glide-vehicle trajectory simulation and hybrid CNN-LSTM-GRU forecasting",
                 "glidecast"};
    app.require_subcommand(1);
    Flags flags;

    struct Command {
        const char* name;
        const char* help;
        int (*run)(const Flags&, std::ostream&, std::ostream&);
    };
    const Command commands[] = {
        {"simulate", "Integrate the flight model and write a t,x,y,z trajectory CSV", cmd_simulate},
        {"make-dataset", "Write the normalized sliding-window dataset CSV", cmd_make_dataset},
        {"train", "Train the three per-axis models and write model files plus history",
         cmd_train},
        {"evaluate", "Score the models on the held-out split and write a metrics JSON",
         cmd_evaluate},
        {"rollout", "Autoregressively predict from the first test window", cmd_rollout},
        {"plot-data", "Write actual and predicted positions side by side", cmd_plot_data},
    };
    std::vector<std::pair<CLI::App*, const Command*>> subs;
    for (const auto& c : commands) {
        CLI::App* sub = app.add_subcommand(c.name, c.help);
        sub->add_option("--config", flags.config, "Run configuration (JSON)");
        sub->add_option("--seed", flags.seed, "Override every seed (models N, N+1, N+2; shuffle N)");
        sub->add_option("--out", flags.out, "Output file or directory");
        sub->add_flag("--allow-defaults", flags.allow_defaults,
                      "Run with built-in defaults when the config is absent");
        std::string_view name = c.name;
        if (name != "simulate") {
            sub->add_option("--trajectory", flags.trajectory,
                            "Trajectory CSV to use instead of simulating from the config");
        }
        if (name == "evaluate" || name == "rollout" || name == "plot-data") {
            sub->add_option("--models", flags.models, "Directory holding model_{x,y,z}.json")
                ->capture_default_str();
        }
        if (name == "rollout") {
            sub->add_option("--steps", flags.steps, "Number of positions to predict");
        }
        if (name == "plot-data") {
            sub->add_flag("--rollout", flags.rollout,
                          "Use autoregressive rollout over the test split instead of "
                          "teacher-forced predictions");
        }
        subs.emplace_back(sub, &c);
    }

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitSuccess;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }

    for (const auto& [sub, cmd] : subs) {
        if (!sub->parsed()) {
            continue;
        }
        try {
            return cmd->run(flags, out, err);
        } catch (const ConfigError& e) {
            err << "config error: " << e.what() << '\n';
            return kExitUsage;
        } catch (const std::exception& e) {
            err << "error: " << e.what() << '\n';
            return kExitRuntimeFailure;
        }
    }
    err << "error: no command given\n";
    return kExitUsage;
}

} // namespace glidecast
