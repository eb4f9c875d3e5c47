// SPDX-License-Identifier: Apache-2.0
#include "glidecast/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <string>

#include "glidecast/error.hpp"

namespace glidecast {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::string& where, const std::set<std::string>& known) {
    if (!obj.is_object()) {
        throw ConfigError(where + " must be a JSON object");
    }
    for (const auto& [key, _] : obj.items()) {
        if (!known.contains(key)) {
            throw ConfigError("unknown key '" + (where.empty() ? key : where + "." + key) + "'");
        }
    }
}

void read_double(const json& obj, const std::string& where, const char* key, double& dst) {
    if (!obj.contains(key)) {
        return;
    }
    const json& v = obj.at(key);
    if (!v.is_number()) {
        throw ConfigError(where + "." + key + " must be a number");
    }
    dst = v.get<double>();
}

template <typename Int>
void read_unsigned(const json& obj, const std::string& where, const char* key, Int& dst) {
    if (!obj.contains(key)) {
        return;
    }
    const json& v = obj.at(key);
    if (!v.is_number_unsigned()) {
        throw ConfigError(where + "." + key + " must be a non-negative integer");
    }
    dst = v.get<Int>();
}

void require(bool ok, const std::string& message) {
    if (!ok) {
        throw ConfigError(message);
    }
}

} // namespace

void RunConfig::validate() const {
    const struct {
        const char* name;
        double value;
    } constant_fields[] = {{"G", constants.G},   {"R", constants.R},   {"rho0", constants.rho0},
                           {"k", constants.k},   {"A", constants.A},   {"m", constants.m},
                           {"Cd", constants.Cd}, {"Cl", constants.Cl}};
    for (const auto& f : constant_fields) {
        require(std::isfinite(f.value) && f.value > 0.0,
                std::string("constants.") + f.name + " must be finite and > 0");
    }
    const auto& s = simulation;
    require(std::isfinite(s.dt) && s.dt > 0.0, "simulation.dt must be > 0");
    require(std::isfinite(s.t_total) && s.t_total >= 0.0, "simulation.t_total must be >= 0");
    require(std::isfinite(s.v0) && s.v0 > kMinSpeed, "simulation.v0 must be > 0");
    require(std::isfinite(s.h0), "simulation.h0 must be finite");
    require(std::isfinite(s.theta0_deg), "simulation.theta0_deg must be finite");
    require(std::isfinite(s.phi0_deg), "simulation.phi0_deg must be finite");
    try {
        ManeuverSchedule schedule(s.maneuver);
    } catch (const InvalidInputError& e) {
        throw ConfigError(std::string("simulation.maneuver: ") + e.what());
    }
    require(dataset.sequence_length >= kMinWindow, "dataset.sequence_length must be >= 3");
    require(dataset.train_fraction >= 0.0 && dataset.train_fraction <= 1.0,
            "dataset.train_fraction must lie in [0, 1]");
    require(training.batch_size >= 1, "training.batch_size must be >= 1");
    require(std::isfinite(training.learning_rate) && training.learning_rate > 0.0,
            "training.learning_rate must be > 0");
    require(training.beta1 >= 0.0 && training.beta1 < 1.0, "training.beta1 must lie in [0, 1)");
    require(training.beta2 >= 0.0 && training.beta2 < 1.0, "training.beta2 must lie in [0, 1)");
    require(std::isfinite(training.epsilon) && training.epsilon > 0.0,
            "training.epsilon must be > 0");
}

SimConfig RunConfig::sim_config() const {
    SimConfig c;
    c.dt = simulation.dt;
    c.t_total = simulation.t_total;
    c.v0 = simulation.v0;
    c.h0 = simulation.h0;
    c.theta0 = simulation.theta0_deg * std::numbers::pi / 180.0;
    c.phi0 = simulation.phi0_deg * std::numbers::pi / 180.0;
    c.maneuver = ManeuverSchedule(simulation.maneuver);
    return c;
}

TrainConfig RunConfig::train_config() const {
    TrainConfig c;
    c.epochs = training.epochs;
    c.batch_size = training.batch_size;
    c.learning_rate = training.learning_rate;
    c.beta1 = training.beta1;
    c.beta2 = training.beta2;
    c.epsilon = training.epsilon;
    c.shuffle_seed = seeds.shuffle;
    return c;
}

void RunConfig::apply_seed(std::uint64_t seed) {
    seeds.model = {seed, seed + 1, seed + 2};
    seeds.shuffle = seed;
}

RunConfig parse_config_text(std::string_view text) {
    if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) {
        return RunConfig{};
    }
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("malformed config document: ") + e.what());
    }
    RunConfig cfg;
    if (doc.is_null()) {
        return cfg;
    }
    reject_unknown(doc, "", {"constants", "simulation", "dataset", "training", "seeds"});

    if (doc.contains("constants")) {
        const json& c = doc["constants"];
        reject_unknown(c, "constants", {"G", "R", "rho0", "k", "A", "m", "Cd", "Cl"});
        auto& k = cfg.constants;
        read_double(c, "constants", "G", k.G);
        read_double(c, "constants", "R", k.R);
        read_double(c, "constants", "rho0", k.rho0);
        read_double(c, "constants", "k", k.k);
        read_double(c, "constants", "A", k.A);
        read_double(c, "constants", "m", k.m);
        read_double(c, "constants", "Cd", k.Cd);
        read_double(c, "constants", "Cl", k.Cl);
    }
    if (doc.contains("simulation")) {
        const json& s = doc["simulation"];
        reject_unknown(s, "simulation",
                       {"dt", "t_total", "v0", "h0", "theta0_deg", "phi0_deg", "maneuver"});
        auto& sim = cfg.simulation;
        read_double(s, "simulation", "dt", sim.dt);
        read_double(s, "simulation", "t_total", sim.t_total);
        read_double(s, "simulation", "v0", sim.v0);
        read_double(s, "simulation", "h0", sim.h0);
        read_double(s, "simulation", "theta0_deg", sim.theta0_deg);
        read_double(s, "simulation", "phi0_deg", sim.phi0_deg);
        if (s.contains("maneuver")) {
            const json& list = s["maneuver"];
            if (!list.is_array()) {
                throw ConfigError("simulation.maneuver must be an array");
            }
            sim.maneuver.clear();
            for (std::size_t i = 0; i < list.size(); ++i) {
                const std::string where = "simulation.maneuver[" + std::to_string(i) + "]";
                reject_unknown(list[i], where, {"t_start", "t_end", "phi_rate"});
                ManeuverSegment seg;
                for (const char* key : {"t_start", "t_end", "phi_rate"}) {
                    if (!list[i].contains(key)) {
                        throw ConfigError(where + "." + key + " is required");
                    }
                }
                read_double(list[i], where, "t_start", seg.t_start);
                read_double(list[i], where, "t_end", seg.t_end);
                read_double(list[i], where, "phi_rate", seg.phi_rate);
                sim.maneuver.push_back(seg);
            }
        }
    }
    if (doc.contains("dataset")) {
        const json& d = doc["dataset"];
        reject_unknown(d, "dataset", {"sequence_length", "train_fraction"});
        read_unsigned(d, "dataset", "sequence_length", cfg.dataset.sequence_length);
        read_double(d, "dataset", "train_fraction", cfg.dataset.train_fraction);
    }
    if (doc.contains("training")) {
        const json& t = doc["training"];
        reject_unknown(t, "training",
                       {"epochs", "batch_size", "learning_rate", "beta1", "beta2", "epsilon"});
        auto& tr = cfg.training;
        read_unsigned(t, "training", "epochs", tr.epochs);
        read_unsigned(t, "training", "batch_size", tr.batch_size);
        read_double(t, "training", "learning_rate", tr.learning_rate);
        read_double(t, "training", "beta1", tr.beta1);
        read_double(t, "training", "beta2", tr.beta2);
        read_double(t, "training", "epsilon", tr.epsilon);
    }
    if (doc.contains("seeds")) {
        const json& s = doc["seeds"];
        reject_unknown(s, "seeds", {"model", "shuffle"});
        if (s.contains("model")) {
            const json& m = s["model"];
            if (!m.is_array() || m.size() != kAxisCount) {
                throw ConfigError("seeds.model must be an array of three seeds (x, y, z)");
            }
            for (std::size_t i = 0; i < kAxisCount; ++i) {
                if (!m[i].is_number_unsigned()) {
                    throw ConfigError("seeds.model[" + std::to_string(i) +
                                      "] must be a non-negative integer");
                }
                cfg.seeds.model[i] = m[i].get<std::uint64_t>();
            }
        }
        read_unsigned(s, "seeds", "shuffle", cfg.seeds.shuffle);
    }
    cfg.validate();
    return cfg;
}

RunConfig parse_config(const std::filesystem::path& path, bool allow_defaults, std::ostream* warn) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        if (!allow_defaults) {
            throw ConfigError("config file '" + path.string() +
                              "' not found (pass --allow-defaults to run with defaults)");
        }
        if (warn) {
            *warn << "warning: config file '" << path.string()
                  << "' not found; using built-in defaults\n";
        }
        return RunConfig{};
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str());
}

json to_json(const RunConfig& cfg) {
    const auto& k = cfg.constants;
    const auto& s = cfg.simulation;
    json maneuver = json::array();
    for (const auto& seg : s.maneuver) {
        maneuver.push_back({{"t_start", seg.t_start}, {"t_end", seg.t_end}, {"phi_rate", seg.phi_rate}});
    }
    return {
        {"constants",
         {{"G", k.G}, {"R", k.R}, {"rho0", k.rho0}, {"k", k.k}, {"A", k.A}, {"m", k.m},
          {"Cd", k.Cd}, {"Cl", k.Cl}}},
        {"simulation",
         {{"dt", s.dt}, {"t_total", s.t_total}, {"v0", s.v0}, {"h0", s.h0},
          {"theta0_deg", s.theta0_deg}, {"phi0_deg", s.phi0_deg}, {"maneuver", maneuver}}},
        {"dataset",
         {{"sequence_length", cfg.dataset.sequence_length},
          {"train_fraction", cfg.dataset.train_fraction}}},
        {"training",
         {{"epochs", cfg.training.epochs}, {"batch_size", cfg.training.batch_size},
          {"learning_rate", cfg.training.learning_rate}, {"beta1", cfg.training.beta1},
          {"beta2", cfg.training.beta2}, {"epsilon", cfg.training.epsilon}}},
        {"seeds", {{"model", cfg.seeds.model}, {"shuffle", cfg.seeds.shuffle}}},
    };
}

} // namespace glidecast
