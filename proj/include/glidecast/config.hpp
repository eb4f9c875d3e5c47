// SPDX-License-Identifier: Apache-2.0
// Run configuration: one JSON document with nested sections. Every key is
// optional and merges over the defaults; unknown keys are rejected.
//
//   {
//     "constants":  {"G", "R", "rho0", "k", "A", "m", "Cd", "Cl"},
//     "simulation": {"dt", "t_total", "v0", "h0", "theta0_deg", "phi0_deg",
//                    "maneuver": [{"t_start", "t_end", "phi_rate"}, ...]},
//     "dataset":    {"sequence_length", "train_fraction"},
//     "training":   {"epochs", "batch_size", "learning_rate", "beta1", "beta2", "epsilon"},
//     "seeds":      {"model": [x, y, z], "shuffle"}
//   }
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "glidecast/dataset.hpp"
#include "glidecast/dynamics.hpp"
#include "glidecast/integrator.hpp"
#include "glidecast/training.hpp"

namespace glidecast {

struct SimulationSection {
    double dt = 0.1;
    double t_total = 300.0;
    double v0 = 5100.0;
    double h0 = 80000.0;
    double theta0_deg = -5.0;
    double phi0_deg = 0.0;
    std::vector<ManeuverSegment> maneuver;

    friend bool operator==(const SimulationSection&, const SimulationSection&) = default;
};

struct DatasetSection {
    std::size_t sequence_length = 10;
    double train_fraction = 0.8;

    friend bool operator==(const DatasetSection&, const DatasetSection&) = default;
};

struct TrainingSection {
    std::size_t epochs = 50;
    std::size_t batch_size = 16;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    friend bool operator==(const TrainingSection&, const TrainingSection&) = default;
};

struct SeedSection {
    std::array<std::uint64_t, kAxisCount> model{42, 43, 44};
    std::uint64_t shuffle = 42;

    friend bool operator==(const SeedSection&, const SeedSection&) = default;
};

struct RunConfig {
    PhysicalConstants constants;
    SimulationSection simulation;
    DatasetSection dataset;
    TrainingSection training;
    SeedSection seeds;

    /// Throws ConfigError naming the offending field.
    void validate() const;
    /// Degrees are converted to radians here and nowhere else.
    SimConfig sim_config() const;
    SplitSpec split_spec() const { return {dataset.train_fraction}; }
    TrainConfig train_config() const;
    /// Model seeds become {seed, seed+1, seed+2}; the shuffle seed becomes `seed`.
    void apply_seed(std::uint64_t seed);

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Parses and validates a config document. Throws ConfigError.
RunConfig parse_config_text(std::string_view text);

/// Reads `path`. A missing file yields the defaults (with a warning on
/// `warn`) only when `allow_defaults` is set; otherwise ConfigError.
RunConfig parse_config(const std::filesystem::path& path, bool allow_defaults,
                       std::ostream* warn = nullptr);

nlohmann::json to_json(const RunConfig& cfg);

} // namespace glidecast
