// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "glidecast/dynamics.hpp"

namespace glidecast {

/// A constant heading rate applied on [t_start, t_end).
struct ManeuverSegment {
    double t_start = 0.0;
    double t_end = 0.0;
    double phi_rate = 0.0;  ///< rad/s

    friend bool operator==(const ManeuverSegment&, const ManeuverSegment&) = default;
};

/// Piecewise-constant heading-rate schedule. Segments are time-sorted and
/// disjoint; outside every segment the heading rate is zero.
class ManeuverSchedule {
public:
    ManeuverSchedule() = default;
    /// Throws InvalidInputError if segments are unsorted, overlapping or empty-length.
    explicit ManeuverSchedule(std::vector<ManeuverSegment> segments);

    double phi_rate_at(double t) const;
    const std::vector<ManeuverSegment>& segments() const { return segments_; }
    bool empty() const { return segments_.empty(); }

    friend bool operator==(const ManeuverSchedule&, const ManeuverSchedule&) = default;

private:
    std::vector<ManeuverSegment> segments_;
};

struct SimConfig {
    double dt = 0.1;
    double t_total = 300.0;
    double v0 = 5100.0;
    double h0 = 80000.0;
    double theta0 = -5.0 * 3.14159265358979323846 / 180.0;
    double phi0 = 0.0;
    ManeuverSchedule maneuver;

    void validate() const;
    KinematicState initial_state() const;
};

struct TrajectorySample {
    double t = 0.0;
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    friend bool operator==(const TrajectorySample&, const TrajectorySample&) = default;
};

enum class Termination {
    horizon,         ///< reached t_total
    ground_impact,   ///< altitude became non-positive
    singular_speed,  ///< speed dropped to the singular-speed guard
    external,        ///< loaded from a file; cause unknown
};

std::string_view to_string(Termination t);

struct Trajectory {
    std::vector<TrajectorySample> samples;
    /// Parallel to `samples` when produced by simulate(); empty when loaded from CSV.
    std::vector<KinematicState> states;
    Termination termination = Termination::external;

    std::size_t size() const { return samples.size(); }
};

/// One explicit Euler step of length dt.
KinematicState euler_step(const KinematicState& s, const PhysicalConstants& c,
                          double phi_rate, double dt);

/// Integrates from cfg's initial state until t_total, ground impact or
/// singular speed, recording a sample at t = 0 and after every step.
Trajectory simulate(const SimConfig& cfg, const PhysicalConstants& c);

} // namespace glidecast
