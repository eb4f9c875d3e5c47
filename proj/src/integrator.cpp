// SPDX-License-Identifier: Apache-2.0
#include "glidecast/integrator.hpp"

#include <cmath>
#include <string>

#include "glidecast/error.hpp"

namespace glidecast {

ManeuverSchedule::ManeuverSchedule(std::vector<ManeuverSegment> segments)
    : segments_(std::move(segments)) {
    for (std::size_t i = 0; i < segments_.size(); ++i) {
        const auto& s = segments_[i];
        if (!std::isfinite(s.t_start) || !std::isfinite(s.t_end) || !std::isfinite(s.phi_rate)) {
            throw InvalidInputError("maneuver segment " + std::to_string(i) + " is not finite");
        }
        if (!(s.t_end > s.t_start)) {
            throw InvalidInputError("maneuver segment " + std::to_string(i) +
                                    " must have t_end > t_start");
        }
        if (i > 0 && s.t_start < segments_[i - 1].t_end) {
            throw InvalidInputError("maneuver segment " + std::to_string(i) +
                                    " overlaps or precedes the previous segment");
        }
    }
}

double ManeuverSchedule::phi_rate_at(double t) const {
    for (const auto& s : segments_) {
        if (t < s.t_start) {
            break;
        }
        if (t < s.t_end) {
            return s.phi_rate;
        }
    }
    return 0.0;
}

void SimConfig::validate() const {
    if (!std::isfinite(dt) || dt <= 0.0) {
        throw InvalidInputError("simulation.dt must be > 0");
    }
    if (!std::isfinite(t_total) || t_total < 0.0) {
        throw InvalidInputError("simulation.t_total must be >= 0");
    }
    if (!std::isfinite(v0) || v0 <= kMinSpeed) {
        throw InvalidInputError("simulation.v0 must be > 0");
    }
    if (!std::isfinite(h0) || !std::isfinite(theta0) || !std::isfinite(phi0)) {
        throw InvalidInputError("simulation initial conditions must be finite");
    }
}

KinematicState SimConfig::initial_state() const {
    KinematicState s;
    s.t = 0.0;
    s.v = v0;
    s.theta = theta0;
    s.phi = phi0;
    s.x = 0.0;
    s.y = 0.0;
    s.z = h0;
    return s;
}

std::string_view to_string(Termination t) {
    switch (t) {
    case Termination::horizon: return "horizon";
    case Termination::ground_impact: return "ground_impact";
    case Termination::singular_speed: return "singular_speed";
    case Termination::external: return "external";
    }
    return "unknown";
}

KinematicState euler_step(const KinematicState& s, const PhysicalConstants& c, double phi_rate,
                          double dt) {
    if (!(dt >= 0.0)) {
        throw InvalidInputError("time step must be non-negative");
    }
    const StateDerivative d = state_derivative(s, c, phi_rate);
    KinematicState next;
    next.t = s.t + dt;
    next.v = s.v + dt * d.v_dot;
    next.theta = s.theta + dt * d.theta_dot;
    next.phi = s.phi + dt * d.phi_dot;
    next.x = s.x + dt * d.x_dot;
    next.y = s.y + dt * d.y_dot;
    next.z = s.z + dt * d.z_dot;
    return next;
}

Trajectory simulate(const SimConfig& cfg, const PhysicalConstants& c) {
    cfg.validate();
    c.validate();

    // Step count is fixed up front so accumulated rounding in t cannot add a step.
    const auto steps = static_cast<std::size_t>(std::floor(cfg.t_total / cfg.dt + 1e-9));

    Trajectory traj;
    traj.termination = Termination::horizon;
    traj.samples.reserve(steps + 1);
    traj.states.reserve(steps + 1);

    KinematicState s = cfg.initial_state();
    traj.states.push_back(s);
    traj.samples.push_back({s.t, s.x, s.y, s.z});

    for (std::size_t n = 1; n <= steps; ++n) {
        if (s.z <= 0.0) {
            traj.termination = Termination::ground_impact;
            break;
        }
        try {
            s = euler_step(s, c, cfg.maneuver.phi_rate_at(s.t), cfg.dt);
        } catch (const SingularSpeedError&) {
            traj.termination = Termination::singular_speed;
            break;
        }
        s.t = static_cast<double>(n) * cfg.dt;
        traj.states.push_back(s);
        traj.samples.push_back({s.t, s.x, s.y, s.z});
    }
    if (traj.termination == Termination::horizon && s.z <= 0.0 && traj.samples.size() > 1) {
        traj.termination = Termination::ground_impact;
    }
    return traj;
}

} // namespace glidecast
