// SPDX-License-Identifier: Apache-2.0
#include "glidecast/dynamics.hpp"

#include <cmath>
#include <string>

#include "glidecast/error.hpp"

namespace glidecast {

namespace {

void require_finite(double value, const char* what) {
    if (!std::isfinite(value)) {
        throw InvalidInputError(std::string(what) + " must be finite");
    }
}

void require_speed(double v) {
    require_finite(v, "speed");
    if (v < 0.0) {
        throw InvalidInputError("speed must be non-negative, got " + std::to_string(v));
    }
}

double dynamic_pressure_area(double v, double h, const PhysicalConstants& c) {
    return 0.5 * air_density(h, c) * v * v * c.A;
}

} // namespace

void PhysicalConstants::validate() const {
    const struct {
        const char* name;
        double value;
    } fields[] = {{"G", G},   {"R", R}, {"rho0", rho0}, {"k", k},
                  {"A", A},   {"m", m}, {"Cd", Cd},     {"Cl", Cl}};
    for (const auto& f : fields) {
        if (!std::isfinite(f.value) || f.value <= 0.0) {
            throw InvalidInputError(std::string("constants.") + f.name +
                                    " must be finite and > 0");
        }
    }
}

double gravity_at(double h, const PhysicalConstants& c) {
    require_finite(h, "altitude");
    const double r = c.R + h;
    if (r <= 0.0) {
        throw InvalidInputError("altitude below Earth centre");
    }
    return c.G / (r * r);
}

double air_density(double h, const PhysicalConstants& c) {
    require_finite(h, "altitude");
    return c.rho0 * std::exp(-c.k * h);
}

double drag_force(double v, double h, const PhysicalConstants& c) {
    require_speed(v);
    return c.Cd * dynamic_pressure_area(v, h, c);
}

double lift_force(double v, double h, const PhysicalConstants& c) {
    require_speed(v);
    return c.Cl * dynamic_pressure_area(v, h, c);
}

ForcesSample forces_at(double v, double h, const PhysicalConstants& c) {
    require_speed(v);
    ForcesSample f;
    f.g = gravity_at(h, c);
    f.rho = air_density(h, c);
    const double q = 0.5 * f.rho * v * v * c.A;
    f.Fd = c.Cd * q;
    f.Fl = c.Cl * q;
    return f;
}

StateDerivative state_derivative(const KinematicState& s, const PhysicalConstants& c,
                                 double phi_rate) {
    if (!(s.v > kMinSpeed)) {
        throw SingularSpeedError("speed " + std::to_string(s.v) +
                                 " m/s is at or below the singular-speed guard");
    }
    const ForcesSample f = forces_at(s.v, s.z, c);
    const double sin_theta = std::sin(s.theta);
    const double cos_theta = std::cos(s.theta);
    const double horizontal = s.v * cos_theta;

    StateDerivative d;
    d.v_dot = -f.Fd / c.m - f.g * sin_theta;
    d.theta_dot = f.Fl / (c.m * s.v) - f.g * cos_theta / s.v;
    d.phi_dot = phi_rate;
    d.x_dot = horizontal * std::cos(s.phi);
    d.y_dot = horizontal * std::sin(s.phi);
    d.z_dot = s.v * sin_theta;
    return d;
}

} // namespace glidecast
