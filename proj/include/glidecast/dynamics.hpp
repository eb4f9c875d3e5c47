// SPDX-License-Identifier: Apache-2.0
// Point-mass glide dynamics: gravity, exponential atmosphere, drag and lift,
// and the state derivative in (v, theta, phi, x, y, z).
#pragma once

namespace glidecast {

/// Speeds at or below this (m/s) make the path-angle rate singular.
inline constexpr double kMinSpeed = 1e-3;

struct PhysicalConstants {
    double G = 3.98e14;     ///< gravitational parameter [m^3/s^2]
    double R = 6371000.0;   ///< Earth radius [m]
    double rho0 = 1.225;    ///< sea-level air density [kg/m^3]
    double k = 1.41e-4;     ///< density decay constant [1/m]
    double A = 0.88;        ///< cross-sectional area [m^2]
    double m = 907.0;       ///< vehicle mass [kg]
    double Cd = 0.5;        ///< drag coefficient
    double Cl = 0.7;        ///< lift coefficient

    /// Throws InvalidInputError naming the first non-positive or non-finite field.
    void validate() const;

    friend bool operator==(const PhysicalConstants&, const PhysicalConstants&) = default;
};

/// Instantaneous vehicle state. Angles in radians, z is altitude.
struct KinematicState {
    double t = 0.0;
    double v = 0.0;
    double theta = 0.0;
    double phi = 0.0;
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    friend bool operator==(const KinematicState&, const KinematicState&) = default;
};

struct ForcesSample {
    double g = 0.0;
    double rho = 0.0;
    double Fd = 0.0;
    double Fl = 0.0;
};

struct StateDerivative {
    double v_dot = 0.0;
    double theta_dot = 0.0;
    double phi_dot = 0.0;
    double x_dot = 0.0;
    double y_dot = 0.0;
    double z_dot = 0.0;
};

/// g = G / (R + h)^2
double gravity_at(double h, const PhysicalConstants& c);

/// rho = rho0 * exp(-k h)
double air_density(double h, const PhysicalConstants& c);

/// Fd = 1/2 Cd rho v^2 A
double drag_force(double v, double h, const PhysicalConstants& c);

/// Fl = 1/2 Cl rho v^2 A
double lift_force(double v, double h, const PhysicalConstants& c);

/// Evaluates g, rho, Fd and Fl together from one dynamic-pressure term.
ForcesSample forces_at(double v, double h, const PhysicalConstants& c);

/// Time derivative of the state. `phi_rate` is the externally scheduled
/// heading rate; the model has no heading dynamics of its own.
/// Throws SingularSpeedError when s.v <= kMinSpeed.
StateDerivative state_derivative(const KinematicState& s, const PhysicalConstants& c,
                                 double phi_rate = 0.0);

} // namespace glidecast
