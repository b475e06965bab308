#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "villus/functions.hpp"

namespace villus {

/// V_max * s / (K_m + s) for s > 0, zero otherwise. Throws for K_m <= 0.
double eval_michaelis_menten(double s, double v_max, double k_m);

/// Stokes-Einstein type diffusivity kT/(3 mu) * (rho / (6 pi M))^(1/3), with
/// the two groups supplied already combined.
double diffusion_coefficient(double kt_over_3mu, double rho_over_6pim);

/// Reference scales for converting physical inputs to the internal
/// nondimensional units: lengths are divided by `length`, times by `time`.
struct UnitScales {
    double length = 1.0;
    double time = 1.0;

    double speed_to_internal(double speed) const { return speed * time / length; }
    double time_to_internal(double t) const { return t / time; }
    double length_to_internal(double x) const { return x / length; }
};

// ---------------------------------------------------------------------------
// Peristaltic pulses (bolus transport ODE)
// ---------------------------------------------------------------------------

struct PulseModel {
    double wave_speed = 1.0;    ///< c
    double pulse_period = 0.01; ///< eps, the pulse period in internal time units
    ScalarFn shape;             ///< w(s), nonnegative and 1-periodic
    ScalarFn friction;          ///< k(t) > 0
    double c0 = 1.0;
    double c1 = 1.0;
    double a = 1.0;
    double b = 0.0;

    /// Throws InvalidParameter when an invariant is violated (sampled checks for w and k).
    void validate(double horizon) const;

    /// g~(s, v, x, y): zero for v <= 0, otherwise w(s) (c0 + c1 sum y) / (a + b x).
    double amplitude_factor(double s, double v, double x, std::span<const double> y) const;
};

/// w(s) = amplitude * 2 sin^2(pi s); mean over a period equals `amplitude`.
ScalarFn sin2_pulse_shape(double amplitude = 1.0);
/// w(s) = amplitude; an already-averaged forcing.
ScalarFn constant_pulse_shape(double amplitude = 1.0);
ScalarFn constant_friction(double k);

/// g(s, v, x, y) = g~(s, v, x, y) * v; zero for v <= 0.
double eval_pulse_force(double s, double v_rel, double x, std::span<const double> y,
                        const PulseModel& model);

struct KineticsModel {
    using Rate = std::function<void(double x, std::span<const double> y, std::span<double> dydt)>;

    std::size_t dimension = 1;
    Rate rate;
    double lipschitz_bound = 0.0;

    /// Largest finite-difference Lipschitz quotient found on random samples of
    /// [0, x_max] x [0, y_max]^K. Deterministic for a given seed.
    double sampled_lipschitz(double x_max, double y_max, std::size_t samples,
                             unsigned seed = 7) const;
    void validate(double x_max, double y_max) const;
};

/// dy_i/dt = -rate * y_i for every species.
KineticsModel linear_decay_kinetics(std::size_t dimension, double rate);

// ---------------------------------------------------------------------------
// Villous absorption / degradation laws
// ---------------------------------------------------------------------------

using FieldFn = std::function<double(double x1, const Vec3& X)>;
using FieldFnT = std::function<double(double x1, const Vec3& X, double t)>;
using SlowFn = std::function<double(double x1, double t)>;

struct AbsorptionModel {
    FieldFn eta_p;
    FieldFnT eta_a;
    SaturatingLaw g_a = SaturatingLaw::michaelis_menten(1.0, 1.0);
    FieldFn rho_surf;
    double alpha = 1.0;
    double omega = 1.0;
    double chi = 1.0;
    SlowFn zeta;
    SaturatingLaw phi = SaturatingLaw::zero();
    double eta_lower_bound = 1.0;

    /// Sampled checks of periodicity in X1, the eta_p lower bound, sign
    /// conditions and omega <= chi. `radius` bounds the transverse sample box.
    void validate(double radius, double x1_max, double t_max, unsigned seed = 11) const;
};

/// Axisymmetric velocity fields built from a Stokes stream function
/// Psi(x1, t, s) = q(x1, t) r^2 f(s) / 2 with s = R / rho(X1). Such fields are
/// divergence free in X and tangent to the villous wall by construction.
struct AxisymmetricStream {
    enum class Shape { Plug, Poiseuille };

    Shape shape = Shape::Plug;
    SlowFn q;             ///< mean axial speed scale
    double base_radius = 1.0;

    double f(double s) const;
    /// f'(s) / (2 s), finite at s = 0.
    double fprime_over_2s(double s) const;
    /// Psi in the unit cell (per radian), independent of the wall radius.
    double stream(double x1, double t, double s) const { return q(x1, t) * base_radius * base_radius * f(s) / 2.0; }
};

struct VelocityField {
    std::function<Vec3(double x1, const Vec3& X, double t)> c;
    std::optional<AxisymmetricStream> stream;
};

/// Builds c(x1, X, t) from a stream representation and the wall radius rho(X1)
/// with derivative rho'(X1).
VelocityField make_stream_velocity(AxisymmetricStream stream, ScalarFn radius, ScalarFn radius_dz);

/// Velocity given directly as a function; no stream representation.
VelocityField make_velocity(std::function<Vec3(double, const Vec3&, double)> c);

}  // namespace villus
