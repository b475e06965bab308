#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "villus/geometry.hpp"
#include "villus/homogenize.hpp"
#include "villus/macro_solver.hpp"
#include "villus/micro_verifier.hpp"
#include "villus/model_core.hpp"
#include "villus/ode_transport.hpp"

namespace villus {

/// Fully resolved experiment description. Every field has a documented default;
/// the text format is sectioned key=value (see README).
struct ExperimentConfig {
    // [experiment]
    std::string scenario = "default";
    std::string module = "ode-sim";
    std::string output_dir = "out";

    // [units]: pulse inputs are physical; internal = physical / scale
    double length_scale = 1.0;
    double time_scale = 1.0;

    // [pulse]
    double wave_speed = 1.0;
    double pulse_period = 0.01;
    std::string pulse_shape = "sin2";  ///< sin2 | constant
    double pulse_amplitude = 1.0;
    double friction = 1.0;
    double c0 = 1.0;
    double c1 = 1.0;
    double a = 1.0;
    double b = 0.1;
    double initial_speed = 0.3;
    double ode_horizon = 5.0;
    double ode_dt = 0.0;  ///< 0: pulse_period / 20
    std::vector<double> pulse_periods{0.1, 0.05, 0.025, 0.0125};
    int quadrature_nodes = 65;
    int output_points = 500;

    // [kinetics]
    int species = 1;
    double decay = 0.1;
    double initial_composition = 1.0;

    // [absorption]
    double eta_p = 1.0;
    double eta_p_modulation = 0.0;  ///< eta_p (1 + m cos 2 pi X1)
    double eta_a = 0.2;
    std::string g_a = "michaelis-menten";  ///< michaelis-menten | linear | zero
    double g_a_vmax = 1.0;
    double g_a_km = 1.0;
    double g_a_slope = 1.0;
    double rho = 0.3;
    double alpha = 0.5;
    double omega = 1.0;
    double chi = 1.0;
    double zeta = 0.2;
    std::string phi = "michaelis-menten";  ///< michaelis-menten | linear | zero
    double phi_vmax = 1.0;
    double phi_km = 1.0;
    double phi_slope = 1.0;

    // [velocity]
    std::string velocity = "plug";  ///< plug | poiseuille
    double speed = 1.0;

    // [profile]
    std::string profile = "cosine";  ///< flat | cosine | lobed | table
    double radius = 1.0;
    double amplitude = 0.1;
    double modulation = 0.0;
    int lobes = 0;
    std::string table = "";

    // [grids]
    int quadrature_nz = 64;
    int quadrature_ntheta = 64;
    int quadrature_nrho = 32;
    int cell_nz = 64;
    int cell_nrho = 64;
    double axial_length = 2.0;
    int axial_cells = 800;
    double cfl = 0.9;
    double horizon = 1.5;
    int micro_nz_per_period = 16;
    int micro_nrho = 16;
    std::vector<double> eps_list{0.25, 0.125, 0.0625};
    std::vector<double> snapshot_times{0.5, 1.0, 1.5};

    // [inflow]
    std::string inflow = "meal";  ///< meal | pulses | zero
    double inflow_amplitude = 1.0;
    double rise_time = 1.0;
    double u_share = 0.2;
    double half_period = 1.0;

    // [cell]
    double p = 0.5;
    double mu = 0.5;
    double nu = 0.5;
    double delta = 0.0;
    double x1 = 0.0;
    double t = 0.0;
    double solvability_tolerance = 5e-3;

    bool operator==(const ExperimentConfig&) const = default;
};

struct ConfigIssue {
    int line = 0;  ///< 1-based; 0 when the issue concerns a defaulted value
    std::string message;
};

struct ConfigParseResult {
    std::optional<ExperimentConfig> config;
    std::vector<ConfigIssue> errors;
};

/// Parses and validates; collects every error rather than stopping at the first.
/// A nonempty `module_override` replaces the [experiment] module key.
ConfigParseResult parse_config(std::string_view text, std::string_view module_override = {});

/// Parses or throws ErrorKind::Config with all messages.
ExperimentConfig load_config(std::string_view text);

/// Canonical text with every key; parse_config(emit_config(c)) == c.
std::string emit_config(const ExperimentConfig& config);

/// (section, key, value) for every parameter, in emission order.
struct ConfigEntry {
    std::string section;
    std::string key;
    std::string value;
};
std::vector<ConfigEntry> config_entries(const ExperimentConfig& config);

/// Module selectors accepted by run_experiment.
const std::vector<std::string>& module_names();

// Builders from a validated config.
UnitScales build_units(const ExperimentConfig& c);
/// Pulse model in internal units (wave speed, pulse period and friction converted).
PulseModel build_pulse(const ExperimentConfig& c);
KineticsModel build_kinetics(const ExperimentConfig& c);
std::vector<double> build_initial_composition(const ExperimentConfig& c);
AbsorptionModel build_absorption(const ExperimentConfig& c);
VillusProfile build_profile(const ExperimentConfig& c);
VelocityField build_velocity(const ExperimentConfig& c, const VillusProfile& profile);
InflowSignals build_inflow(const ExperimentConfig& c);

}  // namespace villus
