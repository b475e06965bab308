#include "villus/experiment.hpp"

#include <chrono>
#include <cmath>
#include <sstream>
#include <utility>

#include "json.hpp"
#include "villus/csv.hpp"
#include "villus/error.hpp"

namespace villus {

namespace {

using json = nlohmann::ordered_json;

struct Artifacts {
    std::vector<std::pair<std::string, std::string>> files;
    json summary = json::object();

    void add(std::string name, std::string content) { files.emplace_back(std::move(name), std::move(content)); }
    template <class Writer>
    void add_csv(std::string name, Writer&& write) {
        std::ostringstream out;
        write(out);
        add(std::move(name), out.str());
    }
};

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = n == 1 ? a : a + (b - a) * i / (n - 1);
    return v;
}

AveragingGrid averaging_grid(const ExperimentConfig& c) {
    return {c.quadrature_nz, c.quadrature_ntheta, c.quadrature_nrho};
}

HomogenizedCoefficients coefficients_for(const ExperimentConfig& c, const VillusProfile& profile,
                                         const VelocityField& velocity, const AbsorptionModel& absorption) {
    return homogenized_coefficients(profile, velocity, absorption, linspace(0.0, c.axial_length, 5),
                                    {0.0, c.horizon}, averaging_grid(c));
}

void run_ode_sim(const ExperimentConfig& c, Artifacts& art) {
    const auto units = build_units(c);
    const auto model = build_pulse(c);
    const auto kin = build_kinetics(c);
    const auto y0 = build_initial_composition(c);
    const double v0 = units.speed_to_internal(c.initial_speed);
    const double horizon = units.time_to_internal(c.ode_horizon);
    const double dt = c.ode_dt > 0.0 ? units.time_to_internal(c.ode_dt) : model.pulse_period / 20.0;
    const auto steps = static_cast<std::size_t>(std::ceil(horizon / dt - 1e-9));
    const std::size_t every = std::max<std::size_t>(1, steps / static_cast<std::size_t>(c.output_points));
    const auto osc = integrate_oscillatory(model, kin, v0, y0, horizon, dt, every);
    const AveragedForce fbar(model, c.quadrature_nodes);
    const auto avg = integrate_averaged(model, kin, fbar, v0, y0, horizon, dt, every);
    art.add_csv("trajectory.csv", [&](std::ostream& o) { write_trajectory_csv(o, osc); });
    art.add_csv("averaged.csv", [&](std::ostream& o) { write_trajectory_csv(o, avg); });
    art.add("position.dat", plot_series("bolus position x(t)", osc.times, osc.x));
    art.add("speed.dat", plot_series("bolus speed xdot(t)", osc.times, osc.xdot));
    const auto bounds = speed_bounds(osc, model.wave_speed);
    const auto [ex, exd] = sup_distance(osc, avg);
    art.summary["speed_bound_violation"] = bounds.worst();
    art.summary["sup_error_x"] = ex;
    art.summary["sup_error_xdot"] = exd;
}

void run_ode_converge(const ExperimentConfig& c, Artifacts& art) {
    const auto units = build_units(c);
    const auto model = build_pulse(c);
    const auto kin = build_kinetics(c);
    const auto y0 = build_initial_composition(c);
    ConvergenceOptions opt;
    opt.output_points = static_cast<std::size_t>(c.output_points);
    opt.quadrature_nodes = c.quadrature_nodes;
    std::vector<double> periods;
    for (double e : c.pulse_periods) periods.push_back(units.time_to_internal(e));
    const auto table = convergence_study(model, kin, units.speed_to_internal(c.initial_speed), y0,
                                         units.time_to_internal(c.ode_horizon), periods, opt);
    art.add_csv("convergence.csv", [&](std::ostream& o) {
        o << "pulse_period,error_x,error_xdot,order_x,order_xdot,monotone\n";
        for (const auto& r : table.rows) {
            o << format_number(r.pulse_period) << ',' << format_number(r.error_x) << ','
              << format_number(r.error_xdot) << ',' << format_number(r.order_x) << ','
              << format_number(r.order_xdot) << ',' << (table.monotone ? 1 : 0) << '\n';
        }
    });
    std::vector<double> eps, err;
    for (const auto& r : table.rows) {
        eps.push_back(r.pulse_period);
        err.push_back(std::max(r.error_x, r.error_xdot));
    }
    art.add("convergence.dat", plot_series("C1 error versus pulse period", eps, err));
    art.summary["monotone"] = table.monotone;
    art.summary["flagged"] = table.flagged;
}

void run_geometry(const ExperimentConfig& c, Artifacts& art) {
    const auto profile = build_profile(c);
    const auto m = cell_measures(profile, c.quadrature_nz, c.quadrature_ntheta);
    art.add_csv("measures.csv", [&](std::ostream& o) {
        o << "quantity,value\n";
        o << "volume," << format_number(m.volume) << '\n';
        o << "lateral_area," << format_number(m.lateral_area) << '\n';
        o << "ratio," << format_number(m.ratio) << '\n';
    });
    const auto z = linspace(0.0, 1.0, 201);
    std::vector<double> r;
    for (double zi : z) r.push_back(profile.radius(zi, 0.0));
    art.add("profile.dat", plot_series("wall radius at theta = 0", z, r));
    art.summary["volume"] = m.volume;
    art.summary["lateral_area"] = m.lateral_area;
    art.summary["ratio"] = m.ratio;
}

void run_homogenize(const ExperimentConfig& c, Artifacts& art) {
    const auto profile = build_profile(c);
    const auto velocity = build_velocity(c, profile);
    const auto absorption = build_absorption(c);
    const auto coeffs = coefficients_for(c, profile, velocity, absorption);
    art.add_csv("coefficients.csv", [&](std::ostream& o) { write_coefficients_csv(o, coeffs); });
    art.add("etap.dat", plot_series("surface-averaged passive rate", coeffs.x1_samples, coeffs.etabar_p));
    art.summary["ratio"] = coeffs.ratio;
    art.summary["divergence_residual"] = coeffs.divergence_residual;
    art.summary["normal_trace_residual"] = coeffs.normal_trace_residual;
}

void run_cell_solve(const ExperimentConfig& c, Artifacts& art) {
    const auto profile = build_profile(c);
    const auto velocity = build_velocity(c, profile);
    const auto absorption = build_absorption(c);
    const auto coeffs = homogenized_coefficients(profile, velocity, absorption, {c.x1}, {c.t}, averaging_grid(c));
    CellProblemData data{c.p, c.mu, c.nu, c.delta, c.x1, c.t, 0.0};
    const auto sol = solve_cell_problem(profile, velocity, absorption, data, {c.cell_nz, c.cell_nrho});
    data.lambda = sol.lambda;
    const double compat = lambda_from_compatibility(data, coeffs, absorption);
    const auto check = check_solvability(data, coeffs, absorption, c.solvability_tolerance);
    art.add_csv("corrector.csv", [&](std::ostream& o) { write_corrector_csv(o, sol.corrector); });
    art.add_csv("cell.csv", [&](std::ostream& o) {
        CsvWriter w(o);
        w.header({"lambda_discrete", "lambda_compatibility", "residual", "solvable", "relative_residual"});
        w.row({sol.lambda, compat, check.residual, check.solvable ? 1.0 : 0.0, sol.relative_residual});
    });
    std::vector<double> rho, u;
    for (int j = 0; j < sol.corrector.n_rho; ++j) {
        rho.push_back(sol.corrector.rho_hat[static_cast<std::size_t>(j)]);
        u.push_back(sol.corrector.at(0, j));
    }
    art.add("corrector.dat", plot_series("corrector along the first radial column", rho, u));
    art.summary["lambda_discrete"] = sol.lambda;
    art.summary["lambda_compatibility"] = compat;
    art.summary["solvable"] = check.solvable;
}

void run_macro_solve(const ExperimentConfig& c, Artifacts& art) {
    const auto profile = build_profile(c);
    const auto velocity = build_velocity(c, profile);
    const auto absorption = build_absorption(c);
    const auto coeffs = coefficients_for(c, profile, velocity, absorption);
    const AxialGrid grid{c.axial_length, c.axial_cells, c.horizon, c.cfl};
    const auto sol = solve_macro(grid, coeffs, absorption, build_inflow(c), c.snapshot_times);
    const auto budget = mass_budget(sol);
    art.add_csv("macro.csv", [&](std::ostream& o) { write_macro_csv(o, grid, sol); });
    art.add_csv("budget.csv", [&](std::ostream& o) { write_budget_csv(o, budget); });
    std::vector<double> x;
    for (int i = 0; i < grid.n_cells; ++i) x.push_back(grid.center(i));
    art.add("u_final.dat", plot_series("nutrient u at the final time", x, sol.final_state.u));
    art.add("v_final.dat", plot_series("feedstuff v at the final time", x, sol.final_state.v));
    double worst = 0.0;
    for (const auto& r : budget) worst = std::max(worst, r.relative_residual);
    art.summary["dt"] = sol.dt;
    art.summary["steps"] = sol.steps.size();
    art.summary["max_budget_residual"] = worst;
}

void run_micro_verify(const ExperimentConfig& c, Artifacts& art) {
    const auto profile = build_profile(c);
    const auto velocity = build_velocity(c, profile);
    const auto absorption = build_absorption(c);
    const auto inflow = build_inflow(c);
    json runs = json::array();
    for (std::size_t k = 0; k < c.eps_list.size(); ++k) {
        const MicroGrid g{c.eps_list[k], c.axial_length, c.micro_nz_per_period, c.micro_nrho, c.horizon, 0.0};
        const auto sol = solve_micro(g, profile, velocity, absorption, inflow, c.snapshot_times);
        const std::string tag = "micro_" + std::to_string(k);
        art.add_csv(tag + ".csv", [&](std::ostream& o) { write_micro_csv(o, sol); });
        art.add_csv(tag + "_averages.csv", [&](std::ostream& o) {
            CsvWriter w(o);
            w.header({"t", "x1", "ubar", "vbar"});
            for (const auto& s : sol.snapshots) {
                const auto ub = cross_section_average(s.u, sol);
                const auto vb = cross_section_average(s.v, sol);
                for (std::size_t i = 0; i < ub.size(); ++i) w.row({s.time, sol.x1[i], ub[i], vb[i]});
            }
        });
        if (!sol.snapshots.empty()) {
            art.add(tag + "_vbar.dat", plot_series("cross-section average of v at the last snapshot", sol.x1,
                                                    cross_section_average(sol.snapshots.back().v, sol)));
        }
        runs.push_back({{"eps", c.eps_list[k]}, {"dt", sol.dt}, {"steps", sol.steps}, {"max_v", sol.max_v},
                        {"min_u", sol.min_u}, {"min_v", sol.min_v}});
    }
    art.summary["runs"] = runs;
}

void run_compare(const ExperimentConfig& c, Artifacts& art) {
    ComparisonScenario sc;
    sc.profile = build_profile(c);
    sc.velocity = build_velocity(c, sc.profile);
    sc.absorption = build_absorption(c);
    sc.inflow = build_inflow(c);
    sc.length = c.axial_length;
    sc.horizon = c.horizon;
    sc.n_z_per_period = c.micro_nz_per_period;
    sc.n_rho = c.micro_nrho;
    sc.macro_cells = c.axial_cells;
    sc.macro_cfl = c.cfl;
    sc.snapshot_times = c.snapshot_times;
    sc.averaging = averaging_grid(c);
    const auto table = compare_micro_macro(sc, c.eps_list);
    art.add_csv("comparison.csv", [&](std::ostream& o) { write_comparison_csv(o, table); });
    std::vector<double> eps, err;
    for (const auto& r : table.rows) {
        eps.push_back(r.eps);
        err.push_back(r.error());
    }
    art.add("comparison.dat", plot_series("sup error of cross-section averages versus eps", eps, err));
    art.summary["monotone"] = table.monotone;
    art.summary["flagged"] = table.flagged;
}

json parameters_json(const ExperimentConfig& c) {
    json p = json::object();
    for (const auto& e : config_entries(c)) p[e.section][e.key] = e.value;
    return p;
}

void write_manifest(const std::filesystem::path& dir, const ExperimentConfig& c, const ExperimentResult& r,
                    const json& summary, double wall_time) {
    json m;
    m["tool"] = kToolName;
    m["version"] = kToolVersion;
    m["scenario"] = c.scenario;
    m["module"] = c.module;
    m["status"] = r.status;
    m["wall_time_seconds"] = wall_time;
    m["parameters"] = parameters_json(c);
    json files = json::array();
    for (const auto& f : r.files) files.push_back(f.filename().string());
    m["files"] = files;
    m["summary"] = summary;
    write_file_atomic(dir / "manifest.json", m.dump(2) + "\n");
}

int status_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Config:
        case ErrorKind::InvalidParameter:
        case ErrorKind::InvalidInitialCondition:
        case ErrorKind::InvalidProfile:
        case ErrorKind::InvalidGrid:
        case ErrorKind::UnsupportedGeometry:
            return kExitUsage;
        default:
            return kExitNumeric;
    }
}

}  // namespace

void write_error_record(const std::filesystem::path& output_dir, int status, const std::string& kind,
                        const std::string& message) {
    json e;
    e["status"] = status;
    e["kind"] = kind;
    e["message"] = message;
    write_file_atomic(output_dir / "error.json", e.dump(2) + "\n");
}

ExperimentResult run_experiment(const ExperimentConfig& config, const std::filesystem::path& output_dir) {
    const auto start = std::chrono::steady_clock::now();
    ExperimentResult result;
    Artifacts art;
    try {
        const auto& m = config.module;
        if (m == "ode-sim") {
            run_ode_sim(config, art);
        } else if (m == "ode-converge") {
            run_ode_converge(config, art);
        } else if (m == "geometry") {
            run_geometry(config, art);
        } else if (m == "homogenize") {
            run_homogenize(config, art);
        } else if (m == "cell-solve") {
            run_cell_solve(config, art);
        } else if (m == "macro-solve") {
            run_macro_solve(config, art);
        } else if (m == "micro-verify") {
            run_micro_verify(config, art);
        } else if (m == "compare") {
            run_compare(config, art);
        } else {
            throw Error(ErrorKind::Config, "unknown module selector '" + m + "'");
        }
        for (const auto& [name, content] : art.files) {
            write_file_atomic(output_dir / name, content);
            result.files.push_back(output_dir / name);
        }
    } catch (const Error& e) {
        result.status = status_for(e.kind());
        result.error_kind = to_string(e.kind());
        result.error_message = e.what();
    } catch (const std::exception& e) {
        result.status = kExitNumeric;
        result.error_kind = "internal";
        result.error_message = e.what();
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    try {
        if (result.status != kExitOk) {
            write_error_record(output_dir, result.status, result.error_kind, result.error_message);
            result.files.push_back(output_dir / "error.json");
        }
        result.files.push_back(output_dir / "manifest.json");
        write_manifest(output_dir, config, result, art.summary, wall);
    } catch (const std::exception& e) {
        if (result.status == kExitOk) {
            result.status = kExitNumeric;
            result.error_kind = to_string(ErrorKind::Io);
            result.error_message = e.what();
        }
    }
    return result;
}

}  // namespace villus
