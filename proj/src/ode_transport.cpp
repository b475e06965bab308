#include "villus/ode_transport.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <ostream>
#include <string>

#include "villus/csv.hpp"
#include "villus/error.hpp"

namespace villus {

namespace {

// State layout: [x, xdot, y_1 .. y_K].
using Rhs = std::function<void(double t, std::span<const double> state, std::span<double> out)>;

std::size_t step_count(double horizon, double dt) {
    require(horizon > 0.0, ErrorKind::InvalidParameter, "integration horizon must be positive");
    require(dt > 0.0, ErrorKind::StepSize, "time step must be positive");
    return static_cast<std::size_t>(std::ceil(horizon / dt - 1e-9));
}

BolusTrajectory run_rk4(const Rhs& rhs, std::size_t dimension, double v0, std::span<const double> y0,
                        double horizon, std::size_t steps, std::size_t record_every) {
    require(y0.size() == dimension, ErrorKind::InvalidInitialCondition, "y0 length must equal the kinetics dimension");
    require(record_every > 0, ErrorKind::InvalidParameter, "record stride must be positive");
    const std::size_t n = dimension + 2;
    const double dt = horizon / static_cast<double>(steps);
    std::vector<double> state(n), k1(n), k2(n), k3(n), k4(n), tmp(n);
    state[0] = 0.0;
    state[1] = v0;
    std::copy(y0.begin(), y0.end(), state.begin() + 2);

    BolusTrajectory traj;
    const std::size_t records = steps / record_every + 2;
    traj.times.reserve(records);
    traj.x.reserve(records);
    traj.xdot.reserve(records);
    traj.y.reserve(records);
    auto record = [&](double t) {
        traj.times.push_back(t);
        traj.x.push_back(state[0]);
        traj.xdot.push_back(state[1]);
        traj.y.emplace_back(state.begin() + 2, state.end());
    };
    record(0.0);

    for (std::size_t step = 0; step < steps; ++step) {
        const double t = dt * static_cast<double>(step);
        rhs(t, state, k1);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = state[i] + 0.5 * dt * k1[i];
        rhs(t + 0.5 * dt, tmp, k2);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = state[i] + 0.5 * dt * k2[i];
        rhs(t + 0.5 * dt, tmp, k3);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = state[i] + dt * k3[i];
        rhs(t + dt, tmp, k4);
        for (std::size_t i = 0; i < n; ++i) {
            state[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if ((step + 1) % record_every == 0 || step + 1 == steps) {
            record(dt * static_cast<double>(step + 1));
        }
    }
    return traj;
}

void check_initial_speed(const PulseModel& model, double v0) {
    require(v0 >= 0.0, ErrorKind::InvalidInitialCondition, "initial speed v0 must be nonnegative");
    require(v0 < model.wave_speed, ErrorKind::InvalidInitialCondition,
            "initial speed v0 must be below the wave speed c (v0 < c)");
}

}  // namespace

double SpeedBoundsReport::worst() const {
    return std::max({xdot_above_c, xdot_below_zero, x_above_ct, x_below_zero, x_decrease});
}

SpeedBoundsReport speed_bounds(const BolusTrajectory& trajectory, double wave_speed) {
    SpeedBoundsReport r;
    for (std::size_t i = 0; i < trajectory.size(); ++i) {
        const double xd = trajectory.xdot[i];
        const double x = trajectory.x[i];
        r.xdot_above_c = std::max(r.xdot_above_c, xd - wave_speed);
        r.xdot_below_zero = std::max(r.xdot_below_zero, -xd);
        r.x_above_ct = std::max(r.x_above_ct, x - wave_speed * trajectory.times[i]);
        r.x_below_zero = std::max(r.x_below_zero, -x);
        if (i > 0) r.x_decrease = std::max(r.x_decrease, trajectory.x[i - 1] - x);
    }
    return r;
}

AveragedForce::AveragedForce(PulseModel model, int nodes) : model_(std::move(model)), nodes_(nodes) {
    require(nodes_ >= 3, ErrorKind::InvalidParameter, "averaged force needs at least 3 quadrature nodes");
    if (nodes_ % 2 == 0) ++nodes_;
}

double AveragedForce::operator()(double v, double x, std::span<const double> y) const {
    if (v <= 0.0) return 0.0;
    const int intervals = nodes_ - 1;
    const double h = 1.0 / intervals;
    double sum = model_.amplitude_factor(0.0, v, x, y) + model_.amplitude_factor(1.0, v, x, y);
    for (int i = 1; i < intervals; ++i) {
        sum += (i % 2 ? 4.0 : 2.0) * model_.amplitude_factor(i * h, v, x, y);
    }
    return sum * h / 3.0;
}

double average_force(const PulseModel& model, double v, double x, std::span<const double> y, int nodes) {
    return AveragedForce(model, nodes)(v, x, y);
}

BolusTrajectory integrate_oscillatory(const PulseModel& model, const KineticsModel& kinetics, double v0,
                                      std::span<const double> y0, double horizon, double dt,
                                      std::size_t record_every) {
    check_initial_speed(model, v0);
    const double eps = model.pulse_period;
    require(dt <= eps / 20.0 * (1.0 + 1e-12), ErrorKind::StepSize,
            "time step must resolve the pulses (dt <= eps/20)");
    const std::size_t steps = step_count(horizon, dt);
    const double c = model.wave_speed;
    const std::size_t dim = kinetics.dimension;

    Rhs rhs = [&](double t, std::span<const double> s, std::span<double> out) {
        const double x = s[0];
        const double xd = s[1];
        const auto y = s.subspan(2);
        const double phase = (t - x / c) / eps;
        const double v = 1.0 - xd / c;
        out[0] = xd;
        out[1] = eval_pulse_force(phase, v, x, y, model) - model.friction(t) * xd;
        kinetics.rate(x, y, out.subspan(2));
    };
    auto traj = run_rk4(rhs, dim, v0, y0, horizon, steps, record_every);
    traj.pulse_period = eps;
    return traj;
}

BolusTrajectory integrate_averaged(const PulseModel& model, const KineticsModel& kinetics,
                                   const AveragedForce& fbar, double v0, std::span<const double> y0,
                                   double horizon, double dt, std::size_t record_every) {
    check_initial_speed(model, v0);
    const std::size_t steps = step_count(horizon, dt);
    const double c = model.wave_speed;

    Rhs rhs = [&](double t, std::span<const double> s, std::span<double> out) {
        const double x = s[0];
        const double xd = s[1];
        const auto y = s.subspan(2);
        const double v = 1.0 - xd / c;
        out[0] = xd;
        out[1] = (v > 0.0 ? v * fbar(v, x, y) : 0.0) - model.friction(t) * xd;
        kinetics.rate(x, y, out.subspan(2));
    };
    auto traj = run_rk4(rhs, kinetics.dimension, v0, y0, horizon, steps, record_every);
    traj.pulse_period = 0.0;
    return traj;
}

std::pair<double, double> sup_distance(const BolusTrajectory& a, const BolusTrajectory& b) {
    require(a.size() == b.size(), ErrorKind::InvalidParameter, "trajectories must share their output grid");
    double ex = 0.0, ev = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        require(std::abs(a.times[i] - b.times[i]) <= 1e-9 * std::max(1.0, a.times[i]), ErrorKind::InvalidParameter,
                "trajectories must share their output grid");
        ex = std::max(ex, std::abs(a.x[i] - b.x[i]));
        ev = std::max(ev, std::abs(a.xdot[i] - b.xdot[i]));
    }
    return {ex, ev};
}

ConvergenceTable convergence_study(const PulseModel& model, const KineticsModel& kinetics, double v0,
                                   std::span<const double> y0, double horizon,
                                   std::span<const double> pulse_periods, const ConvergenceOptions& options) {
    require(pulse_periods.size() >= 3, ErrorKind::InvalidParameter, "convergence study needs at least 3 pulse periods");
    for (std::size_t i = 0; i < pulse_periods.size(); ++i) {
        require(pulse_periods[i] > 0.0 && pulse_periods[i] < 1.0, ErrorKind::InvalidParameter,
                "pulse periods must lie in (0, 1)");
        require(i == 0 || pulse_periods[i] < pulse_periods[i - 1], ErrorKind::InvalidParameter,
                "pulse periods must be strictly decreasing");
    }
    const std::size_t out = options.output_points;
    auto rounded_steps = [out](std::size_t minimum) { return ((minimum + out - 1) / out) * out; };

    ConvergenceTable table;
    {
        const std::size_t steps = rounded_steps(options.averaged_steps);
        AveragedForce fbar(model, options.quadrature_nodes);
        table.averaged = integrate_averaged(model, kinetics, fbar, v0, y0, horizon,
                                            horizon / static_cast<double>(steps), steps / out);
    }

    std::vector<std::future<BolusTrajectory>> runs;
    for (double eps : pulse_periods) {
        runs.push_back(std::async(std::launch::async, [&, eps] {
            PulseModel m = model;
            m.pulse_period = eps;
            const std::size_t min_steps =
                step_count(horizon, eps / static_cast<double>(options.steps_per_pulse));
            const std::size_t steps = rounded_steps(min_steps);
            return integrate_oscillatory(m, kinetics, v0, y0, horizon, horizon / static_cast<double>(steps),
                                         steps / out);
        }));
    }

    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const auto traj = runs[i].get();
        const auto [ex, ev] = sup_distance(traj, table.averaged);
        ConvergenceRow row{pulse_periods[i], ex, ev, nan, nan};
        if (i > 0) {
            const auto& prev = table.rows.back();
            const double ratio = std::log(prev.pulse_period / row.pulse_period);
            row.order_x = std::log(prev.error_x / ex) / ratio;
            row.order_xdot = std::log(prev.error_xdot / ev) / ratio;
            if (ex > prev.error_x || ev > prev.error_xdot) table.monotone = false;
        }
        table.rows.push_back(row);
    }
    const std::size_t n = table.rows.size();
    table.flagged = table.rows[n - 1].error_x > table.rows[n - 2].error_x ||
                    table.rows[n - 1].error_xdot > table.rows[n - 2].error_xdot;
    return table;
}

void write_trajectory_csv(std::ostream& out, const BolusTrajectory& trajectory) {
    const std::size_t k = trajectory.y.empty() ? 0 : trajectory.y.front().size();
    std::vector<std::string> columns{"t", "x", "xdot"};
    for (std::size_t i = 0; i < k; ++i) columns.push_back("y" + std::to_string(i + 1));
    CsvWriter csv(out);
    csv.header(columns);
    std::vector<double> row(3 + k);
    for (std::size_t i = 0; i < trajectory.size(); ++i) {
        row[0] = trajectory.times[i];
        row[1] = trajectory.x[i];
        row[2] = trajectory.xdot[i];
        std::copy(trajectory.y[i].begin(), trajectory.y[i].end(), row.begin() + 3);
        csv.row(row);
    }
}

}  // namespace villus
