#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "villus/model_core.hpp"

namespace villus {

/// Sampled solution of the bolus transport system. `pulse_period` is 0 for
/// trajectories of the averaged system.
struct BolusTrajectory {
    std::vector<double> times;
    std::vector<double> x;
    std::vector<double> xdot;
    std::vector<std::vector<double>> y;
    double pulse_period = 0.0;

    std::size_t size() const { return times.size(); }
};

/// Worst violations of 0 <= xdot <= c and 0 <= x <= c t along a trajectory
/// (all entries are >= 0; zero means the bound holds exactly).
struct SpeedBoundsReport {
    double xdot_above_c = 0.0;
    double xdot_below_zero = 0.0;
    double x_above_ct = 0.0;
    double x_below_zero = 0.0;
    double x_decrease = 0.0;

    double worst() const;
    bool holds(double tolerance) const { return worst() <= tolerance; }
};

SpeedBoundsReport speed_bounds(const BolusTrajectory& trajectory, double wave_speed);

/// F̄(V, X, Y) = ∫_0^1 g~(s, V, X, Y) ds by composite Simpson on `nodes` points
/// (rounded up to an odd count).
class AveragedForce {
public:
    explicit AveragedForce(PulseModel model, int nodes = 65);

    double operator()(double v, double x, std::span<const double> y) const;
    int nodes() const { return nodes_; }

private:
    PulseModel model_;
    int nodes_;
};

double average_force(const PulseModel& model, double v, double x, std::span<const double> y, int nodes = 65);

/// Classical RK4 on the pulsed system with phase (t - x/c)/eps. `dt` is
/// shrunk so that T is an integer number of steps; it must not exceed eps/20.
/// Every `record_every`-th step (and the last) is stored.
BolusTrajectory integrate_oscillatory(const PulseModel& model, const KineticsModel& kinetics, double v0,
                                      std::span<const double> y0, double horizon, double dt,
                                      std::size_t record_every = 1);

/// Same scheme applied to xddot = (1 - xdot/c) F̄(1 - xdot/c, x, y) - k xdot.
BolusTrajectory integrate_averaged(const PulseModel& model, const KineticsModel& kinetics,
                                   const AveragedForce& fbar, double v0, std::span<const double> y0,
                                   double horizon, double dt, std::size_t record_every = 1);

struct ConvergenceOptions {
    std::size_t output_points = 500;    ///< shared comparison grid (intervals)
    std::size_t steps_per_pulse = 20;   ///< oscillatory dt = eps / steps_per_pulse
    std::size_t averaged_steps = 20000; ///< minimum step count for the averaged run
    int quadrature_nodes = 65;
};

struct ConvergenceRow {
    double pulse_period = 0.0;
    double error_x = 0.0;
    double error_xdot = 0.0;
    double order_x = 0.0;     ///< NaN on the first row
    double order_xdot = 0.0;  ///< NaN on the first row
};

struct ConvergenceTable {
    std::vector<ConvergenceRow> rows;
    bool monotone = true;       ///< both error columns nonincreasing as eps decreases
    bool flagged = false;       ///< the two smallest eps are out of order
    BolusTrajectory averaged;   ///< reference run on the shared grid
};

ConvergenceTable convergence_study(const PulseModel& model, const KineticsModel& kinetics, double v0,
                                   std::span<const double> y0, double horizon,
                                   std::span<const double> pulse_periods,
                                   const ConvergenceOptions& options = {});

/// Sup-norm differences in x and xdot between two trajectories sampled on the same grid.
std::pair<double, double> sup_distance(const BolusTrajectory& a, const BolusTrajectory& b);

/// Columns t,x,xdot,y1..yK with a header row.
void write_trajectory_csv(std::ostream& out, const BolusTrajectory& trajectory);

}  // namespace villus
