#include "villus/macro_solver.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "villus/csv.hpp"
#include "villus/error.hpp"

namespace villus {

void AxialGrid::validate() const {
    require(length > 0.0, ErrorKind::InvalidGrid, "axial length must be positive");
    require(n_cells >= 1, ErrorKind::InvalidGrid, "axial grid needs at least one cell");
    require(horizon > 0.0, ErrorKind::InvalidGrid, "final time must be positive");
    require(cfl > 0.0 && cfl < 1.0, ErrorKind::InvalidGrid, "cfl must lie in (0,1)");
}

void InflowSignals::validate() const {
    require(static_cast<bool>(u0) && static_cast<bool>(v0), ErrorKind::InvalidParameter, "inflow signals must be set");
    require(std::abs(u0(0.0)) <= 1e-14 && std::abs(v0(0.0)) <= 1e-14, ErrorKind::InvalidParameter,
            "inflow must vanish at t = 0 (empty intestine)");
}

InflowSignals InflowSignals::zero() {
    auto z = [](double) { return 0.0; };
    return {z, z};
}

InflowSignals InflowSignals::sine_pulses(double amplitude, double half_period) {
    return {[](double) { return 0.0; },
            [=](double t) { return amplitude * std::max(0.0, std::sin(kPi * t / half_period)); }};
}

InflowSignals InflowSignals::smooth_meal(double amplitude, double rise_time, double u_share) {
    auto bump = [=](double t) { return amplitude * (1.0 - std::cos(kPi * t / rise_time)) / 2.0; };
    return {[=](double t) { return u_share * bump(t); }, bump};
}

namespace {

struct LocalRates {
    double cbar;
    double etap, etaa, rhobar, zeta;
};

LocalRates rates_at(const HomogenizedCoefficients& coeffs, const AbsorptionModel& absorption, double x, double t) {
    return {coeffs.cbar_e1_at(x, t), coeffs.etabar_p_at(x), coeffs.etabar_a_at(x, t), coeffs.rhobar_at(x),
            absorption.zeta ? absorption.zeta(x, t) : 0.0};
}

/// Row-sum bound of the reaction Jacobian at one point.
double reaction_lipschitz(const LocalRates& r, double ratio, const AbsorptionModel& absorption) {
    const double lphi = r.zeta * absorption.phi.lipschitz();
    const double transfer = ratio * absorption.alpha / absorption.omega * r.rhobar;
    const double row_u = ratio * (r.etap + r.etaa * absorption.g_a.lipschitz()) + lphi + transfer;
    const double row_v = lphi + ratio * r.rhobar / absorption.omega;
    return std::max(row_u, row_v);
}

struct StepLimits {
    double cmax = 0.0;
    double lipschitz = 0.0;
};

StepLimits limits_at(const AxialGrid& grid, const HomogenizedCoefficients& coeffs, const AbsorptionModel& absorption,
                     double t) {
    StepLimits s;
    for (int i = 0; i < grid.n_cells; ++i) {
        const auto r = rates_at(coeffs, absorption, grid.center(i), t);
        s.cmax = std::max(s.cmax, r.cbar);
        s.lipschitz = std::max(s.lipschitz, reaction_lipschitz(r, coeffs.ratio, absorption));
    }
    return s;
}

double step_bound(const AxialGrid& grid, const StepLimits& s) {
    double dt = std::numeric_limits<double>::infinity();
    if (s.cmax > 0.0) dt = grid.cfl * grid.dx() / s.cmax;
    if (s.lipschitz > 0.0) dt = std::min(dt, std::min(0.5, 1.0 - grid.cfl) / s.lipschitz);
    return dt;
}

}  // namespace

double stable_time_step(const AxialGrid& grid, const HomogenizedCoefficients& coeffs,
                        const AbsorptionModel& absorption) {
    grid.validate();
    std::vector<double> times = coeffs.t_samples;
    const int nt = 64;
    for (int k = 0; k <= nt; ++k) times.push_back(grid.horizon * k / nt);
    double dt = std::numeric_limits<double>::infinity();
    for (double t : times) {
        if (t < 0.0 || t > grid.horizon) continue;
        dt = std::min(dt, step_bound(grid, limits_at(grid, coeffs, absorption, t)));
    }
    require(std::isfinite(dt), ErrorKind::InvalidParameter, "no transport and no reactions: step size is unbounded");
    return dt;
}

void step_upwind(AxialFields& fields, const AxialGrid& grid, const HomogenizedCoefficients& coeffs,
                 const AbsorptionModel& absorption, const InflowSignals& inflow, double dt, StepBudget* budget) {
    const int n = grid.n_cells;
    require(static_cast<int>(fields.u.size()) == n && static_cast<int>(fields.v.size()) == n, ErrorKind::InvalidGrid,
            "field size does not match the grid");
    require(dt > 0.0, ErrorKind::StepSize, "time step must be positive");
    const double t = fields.time;
    const double dx = grid.dx();
    const double ratio = coeffs.ratio;
    const double a_over_w = absorption.alpha / absorption.omega;

    std::vector<LocalRates> r(static_cast<std::size_t>(n));
    StepLimits lim;
    for (int i = 0; i < n; ++i) {
        r[static_cast<std::size_t>(i)] = rates_at(coeffs, absorption, grid.center(i), t);
        require(r[static_cast<std::size_t>(i)].cbar >= 0.0, ErrorKind::AssumptionViolation,
                "mean axial speed must be nonnegative");
        lim.cmax = std::max(lim.cmax, r[static_cast<std::size_t>(i)].cbar);
        lim.lipschitz = std::max(lim.lipschitz, reaction_lipschitz(r[static_cast<std::size_t>(i)], ratio, absorption));
    }
    const double bound = step_bound(grid, lim);
    if (dt > bound * (1.0 + 1e-12)) {
        std::ostringstream msg;
        msg << "time step " << dt << " exceeds the stability bound " << bound << " at t=" << t;
        throw Error(ErrorKind::StepSize, msg.str());
    }

    const double u_in = inflow.u0(t), v_in = inflow.v0(t);
    std::vector<double> u(fields.u), v(fields.v);
    StepBudget b;
    b.time = t + dt;
    for (int i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        const double ui = fields.u[k], vi = fields.v[k];
        const double ul = i == 0 ? u_in : fields.u[k - 1];
        const double vl = i == 0 ? v_in : fields.v[k - 1];
        const double nu = dt * r[k].cbar / dx;
        const double volumic = r[k].zeta * absorption.phi(vi);
        const double uptake = ratio * (r[k].etap * ui + r[k].etaa * absorption.g_a(ui));
        const double recovered = ratio * a_over_w * r[k].rhobar * vi;
        const double v_loss = ratio * r[k].rhobar / absorption.omega * vi;
        u[k] = ui - nu * (ui - ul) + dt * (volumic - uptake + recovered);
        v[k] = vi - nu * (vi - vl) + dt * (-volumic - v_loss);
        b.absorbed += dt * dx * (uptake + v_loss - recovered);
        b.transformed += dt * dx * (volumic + recovered);
        b.stored += dx * (u[k] - ui + v[k] - vi);
        if (i + 1 < n) b.compression += dt * (r[k + 1].cbar - r[k].cbar) * (ui + vi);
    }
    b.inflow = dt * r[0].cbar * (u_in + v_in);
    b.outflow = dt * r[static_cast<std::size_t>(n - 1)].cbar * (fields.u.back() + fields.v.back());
    fields.u = std::move(u);
    fields.v = std::move(v);
    fields.time = t + dt;
    if (budget) *budget = b;
}

MacroSolution solve_macro(const AxialGrid& grid, const HomogenizedCoefficients& coeffs,
                          const AbsorptionModel& absorption, const InflowSignals& inflow,
                          const std::vector<double>& snapshot_times, const StepObserver& observer, double dt) {
    grid.validate();
    inflow.validate();
    for (std::size_t k = 0; k < snapshot_times.size(); ++k) {
        require(snapshot_times[k] >= 0.0 && snapshot_times[k] <= grid.horizon, ErrorKind::InvalidParameter,
                "snapshot times must lie in [0, T]");
        require(k == 0 || snapshot_times[k] > snapshot_times[k - 1], ErrorKind::InvalidParameter,
                "snapshot times must increase");
    }
    const double bound = stable_time_step(grid, coeffs, absorption);
    if (dt <= 0.0) dt = bound;
    const auto steps = static_cast<long>(std::ceil(grid.horizon / dt - 1e-9));
    dt = grid.horizon / static_cast<double>(steps);

    MacroSolution sol;
    sol.dt = dt;
    AxialFields f;
    f.u.assign(static_cast<std::size_t>(grid.n_cells), 0.0);
    f.v.assign(static_cast<std::size_t>(grid.n_cells), 0.0);
    std::size_t next = 0;
    while (next < snapshot_times.size() && snapshot_times[next] <= 0.0) {
        sol.snapshots.push_back(f);
        sol.snapshots.back().time = snapshot_times[next++];
    }
    if (observer) observer(f);
    sol.steps.reserve(static_cast<std::size_t>(steps));
    for (long n = 0; n < steps; ++n) {
        const AxialFields prev = f;
        StepBudget b;
        step_upwind(f, grid, coeffs, absorption, inflow, dt, &b);
        if (n + 1 == steps) f.time = grid.horizon;
        sol.steps.push_back(b);
        if (observer) observer(f);
        while (next < snapshot_times.size() && snapshot_times[next] <= f.time + 1e-12 * grid.horizon) {
            const double tau = snapshot_times[next++];
            const double w = std::clamp((tau - prev.time) / (f.time - prev.time), 0.0, 1.0);
            AxialFields s;
            s.time = tau;
            s.u.resize(f.u.size());
            s.v.resize(f.v.size());
            for (std::size_t i = 0; i < f.u.size(); ++i) {
                s.u[i] = (1.0 - w) * prev.u[i] + w * f.u[i];
                s.v[i] = (1.0 - w) * prev.v[i] + w * f.v[i];
            }
            sol.snapshots.push_back(std::move(s));
        }
    }
    sol.final_state = std::move(f);
    return sol;
}

std::vector<BudgetRow> mass_budget(const MacroSolution& solution) {
    std::vector<BudgetRow> rows;
    rows.reserve(solution.steps.size());
    for (const auto& s : solution.steps) {
        BudgetRow r;
        r.step = s;
        r.residual = s.stored - (s.inflow - s.outflow - s.absorbed + s.compression);
        const double throughput = std::abs(s.inflow) + std::abs(s.outflow) + std::abs(s.absorbed) +
                                  std::abs(s.compression) + std::abs(s.stored);
        r.relative_residual = throughput > 0.0 ? std::abs(r.residual) / throughput : std::abs(r.residual);
        rows.push_back(r);
    }
    return rows;
}

void write_macro_csv(std::ostream& out, const AxialGrid& grid, const MacroSolution& solution) {
    CsvWriter csv(out);
    csv.header({"t", "x1", "u", "v"});
    for (const auto& s : solution.snapshots) {
        for (int i = 0; i < grid.n_cells; ++i) {
            csv.row({s.time, grid.center(i), s.u[static_cast<std::size_t>(i)], s.v[static_cast<std::size_t>(i)]});
        }
    }
}

void write_budget_csv(std::ostream& out, const std::vector<BudgetRow>& rows) {
    CsvWriter csv(out);
    csv.header({"t", "inflow", "outflow", "absorbed", "transformed", "compression", "stored", "residual"});
    for (const auto& r : rows) {
        csv.row({r.step.time, r.step.inflow, r.step.outflow, r.step.absorbed, r.step.transformed, r.step.compression,
                 r.step.stored, r.residual});
    }
}

}  // namespace villus
