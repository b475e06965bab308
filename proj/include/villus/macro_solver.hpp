#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include "villus/homogenize.hpp"
#include "villus/model_core.hpp"

namespace villus {

/// Truncation [0, length] of the half-line, split into n_cells cells.
struct AxialGrid {
    double length = 1.0;
    int n_cells = 100;
    double horizon = 1.0;  ///< T
    double cfl = 0.9;

    double dx() const { return length / n_cells; }
    double center(int i) const { return (i + 0.5) * dx(); }
    void validate() const;
};

struct AxialFields {
    std::vector<double> u;
    std::vector<double> v;
    double time = 0.0;
};

/// Dirichlet data at x1 = 0. Both signals must vanish at t = 0.
struct InflowSignals {
    ScalarFn u0;
    ScalarFn v0;

    void validate() const;

    static InflowSignals zero();
    /// v0 = amplitude * max(0, sin(pi t / half_period)), u0 = 0.
    static InflowSignals sine_pulses(double amplitude, double half_period = 1.0);
    /// amplitude * (1 - cos(pi t / rise_time)) / 2 in both u0 (scaled by u_share) and v0.
    static InflowSignals smooth_meal(double amplitude, double rise_time, double u_share = 0.0);
};

/// Contributions of one step to the mass ledger (all integrated over the domain).
struct StepBudget {
    double time = 0.0;
    double inflow = 0.0;
    double outflow = 0.0;
    double absorbed = 0.0;     ///< wall uptake of u plus the non-recovered part of the v loss
    double transformed = 0.0;  ///< v -> u conversion; cancels in the total
    double compression = 0.0;  ///< sum (c_{i+1} - c_i) u_i dt from a varying mean speed
    double stored = 0.0;       ///< change of ∫(u + v)
};

/// Largest stable step: min(cfl dx / max c, 0.5 / L, (1 - cfl) / L) with L the
/// reaction Lipschitz bound, sampled at the cell centres and over [0, T].
double stable_time_step(const AxialGrid& grid, const HomogenizedCoefficients& coeffs,
                        const AbsorptionModel& absorption);

/// One explicit upwind step. Throws StepSize (leaving `fields` untouched) when dt
/// breaks the CFL or reaction restriction at the current time.
void step_upwind(AxialFields& fields, const AxialGrid& grid, const HomogenizedCoefficients& coeffs,
                 const AbsorptionModel& absorption, const InflowSignals& inflow, double dt,
                 StepBudget* budget = nullptr);

struct MacroSolution {
    std::vector<AxialFields> snapshots;  ///< at the requested times, linear in time between steps
    std::vector<StepBudget> steps;
    AxialFields final_state;
    double dt = 0.0;
};

using StepObserver = std::function<void(const AxialFields&)>;

MacroSolution solve_macro(const AxialGrid& grid, const HomogenizedCoefficients& coeffs,
                          const AbsorptionModel& absorption, const InflowSignals& inflow,
                          const std::vector<double>& snapshot_times = {}, const StepObserver& observer = {},
                          double dt = 0.0);

struct BudgetRow {
    StepBudget step;
    double residual = 0.0;           ///< stored - (inflow - outflow - absorbed + compression)
    double relative_residual = 0.0;  ///< residual / throughput
};

std::vector<BudgetRow> mass_budget(const MacroSolution& solution);

/// Columns t,x1,u,v for every snapshot.
void write_macro_csv(std::ostream& out, const AxialGrid& grid, const MacroSolution& solution);
/// Columns t,inflow,outflow,absorbed,transformed,compression,stored,residual.
void write_budget_csv(std::ostream& out, const std::vector<BudgetRow>& rows);

}  // namespace villus
