#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include "villus/geometry.hpp"
#include "villus/homogenize.hpp"
#include "villus/macro_solver.hpp"
#include "villus/model_core.hpp"

namespace villus {

/// Boundary-fitted grid of the eps-scale tube {R <= eps r (1 + psi(x1/eps))}, x1 in [0, length].
struct MicroGrid {
    double eps = 0.25;
    double length = 1.0;
    int n_z_per_period = 16;
    int n_rho = 16;
    double horizon = 1.0;
    double dt = 0.0;  ///< 0 selects the stability bound

    int periods() const;
    int n_z() const { return periods() * n_z_per_period; }
    void validate() const;
};

struct MicroFields {
    std::vector<double> u;  ///< [i * n_rho + j]
    std::vector<double> v;
    double time = 0.0;
};

struct MicroSolution {
    int n_z = 0;
    int n_rho = 0;
    std::vector<double> x1;       ///< axial cell centres
    std::vector<double> rho_hat;  ///< radial cell centres
    std::vector<double> volumes;  ///< cell volumes per radian
    std::vector<MicroFields> snapshots;
    double dt = 0.0;
    long steps = 0;
    double max_v = 0.0;  ///< over all cells and steps
    double min_u = 0.0;
    double min_v = 0.0;
};

/// Explicit finite-volume evolution of
///   v_t = eps omega Δv - c·Dv - zeta phi(v),  omega dv/dn = -rho v,
///   u_t = eps chi Δu - c·Du + zeta phi(v),  chi du/dn = -eta_p u - eta_a g_a(u) + (alpha/omega) rho v,
/// with Dirichlet inflow at x1 = 0, free outflow at x1 = length and zero initial data.
/// `velocity` and the coefficient fields are given in the unit-cell variable X = x/eps.
MicroSolution solve_micro(const MicroGrid& grid, const VillusProfile& profile, const VelocityField& velocity,
                          const AbsorptionModel& absorption, const InflowSignals& inflow,
                          const std::vector<double>& snapshot_times);

/// Largest admissible explicit step (Gershgorin bound of the assembled operator).
double micro_stable_time_step(const MicroGrid& grid, const VillusProfile& profile, const VelocityField& velocity,
                              const AbsorptionModel& absorption);

/// Area-weighted average over each cross-section of a cell field.
std::vector<double> cross_section_average(const std::vector<double>& field, const MicroSolution& layout);

/// Columns t,x1,rho_hat,u,v for every snapshot.
void write_micro_csv(std::ostream& out, const MicroSolution& solution);

struct ComparisonScenario {
    VillusProfile profile;
    VelocityField velocity;
    AbsorptionModel absorption;
    InflowSignals inflow;
    double length = 1.0;
    double horizon = 1.0;
    int n_z_per_period = 16;
    int n_rho = 16;
    int macro_cells = 800;
    double macro_cfl = 0.9;
    std::vector<double> snapshot_times;
    AveragingGrid averaging;
};

struct ComparisonRow {
    double eps = 0.0;
    double error_u = 0.0;
    double error_v = 0.0;
    double error() const { return std::max(error_u, error_v); }
};

struct ComparisonTable {
    std::vector<ComparisonRow> rows;
    bool monotone = false;  ///< errors strictly decrease with eps
    bool flagged = false;   ///< not monotone: probably under-resolved
};

/// Solves the micro problem for every eps (concurrently) and the homogenized
/// problem once; errors are sup over snapshot times and x1 of the cross-section
/// averages against the macro solution interpolated linearly in x1.
ComparisonTable compare_micro_macro(const ComparisonScenario& scenario, const std::vector<double>& eps_list);

/// Columns eps,error_u,error_v.
void write_comparison_csv(std::ostream& out, const ComparisonTable& table);

}  // namespace villus
