#pragma once

#include <iosfwd>
#include <vector>

#include "villus/geometry.hpp"
#include "villus/model_core.hpp"

namespace villus {

/// Theta(x1, X, t, u, v) = eta_p u + eta_a g_a(u) - (alpha/omega) rho v:
/// the net boundary loss of nutrient at a wall point.
double theta_surface(double x1, const Vec3& X, double t, double u, double v, const AbsorptionModel& absorption);

/// Averaged coefficients of the 1-d limit system, tabulated on (x1, t) sample
/// grids and interpolated bilinearly (values are held outside the grids).
struct HomogenizedCoefficients {
    std::vector<double> x1_samples;
    std::vector<double> t_samples;
    std::vector<double> cbar_e1;   ///< [ix * nt + it]
    std::vector<Vec3> cbar;        ///< full cell average of c, [ix * nt + it]
    std::vector<double> etabar_a;  ///< [ix * nt + it]
    std::vector<double> etabar_p;  ///< [ix]
    std::vector<double> rhobar;    ///< [ix]
    PeriodCellMeasures measures;
    double ratio = 0.0;            ///< R(P)
    double divergence_residual = 0.0;     ///< sampled max |div_X c|
    double normal_trace_residual = 0.0;   ///< sampled max |c·N| on the wall

    double cbar_e1_at(double x1, double t) const;
    double etabar_p_at(double x1) const;
    double etabar_a_at(double x1, double t) const;
    double rhobar_at(double x1) const;

    /// x1- and t-independent coefficients (single-sample tables).
    static HomogenizedCoefficients uniform(double cbar_e1, double etabar_p, double etabar_a, double rhobar,
                                           double ratio);
};

struct AveragingGrid {
    int n_z = 64;
    int n_theta = 64;
    int n_rho = 32;
};

struct VelocityAssumptions {
    double min_axial = 0.0;           ///< min sampled c·e1 (C1 needs >= 0)
    double divergence_residual = 0.0; ///< max sampled |div_X c| (C2)
    double normal_trace_residual = 0.0; ///< max sampled |c·N| on the wall (C3)
};

/// Sampled checks of the velocity assumptions on one period cell.
VelocityAssumptions check_velocity(const VillusProfile& profile, const VelocityField& velocity, double x1, double t,
                                   int samples = 200, unsigned seed = 5);

/// Surface averages of eta_p, eta_a, rho; volume average of c; R(P). Throws
/// AssumptionViolation when (C1) fails at a sample.
HomogenizedCoefficients homogenized_coefficients(const VillusProfile& profile, const VelocityField& velocity,
                                                 const AbsorptionModel& absorption,
                                                 const std::vector<double>& x1_samples,
                                                 const std::vector<double>& t_samples, const AveragingGrid& grid = {});

/// Columns x1,t,cbar,etap,etaa,rhobar.
void write_coefficients_csv(std::ostream& out, const HomogenizedCoefficients& coeffs);

struct CellProblemData {
    double p = 0.0;      ///< axial macroscopic gradient
    double mu = 0.0;     ///< macroscopic u
    double nu = 0.0;     ///< macroscopic v
    double delta = 0.0;  ///< volumic source zeta phi(v)
    double x1 = 0.0;
    double t = 0.0;
    double lambda = 0.0;
};

/// lambda = R(P) Theta_bar(mu, nu) + (cbar·e1) p - delta, with
/// Theta_bar = etabar_p mu + etabar_a g_a(mu) - (alpha/omega) rhobar nu.
double lambda_from_compatibility(const CellProblemData& data, const HomogenizedCoefficients& coeffs,
                                 const AbsorptionModel& absorption);

struct SolvabilityCheck {
    bool solvable = false;
    double residual = 0.0;  ///< |lambda - lambda_compat|
};

SolvabilityCheck check_solvability(const CellProblemData& data, const HomogenizedCoefficients& coeffs,
                                   const AbsorptionModel& absorption, double tolerance);

/// Corrector u1 on the cell-centred (z, rho_hat) grid of the mapped unit cell.
struct CorrectorField {
    int n_z = 0;
    int n_rho = 0;
    std::vector<double> z;        ///< cell centres, size n_z
    std::vector<double> rho_hat;  ///< cell centres, size n_rho
    std::vector<double> values;   ///< [i * n_rho + j]
    std::vector<double> volumes;  ///< cell volumes per radian
    double mean = 0.0;            ///< volume-weighted mean of values

    double at(int i, int j) const { return values[static_cast<std::size_t>(i) * n_rho + j]; }
};

void write_corrector_csv(std::ostream& out, const CorrectorField& field);

struct CellGrid {
    int n_z = 64;
    int n_rho = 64;
};

struct CellSolution {
    CorrectorField corrector;
    double lambda = 0.0;            ///< from the bordered (mean-pinned) solve
    double lambda_projection = 0.0; ///< -w·f / w·V with w the computed left kernel
    double relative_residual = 0.0;
    std::vector<double> left_kernel; ///< normalized so that w·V = 1
    std::vector<double> rhs;         ///< f in A u = f + lambda V
    std::vector<double> volumes;     ///< V

    /// min_u |A u - f - lambda V|: zero only for the compatible lambda.
    double incompatibility(double lambda) const;
};

/// Finite-volume solve of the cell problem
///   -chi Δu1 + c·(p e1 + grad u1) = lambda + delta in the cell,
///   (p e1 + grad u1)·N = -Theta/chi on the wall,
/// for an axisymmetric profile. Diffusion uses centred differences with the full
/// mapping metric, advection first-order upwinding; lambda is the value that makes
/// the singular system consistent and u1 has zero volume mean.
CellSolution solve_cell_problem(const VillusProfile& profile, const VelocityField& velocity,
                                const AbsorptionModel& absorption, const CellProblemData& data,
                                const CellGrid& grid = {});

}  // namespace villus
