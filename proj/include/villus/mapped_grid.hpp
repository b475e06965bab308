#pragma once

#include <functional>
#include <vector>

#include "villus/functions.hpp"

namespace villus {

/// Finite-volume geometry of an axisymmetric tube R <= rho(z) mapped to the
/// rectangle (z, s) with s = R / rho(z). Cells are cell-centred: z_i = z0 + (i+1/2) hz,
/// s_j = (j+1/2) hs. All areas and volumes are per radian.
///
/// Diffusive face fluxes approximate ∫ grad(u)·n dA with the full metric of the
/// mapping, including the cross terms g^{zs} = -s rho'/rho.
class MappedAxisymmetricGrid {
public:
    struct Term {
        std::size_t cell;
        double coef;
    };

    /// Linear flux stencil; `dirichlet_coef` multiplies the inlet value.
    struct FaceStencil {
        std::vector<Term> terms;
        double dirichlet_coef = 0.0;
    };

    MappedAxisymmetricGrid(double z0, double length, int nz, int ns, bool periodic, ScalarFn radius,
                           ScalarFn radius_dz);

    int nz() const { return nz_; }
    int ns() const { return ns_; }
    bool periodic() const { return periodic_; }
    double hz() const { return hz_; }
    double hs() const { return hs_; }
    double z0() const { return z0_; }
    double length() const { return length_; }
    std::size_t cells() const { return static_cast<std::size_t>(nz_) * static_cast<std::size_t>(ns_); }
    std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) * ns_ + static_cast<std::size_t>(j); }

    double z_center(int i) const { return z0_ + (i + 0.5) * hz_; }
    double z_face(int k) const { return z0_ + k * hz_; }
    double s_center(int j) const { return (j + 0.5) * hs_; }
    double s_face(int j) const { return j * hs_; }

    double radius(double z) const { return radius_(z); }
    double radius_dz(double z) const { return radius_dz_(z); }

    const std::vector<double>& volumes() const { return volume_; }
    /// Number of axial faces: nz (periodic) or nz + 1 (inlet k = 0, outlet k = nz).
    int z_face_count() const { return periodic_ ? nz_ : nz_ + 1; }
    /// Cells on either side of axial face k (left is the -z side); -1 outside the domain.
    std::pair<long, long> z_face_cells(int k) const;
    /// Axial-face stencil for face k and radial row j (empty at the outlet).
    const FaceStencil& z_stencil(int k, int j) const { return z_stencils_[static_cast<std::size_t>(k) * ns_ + j]; }
    /// Radial-face stencil between rows j and j+1 of column i (j < ns - 1).
    const FaceStencil& s_stencil(int i, int j) const { return s_stencils_[static_cast<std::size_t>(i) * (ns_ - 1) + j]; }

    /// Wall area of the outer cell in column i (midpoint rule).
    double wall_area(int i) const { return wall_area_[static_cast<std::size_t>(i)]; }
    /// Axial component of the outward wall normal at z_i.
    double wall_normal_z(int i) const { return wall_normal_z_[static_cast<std::size_t>(i)]; }

    /// Net outward diffusive flux of u for every cell (wall faces excluded).
    void diffusive_divergence(const std::vector<double>& u, double inlet_value, std::vector<double>& out) const;

    /// Volume fluxes through every face from a stream function Psi(z, s)
    /// (per radian; axial flux = Psi(top) - Psi(bottom)). Exactly discrete divergence free.
    void fluxes_from_stream(const std::function<double(double z, double s)>& stream, std::vector<double>& z_flux,
                            std::vector<double>& s_flux) const;
    /// Midpoint-rule volume fluxes from the velocity c(z, X) in physical coordinates.
    void fluxes_from_velocity(const std::function<Vec3(double z, const Vec3& X)>& velocity,
                              std::vector<double>& z_flux, std::vector<double>& s_flux) const;

    /// First-order upwind advection c·grad(u) integrated over each cell, in the
    /// non-conservative form sum_f min(phi_f, 0)(u_nb - u_P). Inflow through the
    /// inlet face uses `inlet_value`; backflow at the outlet sees zero gradient.
    void upwind_advection(const std::vector<double>& z_flux, const std::vector<double>& s_flux,
                          const std::vector<double>& u, double inlet_value, std::vector<double>& out) const;

private:
    void build_stencils();

    double z0_, length_;
    int nz_, ns_;
    bool periodic_;
    ScalarFn radius_, radius_dz_;
    double hz_, hs_;
    std::vector<double> volume_;
    std::vector<FaceStencil> z_stencils_;
    std::vector<FaceStencil> s_stencils_;
    std::vector<double> wall_area_;
    std::vector<double> wall_normal_z_;
};

}  // namespace villus
