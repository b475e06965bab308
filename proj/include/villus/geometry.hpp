#pragma once

#include <functional>
#include <iosfwd>
#include <string>

#include "villus/functions.hpp"

namespace villus {

/// One period of the rescaled villous domain as a radial graph
/// rho(z, theta) = r (1 + psi(z, theta)), psi 1-periodic in z and 2 pi periodic in theta.
struct VillusProfile {
    using Fn2 = std::function<double(double z, double theta)>;

    double base_radius = 1.0;
    Fn2 psi;
    Fn2 psi_z;
    Fn2 psi_theta;
    Fn2 psi_zz;
    bool axisymmetric = true;  ///< psi independent of theta

    double radius(double z, double theta = 0.0) const { return base_radius * (1.0 + psi(z, theta)); }
    double radius_dz(double z, double theta = 0.0) const { return base_radius * psi_z(z, theta); }
    double radius_dtheta(double z, double theta = 0.0) const { return base_radius * psi_theta(z, theta); }
    double radius_dzz(double z, double theta = 0.0) const { return base_radius * psi_zz(z, theta); }

    /// Sampled periodicity and positivity checks; throws InvalidProfile.
    void validate() const;
};

VillusProfile flat_profile(double base_radius);
/// psi(z) = amplitude (1 - cos 2 pi z).
VillusProfile cosine_profile(double base_radius, double amplitude);
/// psi(z, theta) = amplitude (1 - cos 2 pi z)(1 + modulation cos(lobes theta)).
VillusProfile lobed_profile(double base_radius, double amplitude, double modulation, int lobes);
/// Values psi(i/nz, 2 pi j/ntheta) stored row-major; bilinear interpolation,
/// derivatives by centered differences over one grid spacing.
VillusProfile tabulated_profile(double base_radius, std::size_t nz, std::size_t ntheta, std::vector<double> values);
/// Reads columns z,theta,psi (header row required) sampled on a uniform periodic grid.
VillusProfile load_profile_csv(std::istream& in, double base_radius);
/// psi -> factor * psi.
VillusProfile scaled_profile(const VillusProfile& profile, double factor);

struct PeriodCellMeasures {
    double volume = 0.0;        ///< |P|
    double lateral_area = 0.0;  ///< |dP ∩ dΩ|
    double ratio = 0.0;         ///< R(P) = lateral_area / volume
};

/// Periodic midpoint rule in z, trapezoid in theta (spectrally accurate for smooth profiles).
PeriodCellMeasures cell_measures(const VillusProfile& profile, int n_z, int n_theta);

/// Point of the villous wall at (z, theta).
Vec3 wall_point(const VillusProfile& profile, double z, double theta);

using SurfaceFn = std::function<double(const Vec3& X)>;
using VolumeFn = std::function<double(const Vec3& X)>;
using VolumeVecFn = std::function<Vec3(const Vec3& X)>;

/// Area-weighted mean of f over the villous wall of one period.
double surface_average(const VillusProfile& profile, const SurfaceFn& f, int n_z, int n_theta);

/// Volume mean of f over one period: periodic midpoint in z and trapezoid in theta, Simpson
/// in the normalized radius rho/rho(z, theta) with `n_rho` intervals (made even).
double volume_average(const VillusProfile& profile, const VolumeFn& f, int n_z, int n_theta, int n_rho);
Vec3 volume_average(const VillusProfile& profile, const VolumeVecFn& f, int n_z, int n_theta, int n_rho);

/// Outward unit normal of the wall at (z, theta).
Vec3 outward_normal(const VillusProfile& profile, double z, double theta);

}  // namespace villus
