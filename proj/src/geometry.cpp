#include "villus/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <random>
#include <sstream>

#include "villus/error.hpp"

namespace villus {

namespace {

void check_grid(int n_z, int n_theta) {
    require(n_z >= 8 && n_theta >= 8, ErrorKind::InvalidParameter, "surface grids need at least 8 points per direction");
}

/// Simpson weights on [0,1] for `intervals` (even) intervals.
std::vector<double> simpson_weights(int intervals) {
    std::vector<double> w(static_cast<std::size_t>(intervals) + 1);
    const double h = 1.0 / intervals;
    for (int i = 0; i <= intervals; ++i) {
        const double c = (i == 0 || i == intervals) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        w[static_cast<std::size_t>(i)] = c * h / 3.0;
    }
    return w;
}

/// Integrates f over one period with the volume element; returns (∫ f, |P|).
template <class T, class F, class Accumulate>
std::pair<T, double> integrate_volume(const VillusProfile& profile, const F& f, int n_z, int n_theta, int n_rho,
                                      T zero, Accumulate accumulate) {
    check_grid(n_z, n_theta);
    require(n_rho >= 2, ErrorKind::InvalidParameter, "radial quadrature needs at least 2 intervals");
    profile.validate();
    const int intervals = n_rho % 2 ? n_rho + 1 : n_rho;
    const auto ws = simpson_weights(intervals);
    const double hz = 1.0 / n_z;
    const double ht = kTwoPi / n_theta;
    T sum = zero;
    double volume = 0.0;
    for (int i = 0; i < n_z; ++i) {
        const double z = (i + 0.5) * hz;
        for (int j = 0; j < n_theta; ++j) {
            const double th = j * ht;
            const double rho = profile.radius(z, th);
            const double c = std::cos(th), s = std::sin(th);
            for (int k = 0; k <= intervals; ++k) {
                const double sh = static_cast<double>(k) / intervals;
                const double w = ws[static_cast<std::size_t>(k)] * sh * rho * rho * hz * ht;
                if (w == 0.0) continue;
                const double R = sh * rho;
                accumulate(sum, f(Vec3{z, R * c, R * s}), w);
                volume += w;
            }
        }
    }
    return {sum, volume};
}

}  // namespace

void VillusProfile::validate() const {
    require(base_radius > 0.0, ErrorKind::InvalidProfile, "base radius must be positive");
    require(static_cast<bool>(psi) && static_cast<bool>(psi_z) && static_cast<bool>(psi_theta) &&
                static_cast<bool>(psi_zz),
            ErrorKind::InvalidProfile, "profile functions must be set");
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> uz(0.0, 1.0);
    std::uniform_real_distribution<double> ut(0.0, kTwoPi);
    for (int n = 0; n < 100; ++n) {
        const double z = uz(rng), th = ut(rng);
        const double p = psi(z, th);
        const double tol = 1e-12 * std::max(1.0, std::abs(p));
        require(std::abs(psi(z + 1.0, th) - p) <= tol && std::abs(psi(z, th + kTwoPi) - p) <= tol,
                ErrorKind::InvalidProfile, "profile must be 1-periodic in z and 2 pi periodic in theta");
        require(radius(z, th) > 0.0, ErrorKind::InvalidProfile, "profile radius must stay positive");
        if (axisymmetric) {
            require(std::abs(psi(z, 0.0) - p) <= tol, ErrorKind::InvalidProfile,
                    "profile flagged axisymmetric depends on theta");
        }
    }
}

VillusProfile flat_profile(double base_radius) {
    VillusProfile p;
    p.base_radius = base_radius;
    auto zero = [](double, double) { return 0.0; };
    p.psi = p.psi_z = p.psi_theta = p.psi_zz = zero;
    p.axisymmetric = true;
    return p;
}

VillusProfile cosine_profile(double base_radius, double amplitude) {
    return lobed_profile(base_radius, amplitude, 0.0, 0);
}

VillusProfile lobed_profile(double base_radius, double amplitude, double modulation, int lobes) {
    VillusProfile p;
    p.base_radius = base_radius;
    const double A = amplitude, B = modulation;
    const double m = lobes;
    p.psi = [=](double z, double th) { return A * (1.0 - std::cos(kTwoPi * z)) * (1.0 + B * std::cos(m * th)); };
    p.psi_z = [=](double z, double th) { return A * kTwoPi * std::sin(kTwoPi * z) * (1.0 + B * std::cos(m * th)); };
    p.psi_zz = [=](double z, double th) {
        return A * kTwoPi * kTwoPi * std::cos(kTwoPi * z) * (1.0 + B * std::cos(m * th));
    };
    p.psi_theta = [=](double z, double th) { return -A * (1.0 - std::cos(kTwoPi * z)) * B * m * std::sin(m * th); };
    p.axisymmetric = (B == 0.0 || lobes == 0);
    return p;
}

VillusProfile tabulated_profile(double base_radius, std::size_t nz, std::size_t ntheta, std::vector<double> values) {
    require(nz >= 3, ErrorKind::InvalidProfile, "tabulated profile needs at least 3 z samples");
    PeriodicGrid2D grid(nz, ntheta, std::move(values), 1.0, kTwoPi);
    const double hz = 1.0 / static_cast<double>(nz);
    const double ht = kTwoPi / static_cast<double>(ntheta);
    VillusProfile p;
    p.base_radius = base_radius;
    p.psi = [grid](double z, double th) { return grid(z, th); };
    p.psi_z = [grid, hz](double z, double th) { return (grid(z + hz, th) - grid(z - hz, th)) / (2.0 * hz); };
    p.psi_zz = [grid, hz](double z, double th) {
        return (grid(z + hz, th) - 2.0 * grid(z, th) + grid(z - hz, th)) / (hz * hz);
    };
    if (ntheta == 1) {
        p.psi_theta = [](double, double) { return 0.0; };
    } else {
        p.psi_theta = [grid, ht](double z, double th) { return (grid(z, th + ht) - grid(z, th - ht)) / (2.0 * ht); };
    }
    p.axisymmetric = ntheta == 1;
    return p;
}

VillusProfile load_profile_csv(std::istream& in, double base_radius) {
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), ErrorKind::InvalidProfile, "profile table is empty");
    struct Sample { double z, th, psi; };
    std::vector<Sample> samples;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        Sample s{};
        require(static_cast<bool>(ls >> s.z >> s.th >> s.psi), ErrorKind::InvalidProfile,
                "malformed profile row at line " + std::to_string(line_no));
        samples.push_back(s);
    }
    require(!samples.empty(), ErrorKind::InvalidProfile, "profile table has no rows");
    std::map<double, std::size_t> zs, ths;
    for (const auto& s : samples) {
        zs.emplace(s.z, 0);
        ths.emplace(s.th, 0);
    }
    const std::size_t nz = zs.size(), nt = ths.size();
    require(samples.size() == nz * nt, ErrorKind::InvalidProfile, "profile table must be a full z x theta grid");
    std::size_t k = 0;
    for (auto& [z, idx] : zs) {
        require(std::abs(z - static_cast<double>(k) / nz) < 1e-9, ErrorKind::InvalidProfile,
                "profile z samples must be uniform on [0,1)");
        idx = k++;
    }
    k = 0;
    for (auto& [th, idx] : ths) {
        require(std::abs(th - kTwoPi * static_cast<double>(k) / nt) < 1e-9, ErrorKind::InvalidProfile,
                "profile theta samples must be uniform on [0,2pi)");
        idx = k++;
    }
    std::vector<double> values(nz * nt);
    for (const auto& s : samples) values[zs[s.z] * nt + ths[s.th]] = s.psi;
    return tabulated_profile(base_radius, nz, nt, std::move(values));
}

VillusProfile scaled_profile(const VillusProfile& profile, double factor) {
    VillusProfile p = profile;
    auto scale = [factor](VillusProfile::Fn2 f) {
        return [factor, f = std::move(f)](double z, double th) { return factor * f(z, th); };
    };
    p.psi = scale(profile.psi);
    p.psi_z = scale(profile.psi_z);
    p.psi_theta = scale(profile.psi_theta);
    p.psi_zz = scale(profile.psi_zz);
    return p;
}

Vec3 wall_point(const VillusProfile& profile, double z, double theta) {
    const double rho = profile.radius(z, theta);
    return {z, rho * std::cos(theta), rho * std::sin(theta)};
}

namespace {

/// Area element |X_z x X_theta| of the wall parametrization.
double area_element(const VillusProfile& profile, double z, double th) {
    const double rho = profile.radius(z, th);
    const double rz = profile.radius_dz(z, th);
    const double rt = profile.radius_dtheta(z, th);
    return std::sqrt(rho * rho * (1.0 + rz * rz) + rt * rt);
}

}  // namespace

PeriodCellMeasures cell_measures(const VillusProfile& profile, int n_z, int n_theta) {
    check_grid(n_z, n_theta);
    profile.validate();
    const double hz = 1.0 / n_z;
    const double ht = kTwoPi / n_theta;
    double volume = 0.0, area = 0.0;
    for (int i = 0; i < n_z; ++i) {
        const double z = (i + 0.5) * hz;
        for (int j = 0; j < n_theta; ++j) {
            const double th = j * ht;
            const double rho = profile.radius(z, th);
            volume += 0.5 * rho * rho;
            area += area_element(profile, z, th);
        }
    }
    PeriodCellMeasures m;
    m.volume = volume * hz * ht;
    m.lateral_area = area * hz * ht;
    m.ratio = m.lateral_area / m.volume;
    return m;
}

double surface_average(const VillusProfile& profile, const SurfaceFn& f, int n_z, int n_theta) {
    check_grid(n_z, n_theta);
    profile.validate();
    const double hz = 1.0 / n_z;
    const double ht = kTwoPi / n_theta;
    double weighted = 0.0, area = 0.0;
    for (int i = 0; i < n_z; ++i) {
        const double z = (i + 0.5) * hz;
        for (int j = 0; j < n_theta; ++j) {
            const double th = j * ht;
            const double dA = area_element(profile, z, th);
            weighted += dA * f(wall_point(profile, z, th));
            area += dA;
        }
    }
    return weighted / area;
}

double volume_average(const VillusProfile& profile, const VolumeFn& f, int n_z, int n_theta, int n_rho) {
    const auto [sum, vol] = integrate_volume(profile, f, n_z, n_theta, n_rho, 0.0,
                                             [](double& acc, double v, double w) { acc += w * v; });
    return sum / vol;
}

Vec3 volume_average(const VillusProfile& profile, const VolumeVecFn& f, int n_z, int n_theta, int n_rho) {
    const auto [sum, vol] = integrate_volume(profile, f, n_z, n_theta, n_rho, Vec3{0.0, 0.0, 0.0},
                                             [](Vec3& acc, const Vec3& v, double w) {
                                                 for (int k = 0; k < 3; ++k) acc[k] += w * v[k];
                                             });
    return {sum[0] / vol, sum[1] / vol, sum[2] / vol};
}

Vec3 outward_normal(const VillusProfile& profile, double z, double theta) {
    const double rho = profile.radius(z, theta);
    require(rho > 1e-14, ErrorKind::SingularGeometry, "wall radius vanishes; tangent basis is degenerate");
    const double rz = profile.radius_dz(z, theta);
    const double rt = profile.radius_dtheta(z, theta);
    const double c = std::cos(theta), s = std::sin(theta);
    // -(X_z x X_theta), which points away from the axis.
    const Vec3 n{-rho * rz, rho * c + rt * s, rho * s - rt * c};
    const double len = norm(n);
    return {n[0] / len, n[1] / len, n[2] / len};
}

}  // namespace villus
