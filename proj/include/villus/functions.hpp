#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

namespace villus {

using Vec3 = std::array<double, 3>;

inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Reduces `s` into [0, period).
inline double wrap(double s, double period = 1.0) {
    double r = std::fmod(s, period);
    if (r < 0.0) r += period;
    if (r >= period) r -= period;
    return r;
}

/// Piecewise-linear interpolation of (x, y) samples with strictly increasing x.
/// Outside the sampled range the end values are held.
class LinearTable {
public:
    LinearTable() = default;
    LinearTable(std::vector<double> x, std::vector<double> y);

    double operator()(double x) const;
    bool empty() const { return x_.empty(); }
    std::span<const double> abscissae() const { return x_; }
    std::span<const double> values() const { return y_; }

private:
    std::vector<double> x_;
    std::vector<double> y_;
};

/// Piecewise-linear interpolation of samples of a function with the given period.
/// Abscissae must lie in [0, period) and be strictly increasing.
class PeriodicTable {
public:
    PeriodicTable() = default;
    PeriodicTable(std::vector<double> x, std::vector<double> y, double period = 1.0);

    double operator()(double x) const;
    double period() const { return period_; }

private:
    std::vector<double> x_;
    std::vector<double> y_;
    double period_ = 1.0;
};

/// Bilinear interpolation on a uniform periodic grid over [0,px) x [0,py).
/// values are stored row-major: values[i * ny + j] at (i*px/nx, j*py/ny).
class PeriodicGrid2D {
public:
    PeriodicGrid2D() = default;
    PeriodicGrid2D(std::size_t nx, std::size_t ny, std::vector<double> values, double px, double py);

    double operator()(double x, double y) const;

private:
    std::size_t nx_ = 0;
    std::size_t ny_ = 0;
    std::vector<double> values_;
    double px_ = 1.0;
    double py_ = 1.0;
};

/// Bounded nondecreasing law vanishing for s <= 0 (g_a, phi).
struct SaturatingLaw {
    enum class Family { Zero, MichaelisMenten, Linear };

    Family family = Family::Zero;
    double vmax = 0.0;   // MichaelisMenten: saturation rate
    double km = 1.0;     // MichaelisMenten: half-saturation constant
    double slope = 0.0;  // Linear: s -> slope * max(s, 0)

    double operator()(double s) const;
    double lipschitz() const;

    static SaturatingLaw zero() { return {}; }
    static SaturatingLaw michaelis_menten(double vmax, double km);
    static SaturatingLaw linear(double slope);
};

using ScalarFn = std::function<double(double)>;

}  // namespace villus
