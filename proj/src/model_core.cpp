#include "villus/model_core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "villus/error.hpp"

namespace villus {

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidParameter: return "invalid-parameter";
        case ErrorKind::InvalidInitialCondition: return "invalid-initial-condition";
        case ErrorKind::StepSize: return "step-size";
        case ErrorKind::InvalidProfile: return "invalid-profile";
        case ErrorKind::SingularGeometry: return "singular-geometry";
        case ErrorKind::AssumptionViolation: return "assumption-violation";
        case ErrorKind::SolverFailure: return "solver-failure";
        case ErrorKind::UnsupportedGeometry: return "unsupported-geometry";
        case ErrorKind::InvalidGrid: return "invalid-grid";
        case ErrorKind::Config: return "config";
        case ErrorKind::Io: return "io";
    }
    return "unknown";
}

// ---------------------------------------------------------------------------
// Tables and laws

LinearTable::LinearTable(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
    require(!x_.empty() && x_.size() == y_.size(), ErrorKind::InvalidParameter,
            "table needs matching, nonempty abscissae and values");
    for (std::size_t i = 1; i < x_.size(); ++i) {
        require(x_[i] > x_[i - 1], ErrorKind::InvalidParameter, "table abscissae must increase strictly");
    }
}

double LinearTable::operator()(double x) const {
    if (x <= x_.front()) return y_.front();
    if (x >= x_.back()) return y_.back();
    const auto it = std::upper_bound(x_.begin(), x_.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - x_.begin());
    const double w = (x - x_[i - 1]) / (x_[i] - x_[i - 1]);
    return (1.0 - w) * y_[i - 1] + w * y_[i];
}

PeriodicTable::PeriodicTable(std::vector<double> x, std::vector<double> y, double period)
    : x_(std::move(x)), y_(std::move(y)), period_(period) {
    require(period_ > 0.0, ErrorKind::InvalidParameter, "period must be positive");
    require(!x_.empty() && x_.size() == y_.size(), ErrorKind::InvalidParameter,
            "table needs matching, nonempty abscissae and values");
    require(x_.front() >= 0.0 && x_.back() < period_, ErrorKind::InvalidParameter,
            "periodic table abscissae must lie in [0, period)");
    for (std::size_t i = 1; i < x_.size(); ++i) {
        require(x_[i] > x_[i - 1], ErrorKind::InvalidParameter, "table abscissae must increase strictly");
    }
}

double PeriodicTable::operator()(double x) const {
    const double s = wrap(x, period_);
    const std::size_t n = x_.size();
    if (n == 1) return y_[0];
    // Locate the bracketing pair, treating the last->first segment as wrapping.
    const auto it = std::upper_bound(x_.begin(), x_.end(), s);
    double xl, xr, yl, yr;
    if (it == x_.begin()) {
        xl = x_.back() - period_;
        yl = y_.back();
        xr = x_.front();
        yr = y_.front();
    } else if (it == x_.end()) {
        xl = x_.back();
        yl = y_.back();
        xr = x_.front() + period_;
        yr = y_.front();
    } else {
        const std::size_t i = static_cast<std::size_t>(it - x_.begin());
        xl = x_[i - 1];
        yl = y_[i - 1];
        xr = x_[i];
        yr = y_[i];
    }
    const double w = (s - xl) / (xr - xl);
    return (1.0 - w) * yl + w * yr;
}

PeriodicGrid2D::PeriodicGrid2D(std::size_t nx, std::size_t ny, std::vector<double> values, double px, double py)
    : nx_(nx), ny_(ny), values_(std::move(values)), px_(px), py_(py) {
    require(nx_ > 0 && ny_ > 0 && values_.size() == nx_ * ny_, ErrorKind::InvalidParameter,
            "periodic grid dimensions do not match the value count");
}

double PeriodicGrid2D::operator()(double x, double y) const {
    const double u = wrap(x, px_) / px_ * static_cast<double>(nx_);
    const double v = wrap(y, py_) / py_ * static_cast<double>(ny_);
    const auto i0 = static_cast<std::size_t>(std::floor(u)) % nx_;
    const auto j0 = static_cast<std::size_t>(std::floor(v)) % ny_;
    const std::size_t i1 = (i0 + 1) % nx_;
    const std::size_t j1 = (j0 + 1) % ny_;
    const double wu = u - std::floor(u);
    const double wv = v - std::floor(v);
    auto at = [&](std::size_t i, std::size_t j) { return values_[i * ny_ + j]; };
    return (1 - wu) * ((1 - wv) * at(i0, j0) + wv * at(i0, j1)) + wu * ((1 - wv) * at(i1, j0) + wv * at(i1, j1));
}

double SaturatingLaw::operator()(double s) const {
    switch (family) {
        case Family::Zero: return 0.0;
        case Family::MichaelisMenten: return eval_michaelis_menten(s, vmax, km);
        case Family::Linear: return s > 0.0 ? slope * s : 0.0;
    }
    return 0.0;
}

double SaturatingLaw::lipschitz() const {
    switch (family) {
        case Family::Zero: return 0.0;
        case Family::MichaelisMenten: return vmax / km;
        case Family::Linear: return slope;
    }
    return 0.0;
}

SaturatingLaw SaturatingLaw::michaelis_menten(double vmax, double km) {
    require(vmax >= 0.0, ErrorKind::InvalidParameter, "Michaelis-Menten V_max must be nonnegative");
    require(km > 0.0, ErrorKind::InvalidParameter, "Michaelis-Menten K_m must be positive");
    SaturatingLaw law;
    law.family = Family::MichaelisMenten;
    law.vmax = vmax;
    law.km = km;
    return law;
}

SaturatingLaw SaturatingLaw::linear(double slope) {
    require(slope >= 0.0, ErrorKind::InvalidParameter, "linear law slope must be nonnegative");
    SaturatingLaw law;
    law.family = Family::Linear;
    law.slope = slope;
    return law;
}

// ---------------------------------------------------------------------------
// Scalar formulas

double eval_michaelis_menten(double s, double v_max, double k_m) {
    require(k_m > 0.0, ErrorKind::InvalidParameter, "Michaelis-Menten K_m must be positive");
    require(v_max >= 0.0, ErrorKind::InvalidParameter, "Michaelis-Menten V_max must be nonnegative");
    if (!(s > 0.0)) return 0.0;
    return v_max * s / (k_m + s);
}

double diffusion_coefficient(double kt_over_3mu, double rho_over_6pim) {
    require(kt_over_3mu > 0.0 && rho_over_6pim > 0.0, ErrorKind::InvalidParameter,
            "diffusion coefficient inputs must be positive");
    return kt_over_3mu * std::cbrt(rho_over_6pim);
}

// ---------------------------------------------------------------------------
// Pulses

ScalarFn sin2_pulse_shape(double amplitude) {
    return [amplitude](double s) {
        const double v = std::sin(kPi * s);
        return amplitude * 2.0 * v * v;
    };
}

ScalarFn constant_pulse_shape(double amplitude) {
    return [amplitude](double) { return amplitude; };
}

ScalarFn constant_friction(double k) {
    return [k](double) { return k; };
}

void PulseModel::validate(double horizon) const {
    require(wave_speed > 0.0, ErrorKind::InvalidParameter, "wave speed must be positive");
    require(pulse_period > 0.0, ErrorKind::InvalidParameter, "pulse period must be positive");
    require(static_cast<bool>(shape) && static_cast<bool>(friction), ErrorKind::InvalidParameter,
            "pulse shape and friction must be set");
    require(c0 >= 0.0 && c1 >= 0.0 && a >= 0.0 && b >= 0.0, ErrorKind::InvalidParameter,
            "amplitude law parameters c0, c1, a, b must be nonnegative");
    require(a > 0.0, ErrorKind::InvalidParameter, "amplitude law denominator a + b x must stay positive");
    for (int i = 0; i <= 200; ++i) {
        const double s = i / 200.0;
        const double w = shape(s);
        require(w >= 0.0, ErrorKind::InvalidParameter, "pulse shape must be nonnegative");
        require(std::abs(shape(s + 1.0) - w) <= 1e-12 * std::max(1.0, std::abs(w)),
                ErrorKind::InvalidParameter, "pulse shape must be 1-periodic");
    }
    for (int i = 0; i <= 200; ++i) {
        const double t = horizon * i / 200.0;
        require(friction(t) > 0.0, ErrorKind::InvalidParameter, "friction k(t) must be positive on [0, T]");
    }
}

double PulseModel::amplitude_factor(double s, double v, double x, std::span<const double> y) const {
    if (v <= 0.0) return 0.0;
    const double size = std::accumulate(y.begin(), y.end(), 0.0);
    return shape(s) * (c0 + c1 * size) / (a + b * x);
}

double eval_pulse_force(double s, double v_rel, double x, std::span<const double> y, const PulseModel& model) {
    if (v_rel <= 0.0) return 0.0;
    return model.amplitude_factor(s, v_rel, x, y) * v_rel;
}

// ---------------------------------------------------------------------------
// Kinetics

double KineticsModel::sampled_lipschitz(double x_max, double y_max, std::size_t samples, unsigned seed) const {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(0.0, x_max);
    std::uniform_real_distribution<double> uy(0.0, y_max);
    std::vector<double> y1(dimension), y2(dimension), d1(dimension), d2(dimension);
    double worst = 0.0;
    for (std::size_t n = 0; n < samples; ++n) {
        const double x1 = ux(rng);
        const double x2 = ux(rng);
        for (std::size_t k = 0; k < dimension; ++k) {
            y1[k] = uy(rng);
            y2[k] = uy(rng);
        }
        rate(x1, y1, d1);
        rate(x2, y2, d2);
        double num = 0.0;
        double den = (x1 - x2) * (x1 - x2);
        for (std::size_t k = 0; k < dimension; ++k) {
            num += (d1[k] - d2[k]) * (d1[k] - d2[k]);
            den += (y1[k] - y2[k]) * (y1[k] - y2[k]);
        }
        if (den > 0.0) worst = std::max(worst, std::sqrt(num / den));
    }
    return worst;
}

void KineticsModel::validate(double x_max, double y_max) const {
    require(dimension > 0, ErrorKind::InvalidParameter, "kinetics dimension must be positive");
    require(static_cast<bool>(rate), ErrorKind::InvalidParameter, "kinetics rate must be set");
    require(lipschitz_bound > 0.0, ErrorKind::InvalidParameter, "kinetics Lipschitz bound must be positive");
    const double observed = sampled_lipschitz(x_max, y_max, 400);
    if (observed > lipschitz_bound * (1.0 + 1e-9)) {
        std::ostringstream msg;
        msg << "kinetics rate exceeds its declared Lipschitz bound (" << observed << " > " << lipschitz_bound << ")";
        throw Error(ErrorKind::InvalidParameter, msg.str());
    }
}

KineticsModel linear_decay_kinetics(std::size_t dimension, double rate) {
    require(rate >= 0.0, ErrorKind::InvalidParameter, "decay rate must be nonnegative");
    KineticsModel kin;
    kin.dimension = dimension;
    kin.rate = [rate](double, std::span<const double> y, std::span<double> dydt) {
        for (std::size_t i = 0; i < y.size(); ++i) dydt[i] = -rate * y[i];
    };
    kin.lipschitz_bound = std::max(rate, 1e-12);
    return kin;
}

// ---------------------------------------------------------------------------
// Absorption

void AbsorptionModel::validate(double radius, double x1_max, double t_max, unsigned seed) const {
    require(static_cast<bool>(eta_p) && static_cast<bool>(eta_a) && static_cast<bool>(rho_surf) &&
                static_cast<bool>(zeta),
            ErrorKind::InvalidParameter, "absorption coefficient functions must be set");
    require(alpha > 0.0 && alpha <= 1.0, ErrorKind::InvalidParameter, "alpha must lie in (0, 1]");
    require(omega > 0.0 && chi > 0.0, ErrorKind::InvalidParameter, "omega and chi must be positive");
    require(omega <= chi, ErrorKind::InvalidParameter, "feedstuff diffusion omega must not exceed chi");
    require(eta_lower_bound >= 0.0, ErrorKind::InvalidParameter, "eta lower bound must be nonnegative");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(0.0, x1_max);
    std::uniform_real_distribution<double> uz(-2.0, 2.0);
    std::uniform_real_distribution<double> ur(-radius, radius);
    std::uniform_real_distribution<double> ut(0.0, t_max);
    for (int n = 0; n < 100; ++n) {
        const double x1 = ux(rng);
        const Vec3 X{uz(rng), ur(rng), ur(rng)};
        const Vec3 Xs{X[0] + 1.0, X[1], X[2]};
        const double t = ut(rng);
        const double ep = eta_p(x1, X);
        require(ep >= eta_lower_bound, ErrorKind::InvalidParameter, "eta_p falls below its declared lower bound");
        require(eta_a(x1, X, t) >= 0.0 && rho_surf(x1, X) >= 0.0 && zeta(x1, t) >= 0.0,
                ErrorKind::InvalidParameter, "eta_a, rho and zeta must be nonnegative");
        auto close = [](double u, double v) { return std::abs(u - v) <= 1e-12 * std::max(1.0, std::abs(u)); };
        require(close(ep, eta_p(x1, Xs)) && close(eta_a(x1, X, t), eta_a(x1, Xs, t)) &&
                    close(rho_surf(x1, X), rho_surf(x1, Xs)),
                ErrorKind::InvalidParameter, "surface coefficients must be 1-periodic in X1");
    }
    for (double s : {-1.0, 0.0}) {
        require(g_a(s) == 0.0 && phi(s) == 0.0, ErrorKind::InvalidParameter,
                "g_a and phi must vanish for nonpositive arguments");
    }
}

// ---------------------------------------------------------------------------
// Velocity

double AxisymmetricStream::f(double s) const {
    const double s2 = s * s;
    return shape == Shape::Plug ? s2 : 2.0 * s2 - s2 * s2;
}

double AxisymmetricStream::fprime_over_2s(double s) const {
    return shape == Shape::Plug ? 1.0 : 2.0 * (1.0 - s * s);
}

VelocityField make_stream_velocity(AxisymmetricStream stream, ScalarFn radius, ScalarFn radius_dz) {
    require(static_cast<bool>(stream.q), ErrorKind::InvalidParameter, "stream velocity needs q(x1, t)");
    VelocityField field;
    field.stream = stream;
    field.c = [stream, radius = std::move(radius), radius_dz = std::move(radius_dz)](double x1, const Vec3& X,
                                                                                    double t) -> Vec3 {
        const double rho = radius(X[0]);
        const double drho = radius_dz(X[0]);
        const double R = std::hypot(X[1], X[2]);
        const double s = R / rho;
        const double r2q = stream.q(x1, t) * stream.base_radius * stream.base_radius;
        const double k = stream.fprime_over_2s(s);
        const double axial = r2q * k / (rho * rho);
        const double radial_over_R = r2q * k * drho / (rho * rho * rho);
        return {axial, radial_over_R * X[1], radial_over_R * X[2]};
    };
    return field;
}

VelocityField make_velocity(std::function<Vec3(double, const Vec3&, double)> c) {
    VelocityField field;
    field.c = std::move(c);
    return field;
}

}  // namespace villus
