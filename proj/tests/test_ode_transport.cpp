#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "villus/error.hpp"
#include "villus/ode_transport.hpp"

using namespace villus;

namespace {

PulseModel standard_pulse(double eps) {
    PulseModel m;
    m.wave_speed = 1.0;
    m.pulse_period = eps;
    m.shape = sin2_pulse_shape();
    m.friction = constant_friction(1.0);
    m.c0 = 1.0;
    m.c1 = 1.0;
    m.a = 1.0;
    m.b = 0.1;
    return m;
}

PulseModel constant_pulse(double eps, double f0, double k) {
    PulseModel m;
    m.wave_speed = 1.0;
    m.pulse_period = eps;
    m.shape = constant_pulse_shape(f0);
    m.friction = constant_friction(k);
    m.c0 = 1.0;
    m.c1 = 0.0;
    m.a = 1.0;
    m.b = 0.0;
    return m;
}

const std::vector<double> kY0{1.0};

}  // namespace

TEST_CASE("averaged force reference values") {
    auto m = constant_pulse(0.1, 1.0, 1.0);
    m.shape = sin2_pulse_shape();
    CHECK(average_force(m, 1.0, 0.0, kY0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(average_force(m, -1.0, 0.0, kY0) == 0.0);
    CHECK_THROWS_AS(average_force(m, 1.0, 0.0, kY0, 2), Error);
}

TEST_CASE("averaged force matches a fine trapezoid oracle") {
    auto m = standard_pulse(0.1);
    m.b = 1.0;
    const std::vector<double> y{2.0};
    const double v = 0.5, x = 1.0;
    const int n = 1000000;
    double oracle = 0.0;
    for (int i = 0; i < n; ++i) oracle += m.amplitude_factor(static_cast<double>(i) / n, v, x, y);
    oracle /= n;
    CHECK(std::abs(average_force(m, v, x, y) - oracle) < 1e-8);
}

TEST_CASE("zero forcing gives exponential decay") {
    const double k = 1.7, v0 = 0.3;
    auto m = constant_pulse(0.01, 0.0, k);
    const auto kin = linear_decay_kinetics(1, 0.1);
    const auto osc = integrate_oscillatory(m, kin, v0, kY0, 1.0, 1e-4);
    const double xd = v0 * std::exp(-k);
    const double x = v0 * (1.0 - std::exp(-k)) / k;
    CHECK(std::abs(osc.xdot.back() - xd) < 1e-8);
    CHECK(std::abs(osc.x.back() - x) < 1e-8);
    const AveragedForce fbar(m);
    const auto avg = integrate_averaged(m, kin, fbar, v0, kY0, 1.0, 1e-4);
    CHECK(std::abs(avg.xdot.back() - xd) < 1e-8);
    CHECK(std::abs(avg.x.back() - x) < 1e-8);
    CHECK(std::abs(avg.y.back()[0] - std::exp(-0.1)) < 1e-10);
}

TEST_CASE("constant averaged force gives the linear closed form") {
    const double f0 = 0.8, k = 1.0, c = 1.0, v0 = 0.3, T = 2.0;
    const auto m = constant_pulse(0.01, f0, k);
    const auto kin = linear_decay_kinetics(1, 0.0);
    const AveragedForce fbar(m);
    const auto avg = integrate_averaged(m, kin, fbar, v0, kY0, T, 1e-3);
    const double beta = f0 / c + k;
    const double vinf = f0 / beta;
    const double xd = vinf + (v0 - vinf) * std::exp(-beta * T);
    const double x = vinf * T + (v0 - vinf) * (1.0 - std::exp(-beta * T)) / beta;
    CHECK(std::abs(avg.xdot.back() - xd) < 1e-8);
    CHECK(std::abs(avg.x.back() - x) < 1e-8);
}

TEST_CASE("oscillatory run is self-convergent under step refinement") {
    const auto m = standard_pulse(1e-2);
    const auto kin = linear_decay_kinetics(1, 0.1);
    const auto coarse = integrate_oscillatory(m, kin, 0.3, kY0, 5.0, 5e-4);
    const auto fine = integrate_oscillatory(m, kin, 0.3, kY0, 5.0, 5e-5, 10);
    const auto [ex, exd] = sup_distance(coarse, fine);
    CHECK(ex < 1e-6);
    CHECK(exd < 1e-6);
}

TEST_CASE("averaged run is self-convergent under step halving") {
    const auto m = standard_pulse(1e-2);
    const auto kin = linear_decay_kinetics(1, 0.1);
    const AveragedForce fbar(m);
    const auto coarse = integrate_averaged(m, kin, fbar, 0.3, kY0, 5.0, 1e-3);
    const auto fine = integrate_averaged(m, kin, fbar, 0.3, kY0, 5.0, 5e-4, 2);
    const auto [ex, exd] = sup_distance(coarse, fine);
    CHECK(ex < 1e-8);
    CHECK(exd < 1e-8);
}

TEST_CASE("speed bounds hold on the standard scenario") {
    const auto m = standard_pulse(0.05);
    const auto kin = linear_decay_kinetics(1, 0.1);
    const auto traj = integrate_oscillatory(m, kin, 0.3, kY0, 5.0, 0.05 / 20);
    CHECK(speed_bounds(traj, 1.0).holds(1e-10));
}

TEST_CASE("invalid inputs are rejected") {
    const auto m = standard_pulse(0.01);
    const auto kin = linear_decay_kinetics(1, 0.1);
    CHECK_THROWS_AS(integrate_oscillatory(m, kin, 1.0, kY0, 1.0, 1e-4), Error);
    try {
        integrate_oscillatory(m, kin, 1.2, kY0, 1.0, 1e-4);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InvalidInitialCondition);
    }
    try {
        integrate_oscillatory(m, kin, 0.3, kY0, 1.0, 1e-3);
        FAIL("expected a step-size error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::StepSize);
    }
    const std::vector<double> wrong{1.0, 2.0};
    CHECK_THROWS_AS(integrate_oscillatory(m, kin, 0.3, wrong, 1.0, 1e-4), Error);
}

TEST_CASE("s-independent forcing makes both systems coincide") {
    const auto kin = linear_decay_kinetics(1, 0.1);
    for (double eps : {0.1, 0.01}) {
        auto m = standard_pulse(eps);
        m.shape = constant_pulse_shape(1.0);
        const AveragedForce fbar(m);
        const auto osc = integrate_oscillatory(m, kin, 0.3, kY0, 5.0, eps / 20);
        const auto avg = integrate_averaged(m, kin, fbar, 0.3, kY0, 5.0, eps / 20);
        const auto [ex, exd] = sup_distance(osc, avg);
        CHECK(ex < 1e-8);
        CHECK(exd < 1e-8);
    }
}

TEST_CASE("convergence study requires decreasing pulse periods") {
    const auto m = standard_pulse(0.1);
    const auto kin = linear_decay_kinetics(1, 0.1);
    const std::vector<double> bad{0.05, 0.1, 0.025};
    CHECK_THROWS_AS(convergence_study(m, kin, 0.3, kY0, 1.0, bad), Error);
    const std::vector<double> few{0.1, 0.05};
    CHECK_THROWS_AS(convergence_study(m, kin, 0.3, kY0, 1.0, few), Error);
}
