#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "villus/error.hpp"
#include "villus/macro_solver.hpp"

using namespace villus;

namespace {

AbsorptionModel reactions(double zeta, SaturatingLaw phi, SaturatingLaw g_a) {
    AbsorptionModel a;
    a.alpha = 0.5;
    a.omega = 1.0;
    a.g_a = g_a;
    a.zeta = [zeta](double, double) { return zeta; };
    a.phi = phi;
    return a;
}

AbsorptionModel no_reactions() { return reactions(0.0, SaturatingLaw::zero(), SaturatingLaw::zero()); }

// Integrates the reaction system along a characteristic of unit speed.
std::pair<double, double> characteristic(double u, double v, double length, const AbsorptionModel& a,
                                         const HomogenizedCoefficients& c) {
    const double R = c.ratio, ep = c.etabar_p_at(0), ea = c.etabar_a_at(0, 0), rb = c.rhobar_at(0);
    auto F = [&](double uu, double vv, double& du, double& dv) {
        const double vol = a.zeta(0, 0) * a.phi(vv);
        du = vol - R * (ep * uu + ea * a.g_a(uu) - a.alpha / a.omega * rb * vv);
        dv = -vol - R * rb * vv;
    };
    const int m = 4000;
    const double h = length / m;
    for (int k = 0; k < m; ++k) {
        double a1, b1, a2, b2, a3, b3, a4, b4;
        F(u, v, a1, b1);
        F(u + h / 2 * a1, v + h / 2 * b1, a2, b2);
        F(u + h / 2 * a2, v + h / 2 * b2, a3, b3);
        F(u + h * a3, v + h * b3, a4, b4);
        u += h / 6 * (a1 + 2 * a2 + 2 * a3 + a4);
        v += h / 6 * (b1 + 2 * b2 + 2 * b3 + b4);
    }
    return {u, v};
}

double advection_l1_error(int cells_per_unit) {
    const auto c = HomogenizedCoefficients::uniform(1.0, 0.0, 0.0, 0.0, 2.0);
    const auto in = InflowSignals::sine_pulses(1.0, 1.0);
    const AxialGrid g{3.0, 3 * cells_per_unit, 2.5, 0.9};
    const auto s = solve_macro(g, c, no_reactions(), in);
    double err = 0.0;
    for (int i = 0; i < g.n_cells; ++i) {
        const double x = g.center(i);
        const double exact = x < g.horizon ? in.v0(g.horizon - x) : 0.0;
        err += std::abs(s.final_state.v[static_cast<std::size_t>(i)] - exact) * g.dx();
    }
    return err;
}

}  // namespace

TEST_CASE("zero state with zero inflow is a fixed point") {
    const auto c = HomogenizedCoefficients::uniform(1.0, 0.5, 0.3, 0.4, 2.0);
    const auto a = reactions(0.3, SaturatingLaw::michaelis_menten(1, 0.5), SaturatingLaw::michaelis_menten(1, 1));
    const AxialGrid g{2.0, 100, 1.0, 0.9};
    const auto s = solve_macro(g, c, a, InflowSignals::zero());
    for (double u : s.final_state.u) CHECK(u == 0.0);
    for (double v : s.final_state.v) CHECK(v == 0.0);
    for (const auto& r : mass_budget(s)) {
        CHECK(r.step.inflow == 0.0);
        CHECK(r.step.stored == 0.0);
        CHECK(r.residual == 0.0);
    }
}

TEST_CASE("pure advection reproduces the shifted inflow") {
    const double e1 = advection_l1_error(100);
    const double e2 = advection_l1_error(200);
    const double e3 = advection_l1_error(400);
    CHECK(e3 < 1e-2);
    CHECK(std::log2(e1 / e2) >= 0.8);
    CHECK(std::log2(e2 / e3) >= 0.8);
}

TEST_CASE("advection-only budget") {
    const auto c = HomogenizedCoefficients::uniform(1.0, 0.0, 0.0, 0.0, 2.0);
    const AxialGrid g{3.0, 300, 2.5, 0.9};
    const auto s = solve_macro(g, c, no_reactions(), InflowSignals::smooth_meal(1.0, 1.0, 0.3));
    for (const auto& r : mass_budget(s)) {
        CHECK(r.step.absorbed == 0.0);
        CHECK(r.step.transformed == 0.0);
        CHECK(std::abs(r.step.stored - (r.step.inflow - r.step.outflow)) < 1e-12);
        CHECK(r.relative_residual < 1e-8);
    }
}

TEST_CASE("exchange terms cancel in the total") {
    // v -> u conversion only; the wall loss of v is fully recovered in u.
    const auto c = HomogenizedCoefficients::uniform(1.0, 0.0, 0.0, 0.4, 2.0);
    auto a = reactions(0.3, SaturatingLaw::linear(1.0), SaturatingLaw::zero());
    a.alpha = 1.0;
    const AxialGrid g{3.0, 300, 2.5, 0.9};
    const auto s = solve_macro(g, c, a, InflowSignals::smooth_meal(1.0, 1.0, 0.3));
    for (const auto& r : mass_budget(s)) {
        CHECK(std::abs(r.step.absorbed) < 1e-14);
        CHECK(std::abs(r.step.stored - (r.step.inflow - r.step.outflow)) < 1e-8 * (r.step.inflow + 1e-300) + 1e-15);
    }
}

TEST_CASE("full reactions match the characteristics oracle") {
    const auto c = HomogenizedCoefficients::uniform(1.0, 0.5, 0.3, 0.4, 2.0);
    const auto a = reactions(0.3, SaturatingLaw::michaelis_menten(1, 0.5), SaturatingLaw::michaelis_menten(1, 1));
    const auto in = InflowSignals::smooth_meal(1.0, 2.0, 0.2);
    const AxialGrid g{3.0, 1200, 2.5, 0.9};
    const auto s = solve_macro(g, c, a, in);
    double err = 0.0;
    for (int i = 0; i < g.n_cells; ++i) {
        const double x = g.center(i);
        double u = 0.0, v = 0.0;
        if (x < g.horizon) std::tie(u, v) = characteristic(in.u0(g.horizon - x), in.v0(g.horizon - x), x, a, c);
        err = std::max({err, std::abs(u - s.final_state.u[static_cast<std::size_t>(i)]),
                        std::abs(v - s.final_state.v[static_cast<std::size_t>(i)])});
    }
    CHECK(err < 1e-3);
    for (const auto& r : mass_budget(s)) CHECK(r.relative_residual < 1e-8);
}

TEST_CASE("discrete maximum principle for v") {
    const auto c = HomogenizedCoefficients::uniform(1.0, 0.5, 0.3, 0.4, 2.0);
    const auto a = reactions(0.3, SaturatingLaw::michaelis_menten(1, 0.5), SaturatingLaw::michaelis_menten(1, 1));
    const AxialGrid g{3.0, 300, 2.5, 0.9};
    double vmin = 0.0, vmax = 0.0, umin = 0.0;
    int observed = 0;
    solve_macro(g, c, a, InflowSignals::smooth_meal(1.0, 2.0, 0.2), {}, [&](const AxialFields& f) {
        ++observed;
        vmin = std::min(vmin, *std::min_element(f.v.begin(), f.v.end()));
        vmax = std::max(vmax, *std::max_element(f.v.begin(), f.v.end()));
        umin = std::min(umin, *std::min_element(f.u.begin(), f.u.end()));
    });
    CHECK(observed > 0);
    CHECK(vmin >= 0.0);
    CHECK(vmax <= 1.0);
    CHECK(umin >= 0.0);
}

TEST_CASE("stronger absorption lowers the nutrient everywhere") {
    const auto a = reactions(0.3, SaturatingLaw::michaelis_menten(1, 0.5), SaturatingLaw::michaelis_menten(1, 1));
    const AxialGrid g{3.0, 300, 2.5, 0.9};
    const auto in = InflowSignals::smooth_meal(1.0, 2.0, 0.2);
    const auto weak = solve_macro(g, HomogenizedCoefficients::uniform(1.0, 0.2, 0.3, 0.4, 2.0), a, in);
    const auto strong = solve_macro(g, HomogenizedCoefficients::uniform(1.0, 0.8, 0.3, 0.4, 2.0), a, in);
    for (std::size_t i = 0; i < weak.final_state.u.size(); ++i) {
        CHECK(strong.final_state.u[i] <= weak.final_state.u[i] + 1e-15);
    }
}

TEST_CASE("oversized steps are rejected before mutation") {
    const auto c = HomogenizedCoefficients::uniform(1.0, 0.5, 0.3, 0.4, 2.0);
    const auto a = no_reactions();
    const AxialGrid g{1.0, 100, 1.0, 0.9};
    AxialFields f{std::vector<double>(100, 0.5), std::vector<double>(100, 0.25), 0.0};
    const auto copy = f;
    try {
        step_upwind(f, g, c, a, InflowSignals::zero(), 0.1);
        FAIL("expected a step-size error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::StepSize);
    }
    CHECK(f.u == copy.u);
    CHECK(f.v == copy.v);
    CHECK(f.time == copy.time);
}

TEST_CASE("inflow must vanish at t = 0") {
    InflowSignals in = InflowSignals::zero();
    in.v0 = [](double) { return 1.0; };
    CHECK_THROWS_AS(in.validate(), Error);
    CHECK_NOTHROW(InflowSignals::smooth_meal(1.0, 1.0).validate());
}

TEST_CASE("snapshots are taken at requested times") {
    const auto c = HomogenizedCoefficients::uniform(1.0, 0.0, 0.0, 0.0, 2.0);
    const AxialGrid g{2.0, 100, 1.0, 0.9};
    const auto s = solve_macro(g, c, no_reactions(), InflowSignals::sine_pulses(1.0), {0.25, 0.5, 1.0});
    REQUIRE(s.snapshots.size() == 3);
    CHECK(s.snapshots[0].time == doctest::Approx(0.25));
    CHECK(s.snapshots[2].time == doctest::Approx(1.0));
    std::ostringstream out;
    write_macro_csv(out, g, s);
    CHECK(out.str().rfind("t,x1,u,v\n", 0) == 0);
}
