#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "villus/error.hpp"
#include "villus/micro_verifier.hpp"

using namespace villus;

namespace {

VelocityField plug(const VillusProfile& p, double q) {
    AxisymmetricStream s;
    s.q = [q](double, double) { return q; };
    s.base_radius = p.base_radius;
    return make_stream_velocity(
        s, [p](double z) { return p.radius(z); }, [p](double z) { return p.radius_dz(z); });
}

AbsorptionModel inert() {
    AbsorptionModel a;
    a.eta_p = [](double, const Vec3&) { return 0.0; };
    a.eta_a = [](double, const Vec3&, double) { return 0.0; };
    a.g_a = SaturatingLaw::zero();
    a.rho_surf = [](double, const Vec3&) { return 0.0; };
    a.zeta = [](double, double) { return 0.0; };
    a.phi = SaturatingLaw::zero();
    a.alpha = 0.5;
    a.omega = 1.0;
    a.chi = 1.0;
    a.eta_lower_bound = 0.0;
    return a;
}

AbsorptionModel reactive() {
    AbsorptionModel a = inert();
    a.eta_p = [](double, const Vec3&) { return 0.5; };
    a.eta_a = [](double, const Vec3&, double) { return 0.2; };
    a.g_a = SaturatingLaw::michaelis_menten(1.0, 1.0);
    a.rho_surf = [](double, const Vec3&) { return 0.3; };
    a.zeta = [](double, double) { return 0.2; };
    a.phi = SaturatingLaw::michaelis_menten(1.0, 1.0);
    a.eta_lower_bound = 0.5;
    return a;
}

// v_t + v_x = D v_xx on [0, length], v(0, t) = g(t), zero gradient at the outlet;
// explicit upwind/central scheme on a fine uniform grid, sampled by cell lookup.
std::function<double(double)> advection_diffusion(double D, double length, double T, int n, const ScalarFn& g) {
    const double dx = length / n;
    const int steps = static_cast<int>(std::ceil(T / (0.2 * std::min(dx, dx * dx / D))));
    const double dt = T / steps;
    std::vector<double> v(static_cast<std::size_t>(n), 0.0), w(v.size());
    for (int s = 0; s < steps; ++s) {
        const double gl = g(s * dt);
        for (int i = 0; i < n; ++i) {
            const auto k = static_cast<std::size_t>(i);
            const double left = i ? v[k - 1] : 2.0 * gl - v[0];
            const double right = i < n - 1 ? v[k + 1] : v[k];
            const double adv = i ? (v[k] - v[k - 1]) / dx : (v[k] - gl) / (dx / 2);
            w[k] = v[k] - dt * adv + dt * D * (right - 2.0 * v[k] + left) / (dx * dx);
        }
        v.swap(w);
    }
    return [v, dx, n](double x) { return v[static_cast<std::size_t>(std::clamp(static_cast<int>(x / dx), 0, n - 1))]; };
}

}  // namespace

TEST_CASE("zero inflow keeps the fields at zero") {
    const auto p = cosine_profile(1.0, 0.1);
    const MicroGrid g{0.25, 1.0, 16, 16, 0.5, 0.0};
    const auto s = solve_micro(g, p, plug(p, 1.0), reactive(), InflowSignals::zero(), {0.25, 0.5});
    REQUIRE(s.snapshots.size() == 2);
    for (const auto& f : s.snapshots) {
        for (double u : f.u) CHECK(u == 0.0);
        for (double v : f.v) CHECK(v == 0.0);
    }
}

TEST_CASE("cross-section averages of slice-constant fields are exact") {
    const auto p = cosine_profile(1.0, 0.1);
    const MicroGrid g{0.25, 1.0, 16, 16, 0.1, 0.0};
    const auto s = solve_micro(g, p, plug(p, 1.0), inert(), InflowSignals::zero(), {});
    const std::size_t cells = static_cast<std::size_t>(s.n_z) * static_cast<std::size_t>(s.n_rho);
    const std::vector<double> constant(cells, 2.75);
    for (double a : cross_section_average(constant, s)) CHECK(std::abs(a - 2.75) < 1e-12);
    std::vector<double> slice(cells);
    for (int i = 0; i < s.n_z; ++i)
        for (int j = 0; j < s.n_rho; ++j)
            slice[static_cast<std::size_t>(i * s.n_rho + j)] = std::sin(s.x1[static_cast<std::size_t>(i)]);
    const auto avg = cross_section_average(slice, s);
    for (int i = 0; i < s.n_z; ++i) CHECK(std::abs(avg[static_cast<std::size_t>(i)] - std::sin(s.x1[static_cast<std::size_t>(i)])) < 1e-12);
}

TEST_CASE("cross-section average of a radial field matches its area mean") {
    const auto p = flat_profile(1.0);
    const MicroGrid g{0.25, 1.0, 16, 64, 0.1, 0.0};
    const auto s = solve_micro(g, p, plug(p, 1.0), inert(), InflowSignals::zero(), {});
    std::vector<double> f(static_cast<std::size_t>(s.n_z * s.n_rho));
    for (int i = 0; i < s.n_z; ++i)
        for (int j = 0; j < s.n_rho; ++j) {
            const double r = s.rho_hat[static_cast<std::size_t>(j)];
            f[static_cast<std::size_t>(i * s.n_rho + j)] = r * r;
        }
    // Midpoint values of r^2 weighted by exact annulus areas: mean 1/2 up to O(h^2).
    for (double a : cross_section_average(f, s)) CHECK(std::abs(a - 0.5) < 1.0 / (64.0 * 64.0));
}

TEST_CASE("inert plug flow in a cylinder follows 1-d advection-diffusion") {
    const auto p = flat_profile(1.0);
    const auto in = InflowSignals::smooth_meal(1.0, 2.0, 0.0);
    double previous = 1e300;
    for (double eps : {0.25, 0.125}) {
        const MicroGrid g{eps, 2.0, 16, 4, 1.5, 0.0};
        const auto s = solve_micro(g, p, plug(p, 1.0), inert(), in, {1.5});
        const auto vbar = cross_section_average(s.snapshots.back().v, s);
        const auto ref = advection_diffusion(eps, 2.0, 1.5, 800, in.v0);
        double to_ref = 0.0, to_transport = 0.0;
        for (int i = 0; i < s.n_z; ++i) {
            const double x = s.x1[static_cast<std::size_t>(i)];
            const double v = vbar[static_cast<std::size_t>(i)];
            to_ref = std::max(to_ref, std::abs(v - ref(x)));
            to_transport = std::max(to_transport, std::abs(v - (x < 1.5 ? in.v0(1.5 - x) : 0.0)));
        }
        CHECK(to_ref < 1e-2);
        CHECK(to_transport < previous);
        previous = to_transport;
        CHECK(s.min_v >= -1e-12);
        CHECK(s.max_v <= 1.0 + 1e-12);
    }
}

TEST_CASE("grid validation") {
    const auto p = flat_profile(1.0);
    MicroGrid g{0.3, 1.0, 16, 16, 0.1, 0.0};
    try {
        solve_micro(g, p, plug(p, 1.0), inert(), InflowSignals::zero(), {});
        FAIL("expected invalid grid");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InvalidGrid);
    }
    g = MicroGrid{0.25, 1.0, 16, 16, 0.1, 0.0};
    g.dt = 10.0 * micro_stable_time_step(g, p, plug(p, 1.0), inert());
    try {
        solve_micro(g, p, plug(p, 1.0), inert(), InflowSignals::zero(), {});
        FAIL("expected a step-size error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::StepSize);
    }
}

TEST_CASE("comparison needs at least three scales") {
    ComparisonScenario sc;
    sc.profile = flat_profile(1.0);
    sc.velocity = plug(sc.profile, 1.0);
    sc.absorption = inert();
    sc.inflow = InflowSignals::zero();
    CHECK_THROWS_AS(compare_micro_macro(sc, {0.25, 0.125}), Error);
}

TEST_CASE("homogeneous cylinder: micro approaches macro as eps decreases") {
    ComparisonScenario sc;
    sc.profile = flat_profile(1.0);
    sc.velocity = plug(sc.profile, 1.0);
    sc.absorption = reactive();
    sc.inflow = InflowSignals::smooth_meal(1.0, 2.0, 0.2);
    sc.length = 1.0;
    sc.horizon = 0.75;
    sc.n_z_per_period = 16;
    sc.n_rho = 8;
    sc.macro_cells = 400;
    sc.snapshot_times = {0.25, 0.5, 0.75};
    const auto t = compare_micro_macro(sc, {0.25, 0.125, 0.0625});
    REQUIRE(t.rows.size() == 3);
    for (const auto& r : t.rows) MESSAGE("eps " << r.eps << " error_u " << r.error_u << " error_v " << r.error_v);
    CHECK(t.monotone);
    CHECK_FALSE(t.flagged);
    CHECK(t.rows.back().error() < 0.1);
    std::ostringstream out;
    write_comparison_csv(out, t);
    CHECK(out.str().rfind("eps,error_u,error_v\n", 0) == 0);
}
