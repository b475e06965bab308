#include "villus/micro_verifier.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <ostream>
#include <sstream>

#include "villus/csv.hpp"
#include "villus/error.hpp"
#include "villus/mapped_grid.hpp"

namespace villus {

int MicroGrid::periods() const { return static_cast<int>(std::lround(length / eps)); }

void MicroGrid::validate() const {
    require(eps > 0.0 && length > 0.0 && horizon > 0.0, ErrorKind::InvalidGrid,
            "eps, length and horizon must be positive");
    const double count = length / eps;
    require(std::abs(count - std::round(count)) <= 1e-9 * std::max(1.0, count) && std::round(count) >= 1.0,
            ErrorKind::InvalidGrid, "length must hold an integer number of periods eps");
    require(n_z_per_period >= 16, ErrorKind::InvalidGrid, "need at least 16 axial cells per period");
    require(n_rho >= 2, ErrorKind::InvalidGrid, "need at least 2 radial cells");
    require(dt >= 0.0, ErrorKind::InvalidGrid, "time step must be nonnegative");
}

namespace {

/// Everything about the eps-problem that does not change in time.
struct MicroSetup {
    const MicroGrid& grid;
    const VillusProfile& profile;
    const VelocityField& velocity;
    const AbsorptionModel& absorption;
    MappedAxisymmetricGrid mesh;
    std::vector<double> diffusion_weight;  ///< sum of |stencil coefficients| per cell
    std::vector<Vec3> wall_X;              ///< unit-cell wall point of each column
    std::vector<double> stream_shape;      ///< r^2 f(s_j) / 2 at radial faces (stream velocity only)

    MicroSetup(const MicroGrid& g, const VillusProfile& p, const VelocityField& vel, const AbsorptionModel& a)
        : grid(g),
          profile(p),
          velocity(vel),
          absorption(a),
          mesh(0.0, g.length, g.n_z(), g.n_rho, false,
               [&p, eps = g.eps](double z) { return eps * p.radius(z / eps); },
               [&p, eps = g.eps](double z) { return p.radius_dz(z / eps); }) {
        const int nz = mesh.nz(), ns = mesh.ns();
        diffusion_weight.assign(mesh.cells(), 0.0);
        auto accumulate = [&](const MappedAxisymmetricGrid::FaceStencil& st, long minus, std::size_t plus) {
            double total = std::abs(st.dirichlet_coef);
            for (const auto& t : st.terms) total += std::abs(t.coef);
            if (minus >= 0) diffusion_weight[static_cast<std::size_t>(minus)] += total;
            diffusion_weight[plus] += total;
        };
        for (int k = 0; k < mesh.z_face_count(); ++k) {
            const auto [left, right] = mesh.z_face_cells(k);
            if (right < 0) continue;
            for (int j = 0; j < ns; ++j) {
                accumulate(mesh.z_stencil(k, j), left < 0 ? -1 : static_cast<long>(mesh.index(static_cast<int>(left), j)),
                           mesh.index(static_cast<int>(right), j));
            }
        }
        for (int i = 0; i < nz; ++i) {
            for (int j = 0; j < ns - 1; ++j) {
                accumulate(mesh.s_stencil(i, j), static_cast<long>(mesh.index(i, j)), mesh.index(i, j + 1));
            }
        }
        for (int i = 0; i < nz; ++i) wall_X.push_back(wall_point(profile, mesh.z_center(i) / g.eps, 0.0));
        if (velocity.stream) {
            const auto& st = *velocity.stream;
            for (int j = 0; j <= ns; ++j) {
                stream_shape.push_back(st.base_radius * st.base_radius * st.f(mesh.s_face(j)) / 2.0);
            }
        }
    }

    void fluxes(double t, std::vector<double>& zf, std::vector<double>& sf) const {
        const int nz = mesh.nz(), ns = mesh.ns();
        const double e2 = grid.eps * grid.eps;
        if (velocity.stream) {
            std::vector<double> q(static_cast<std::size_t>(nz) + 1);
            for (int k = 0; k <= nz; ++k) q[static_cast<std::size_t>(k)] = velocity.stream->q(mesh.z_face(k), t);
            zf.resize(static_cast<std::size_t>(nz + 1) * ns);
            sf.resize(static_cast<std::size_t>(nz) * (ns - 1));
            for (int k = 0; k <= nz; ++k) {
                for (int j = 0; j < ns; ++j) {
                    zf[static_cast<std::size_t>(k) * ns + j] =
                        e2 * q[static_cast<std::size_t>(k)] *
                        (stream_shape[static_cast<std::size_t>(j) + 1] - stream_shape[static_cast<std::size_t>(j)]);
                }
            }
            for (int i = 0; i < nz; ++i) {
                const double dq = q[static_cast<std::size_t>(i) + 1] - q[static_cast<std::size_t>(i)];
                for (int j = 0; j < ns - 1; ++j) {
                    sf[static_cast<std::size_t>(i) * (ns - 1) + j] = -e2 * dq * stream_shape[static_cast<std::size_t>(j) + 1];
                }
            }
        } else {
            const double eps = grid.eps;
            mesh.fluxes_from_velocity(
                [&](double z, const Vec3& x) { return velocity.c(z, Vec3{x[0] / eps, x[1] / eps, x[2] / eps}, t); },
                zf, sf);
        }
    }

    /// Gershgorin row-sum bound of the explicit operator at time t.
    double row_bound(double t) const {
        std::vector<double> zf, sf;
        fluxes(t, zf, sf);
        const int nz = mesh.nz(), ns = mesh.ns();
        std::vector<double> adv(mesh.cells(), 0.0);
        for (int k = 0; k <= nz; ++k) {
            const auto [left, right] = mesh.z_face_cells(k);
            for (int j = 0; j < ns; ++j) {
                const double phi = zf[static_cast<std::size_t>(k) * ns + j];
                if (phi > 0.0 && right >= 0) adv[mesh.index(static_cast<int>(right), j)] += 2.0 * phi;
                if (phi < 0.0 && left >= 0) adv[mesh.index(static_cast<int>(left), j)] -= 2.0 * phi;
            }
        }
        for (int i = 0; i < nz; ++i) {
            for (int j = 0; j < ns - 1; ++j) {
                const double phi = sf[static_cast<std::size_t>(i) * (ns - 1) + j];
                if (phi > 0.0) adv[mesh.index(i, j + 1)] += 2.0 * phi;
                if (phi < 0.0) adv[mesh.index(i, j)] -= 2.0 * phi;
            }
        }
        const double eps = grid.eps;
        const auto& a = absorption;
        const double kappa = std::max(a.chi, a.omega);
        const auto& vol = mesh.volumes();
        double bound = 0.0;
        for (int i = 0; i < nz; ++i) {
            const double x1 = mesh.z_center(i);
            const Vec3& X = wall_X[static_cast<std::size_t>(i)];
            const double zeta = a.zeta ? a.zeta(x1, t) : 0.0;
            const double wall_u = a.eta_p(x1, X) + a.eta_a(x1, X, t) * a.g_a.lipschitz() +
                                  a.alpha / a.omega * a.rho_surf(x1, X);
            const double wall_rate = std::max(wall_u, 2.0 * a.rho_surf(x1, X));
            for (int j = 0; j < ns; ++j) {
                const std::size_t c = mesh.index(i, j);
                double row = eps * kappa * diffusion_weight[c] + adv[c];
                if (j == ns - 1) row += eps * mesh.wall_area(i) * wall_rate;
                bound = std::max(bound, row / vol[c] + 2.0 * zeta * a.phi.lipschitz());
            }
        }
        return bound;
    }

    double stable_dt() const {
        double worst = 0.0;
        const int samples = 32;
        for (int k = 0; k <= samples; ++k) worst = std::max(worst, row_bound(grid.horizon * k / samples));
        return worst > 0.0 ? 1.0 / worst : std::numeric_limits<double>::infinity();
    }
};

}  // namespace

double micro_stable_time_step(const MicroGrid& grid, const VillusProfile& profile, const VelocityField& velocity,
                              const AbsorptionModel& absorption) {
    grid.validate();
    require(profile.axisymmetric, ErrorKind::UnsupportedGeometry, "micro solver supports theta-independent profiles only");
    const MicroSetup setup(grid, profile, velocity, absorption);
    return setup.stable_dt();
}

MicroSolution solve_micro(const MicroGrid& grid, const VillusProfile& profile, const VelocityField& velocity,
                          const AbsorptionModel& absorption, const InflowSignals& inflow,
                          const std::vector<double>& snapshot_times) {
    grid.validate();
    inflow.validate();
    require(profile.axisymmetric, ErrorKind::UnsupportedGeometry, "micro solver supports theta-independent profiles only");
    profile.validate();
    for (std::size_t k = 0; k < snapshot_times.size(); ++k) {
        require(snapshot_times[k] >= 0.0 && snapshot_times[k] <= grid.horizon, ErrorKind::InvalidParameter,
                "snapshot times must lie in [0, T]");
        require(k == 0 || snapshot_times[k] > snapshot_times[k - 1], ErrorKind::InvalidParameter,
                "snapshot times must increase");
    }
    const MicroSetup setup(grid, profile, velocity, absorption);
    const auto& mesh = setup.mesh;
    const double bound = setup.stable_dt();
    double dt = grid.dt;
    if (dt > 0.0) {
        if (dt > bound * (1.0 + 1e-12)) {
            std::ostringstream msg;
            msg << "time step " << dt << " exceeds the explicit stability bound " << bound;
            throw Error(ErrorKind::StepSize, msg.str());
        }
    } else {
        dt = bound;
    }
    const long steps = static_cast<long>(std::ceil(grid.horizon / dt - 1e-9));
    dt = grid.horizon / static_cast<double>(steps);

    const int nz = mesh.nz(), ns = mesh.ns();
    const std::size_t n = mesh.cells();
    const auto& vol = mesh.volumes();
    const auto& a = absorption;
    const double eps = grid.eps;

    MicroSolution sol;
    sol.n_z = nz;
    sol.n_rho = ns;
    for (int i = 0; i < nz; ++i) sol.x1.push_back(mesh.z_center(i));
    for (int j = 0; j < ns; ++j) sol.rho_hat.push_back(mesh.s_center(j));
    sol.volumes = vol;
    sol.dt = dt;
    sol.steps = steps;

    MicroFields f;
    f.u.assign(n, 0.0);
    f.v.assign(n, 0.0);
    std::size_t next = 0;
    while (next < snapshot_times.size() && snapshot_times[next] <= 0.0) {
        sol.snapshots.push_back(f);
        sol.snapshots.back().time = snapshot_times[next++];
    }

    std::vector<double> zf, sf, du, dv, au, av;
    std::vector<double> wall_eta_p(static_cast<std::size_t>(nz)), wall_rho(static_cast<std::size_t>(nz));
    for (int i = 0; i < nz; ++i) {
        const Vec3& X = setup.wall_X[static_cast<std::size_t>(i)];
        wall_eta_p[static_cast<std::size_t>(i)] = a.eta_p(mesh.z_center(i), X);
        wall_rho[static_cast<std::size_t>(i)] = a.rho_surf(mesh.z_center(i), X);
    }
    MicroFields prev;
    for (long step = 0; step < steps; ++step) {
        const double t = f.time;
        setup.fluxes(t, zf, sf);
        const double u_in = inflow.u0(t), v_in = inflow.v0(t);
        mesh.diffusive_divergence(f.u, u_in, du);
        mesh.diffusive_divergence(f.v, v_in, dv);
        mesh.upwind_advection(zf, sf, f.u, u_in, au);
        mesh.upwind_advection(zf, sf, f.v, v_in, av);
        prev = f;
        for (int i = 0; i < nz; ++i) {
            const double x1 = mesh.z_center(i);
            const double zeta = a.zeta ? a.zeta(x1, t) : 0.0;
            const double eta_a = a.eta_a(x1, setup.wall_X[static_cast<std::size_t>(i)], t);
            for (int j = 0; j < ns; ++j) {
                const std::size_t c = mesh.index(i, j);
                const double u = prev.u[c], v = prev.v[c];
                double ru = eps * a.chi * du[c] - au[c];
                double rv = eps * a.omega * dv[c] - av[c];
                if (j == ns - 1) {
                    const double area = eps * mesh.wall_area(i);
                    const double rho_w = wall_rho[static_cast<std::size_t>(i)];
                    ru += area * (-wall_eta_p[static_cast<std::size_t>(i)] * u - eta_a * a.g_a(u) +
                                  a.alpha / a.omega * rho_w * v);
                    rv -= area * rho_w * v;
                }
                const double volumic = zeta * a.phi(v);
                f.u[c] = u + dt * (ru / vol[c] + volumic);
                f.v[c] = v + dt * (rv / vol[c] - volumic);
            }
        }
        f.time = step + 1 == steps ? grid.horizon : t + dt;
        for (std::size_t c = 0; c < n; ++c) {
            sol.max_v = std::max(sol.max_v, f.v[c]);
            sol.min_u = std::min(sol.min_u, f.u[c]);
            sol.min_v = std::min(sol.min_v, f.v[c]);
        }
        while (next < snapshot_times.size() && snapshot_times[next] <= f.time + 1e-12 * grid.horizon) {
            const double tau = snapshot_times[next++];
            const double w = std::clamp((tau - prev.time) / (f.time - prev.time), 0.0, 1.0);
            MicroFields s;
            s.time = tau;
            s.u.resize(n);
            s.v.resize(n);
            for (std::size_t c = 0; c < n; ++c) {
                s.u[c] = (1.0 - w) * prev.u[c] + w * f.u[c];
                s.v[c] = (1.0 - w) * prev.v[c] + w * f.v[c];
            }
            sol.snapshots.push_back(std::move(s));
        }
    }
    return sol;
}

std::vector<double> cross_section_average(const std::vector<double>& field, const MicroSolution& layout) {
    const auto nz = static_cast<std::size_t>(layout.n_z), ns = static_cast<std::size_t>(layout.n_rho);
    require(field.size() == nz * ns, ErrorKind::InvalidGrid, "field size does not match the layout");
    std::vector<double> out(nz);
    for (std::size_t i = 0; i < nz; ++i) {
        double sum = 0.0, w = 0.0;
        for (std::size_t j = 0; j < ns; ++j) {
            sum += layout.volumes[i * ns + j] * field[i * ns + j];
            w += layout.volumes[i * ns + j];
        }
        out[i] = sum / w;
    }
    return out;
}

void write_micro_csv(std::ostream& out, const MicroSolution& solution) {
    CsvWriter csv(out);
    csv.header({"t", "x1", "rho_hat", "u", "v"});
    for (const auto& s : solution.snapshots) {
        for (int i = 0; i < solution.n_z; ++i) {
            for (int j = 0; j < solution.n_rho; ++j) {
                const std::size_t c = static_cast<std::size_t>(i) * solution.n_rho + j;
                csv.row({s.time, solution.x1[static_cast<std::size_t>(i)], solution.rho_hat[static_cast<std::size_t>(j)],
                         s.u[c], s.v[c]});
            }
        }
    }
}

namespace {

/// Macro cell values interpolated linearly at x, with the inflow value at x1 = 0.
double macro_at(const AxialGrid& grid, const std::vector<double>& values, double inlet, double x) {
    const double dx = grid.dx();
    const double pos = x / dx - 0.5;
    if (pos <= 0.0) {
        const double w = std::clamp(x / (0.5 * dx), 0.0, 1.0);
        return (1.0 - w) * inlet + w * values.front();
    }
    const auto i = static_cast<std::size_t>(pos);
    if (i + 1 >= values.size()) return values.back();
    const double w = pos - static_cast<double>(i);
    return (1.0 - w) * values[i] + w * values[i + 1];
}

}  // namespace

ComparisonTable compare_micro_macro(const ComparisonScenario& sc, const std::vector<double>& eps_list) {
    require(eps_list.size() >= 3, ErrorKind::InvalidParameter, "comparison needs at least three eps values");
    require(!sc.snapshot_times.empty(), ErrorKind::InvalidParameter, "comparison needs snapshot times");
    for (double eps : eps_list) {
        MicroGrid g{eps, sc.length, sc.n_z_per_period, sc.n_rho, sc.horizon, 0.0};
        g.validate();
    }

    auto macro_job = std::async(std::launch::async, [&] {
        const auto coeffs = homogenized_coefficients(sc.profile, sc.velocity, sc.absorption, {0.0, sc.length},
                                                     {0.0, sc.horizon}, sc.averaging);
        const AxialGrid grid{sc.length, sc.macro_cells, sc.horizon, sc.macro_cfl};
        return solve_macro(grid, coeffs, sc.absorption, sc.inflow, sc.snapshot_times);
    });
    std::vector<std::future<MicroSolution>> micro_jobs;
    for (double eps : eps_list) {
        micro_jobs.push_back(std::async(std::launch::async, [&sc, eps] {
            const MicroGrid g{eps, sc.length, sc.n_z_per_period, sc.n_rho, sc.horizon, 0.0};
            return solve_micro(g, sc.profile, sc.velocity, sc.absorption, sc.inflow, sc.snapshot_times);
        }));
    }
    const MacroSolution macro = macro_job.get();
    const AxialGrid grid{sc.length, sc.macro_cells, sc.horizon, sc.macro_cfl};

    ComparisonTable table;
    for (std::size_t e = 0; e < eps_list.size(); ++e) {
        const MicroSolution micro = micro_jobs[e].get();
        ComparisonRow row;
        row.eps = eps_list[e];
        for (std::size_t k = 0; k < sc.snapshot_times.size(); ++k) {
            const auto& ms = micro.snapshots[k];
            const auto& as = macro.snapshots[k];
            const double t = sc.snapshot_times[k];
            const auto ubar = cross_section_average(ms.u, micro);
            const auto vbar = cross_section_average(ms.v, micro);
            for (std::size_t i = 0; i < ubar.size(); ++i) {
                const double x = micro.x1[i];
                row.error_u = std::max(row.error_u, std::abs(ubar[i] - macro_at(grid, as.u, sc.inflow.u0(t), x)));
                row.error_v = std::max(row.error_v, std::abs(vbar[i] - macro_at(grid, as.v, sc.inflow.v0(t), x)));
            }
        }
        table.rows.push_back(row);
    }
    // Rows are reported in the given order; monotonicity is judged with eps decreasing.
    std::vector<ComparisonRow> sorted = table.rows;
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.eps > b.eps; });
    table.monotone = true;
    for (std::size_t k = 1; k < sorted.size(); ++k) {
        if (!(sorted[k].error() < sorted[k - 1].error())) table.monotone = false;
    }
    table.flagged = !table.monotone;
    return table;
}

void write_comparison_csv(std::ostream& out, const ComparisonTable& table) {
    CsvWriter csv(out);
    csv.header({"eps", "error_u", "error_v"});
    for (const auto& r : table.rows) csv.row({r.eps, r.error_u, r.error_v});
}

}  // namespace villus
