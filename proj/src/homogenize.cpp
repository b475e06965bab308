#include "villus/homogenize.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include "villus/csv.hpp"
#include "villus/error.hpp"
#include "villus/mapped_grid.hpp"

namespace villus {

double theta_surface(double x1, const Vec3& X, double t, double u, double v, const AbsorptionModel& absorption) {
    return absorption.eta_p(x1, X) * u + absorption.eta_a(x1, X, t) * absorption.g_a(u) -
           absorption.alpha / absorption.omega * absorption.rho_surf(x1, X) * v;
}

// ---------------------------------------------------------------------------
// Coefficient tables

namespace {

/// Bracketing index and weight for clamped linear interpolation.
std::pair<std::size_t, double> locate(const std::vector<double>& grid, double x) {
    if (grid.size() == 1 || x <= grid.front()) return {0, 0.0};
    if (x >= grid.back()) return {grid.size() - 2, 1.0};
    const auto it = std::upper_bound(grid.begin(), grid.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - grid.begin()) - 1;
    return {i, (x - grid[i]) / (grid[i + 1] - grid[i])};
}

double interp1(const std::vector<double>& grid, const std::vector<double>& values, double x) {
    if (grid.size() == 1) return values[0];
    const auto [i, w] = locate(grid, x);
    return (1.0 - w) * values[i] + w * values[i + 1];
}

double interp2(const std::vector<double>& xs, const std::vector<double>& ts, const std::vector<double>& values,
               double x, double t) {
    const std::size_t nt = ts.size();
    const auto [i, wx] = locate(xs, x);
    const auto [j, wt] = locate(ts, t);
    const std::size_t i1 = xs.size() == 1 ? i : i + 1;
    const std::size_t j1 = nt == 1 ? j : j + 1;
    auto at = [&](std::size_t a, std::size_t b) { return values[a * nt + b]; };
    return (1 - wx) * ((1 - wt) * at(i, j) + wt * at(i, j1)) + wx * ((1 - wt) * at(i1, j) + wt * at(i1, j1));
}

void check_samples(const std::vector<double>& s, const char* what) {
    require(!s.empty(), ErrorKind::InvalidParameter, std::string(what) + " samples must be nonempty");
    for (std::size_t i = 1; i < s.size(); ++i) {
        require(s[i] > s[i - 1], ErrorKind::InvalidParameter, std::string(what) + " samples must increase strictly");
    }
}

}  // namespace

double HomogenizedCoefficients::cbar_e1_at(double x1, double t) const {
    return interp2(x1_samples, t_samples, cbar_e1, x1, t);
}
double HomogenizedCoefficients::etabar_p_at(double x1) const { return interp1(x1_samples, etabar_p, x1); }
double HomogenizedCoefficients::etabar_a_at(double x1, double t) const {
    return interp2(x1_samples, t_samples, etabar_a, x1, t);
}
double HomogenizedCoefficients::rhobar_at(double x1) const { return interp1(x1_samples, rhobar, x1); }

HomogenizedCoefficients HomogenizedCoefficients::uniform(double cbar_e1, double etabar_p, double etabar_a,
                                                         double rhobar, double ratio) {
    HomogenizedCoefficients h;
    h.x1_samples = {0.0};
    h.t_samples = {0.0};
    h.cbar_e1 = {cbar_e1};
    h.cbar = {Vec3{cbar_e1, 0.0, 0.0}};
    h.etabar_a = {etabar_a};
    h.etabar_p = {etabar_p};
    h.rhobar = {rhobar};
    h.ratio = ratio;
    return h;
}

VelocityAssumptions check_velocity(const VillusProfile& profile, const VelocityField& velocity, double x1, double t,
                                   int samples, unsigned seed) {
    VelocityAssumptions r;
    r.min_axial = std::numeric_limits<double>::infinity();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uz(0.0, 1.0), ut(0.0, kTwoPi), us(0.0, 0.95);
    const double h = 1e-5;
    for (int n = 0; n < samples; ++n) {
        const double z = uz(rng), th = ut(rng), s = us(rng);
        const double R = s * profile.radius(z, th);
        const Vec3 X{z, R * std::cos(th), R * std::sin(th)};
        r.min_axial = std::min(r.min_axial, velocity.c(x1, X, t)[0]);
        double div = 0.0;
        for (int k = 0; k < 3; ++k) {
            Vec3 xp = X, xm = X;
            xp[k] += h;
            xm[k] -= h;
            div += (velocity.c(x1, xp, t)[k] - velocity.c(x1, xm, t)[k]) / (2.0 * h);
        }
        r.divergence_residual = std::max(r.divergence_residual, std::abs(div));
        const Vec3 W = wall_point(profile, z, th);
        const Vec3 cw = velocity.c(x1, W, t);
        r.min_axial = std::min(r.min_axial, cw[0]);
        r.normal_trace_residual = std::max(r.normal_trace_residual, std::abs(dot(cw, outward_normal(profile, z, th))));
    }
    return r;
}

HomogenizedCoefficients homogenized_coefficients(const VillusProfile& profile, const VelocityField& velocity,
                                                 const AbsorptionModel& absorption,
                                                 const std::vector<double>& x1_samples,
                                                 const std::vector<double>& t_samples, const AveragingGrid& grid) {
    check_samples(x1_samples, "x1");
    check_samples(t_samples, "t");
    HomogenizedCoefficients h;
    h.x1_samples = x1_samples;
    h.t_samples = t_samples;
    h.measures = cell_measures(profile, grid.n_z, grid.n_theta);
    h.ratio = h.measures.ratio;
    const std::size_t nx = x1_samples.size(), nt = t_samples.size();
    h.cbar_e1.resize(nx * nt);
    h.cbar.resize(nx * nt);
    h.etabar_a.resize(nx * nt);
    h.etabar_p.resize(nx);
    h.rhobar.resize(nx);
    for (std::size_t i = 0; i < nx; ++i) {
        const double x1 = x1_samples[i];
        h.etabar_p[i] = surface_average(profile, [&](const Vec3& X) { return absorption.eta_p(x1, X); }, grid.n_z,
                                        grid.n_theta);
        h.rhobar[i] = surface_average(profile, [&](const Vec3& X) { return absorption.rho_surf(x1, X); }, grid.n_z,
                                      grid.n_theta);
        for (std::size_t j = 0; j < nt; ++j) {
            const double t = t_samples[j];
            const auto checks = check_velocity(profile, velocity, x1, t);
            if (checks.min_axial < -1e-12) {
                std::ostringstream msg;
                msg << "assumption (C1) violated: c·e1 = " << checks.min_axial << " < 0 at x1=" << x1 << ", t=" << t;
                throw Error(ErrorKind::AssumptionViolation, msg.str());
            }
            h.divergence_residual = std::max(h.divergence_residual, checks.divergence_residual);
            h.normal_trace_residual = std::max(h.normal_trace_residual, checks.normal_trace_residual);
            const Vec3 cbar = volume_average(profile, VolumeVecFn([&](const Vec3& X) { return velocity.c(x1, X, t); }),
                                             grid.n_z, grid.n_theta, grid.n_rho);
            if (!(cbar[0] > 0.0)) {
                std::ostringstream msg;
                msg << "assumption (C1) violated: cell average of c·e1 = " << cbar[0] << " <= 0 at x1=" << x1
                    << ", t=" << t;
                throw Error(ErrorKind::AssumptionViolation, msg.str());
            }
            h.cbar[i * nt + j] = cbar;
            h.cbar_e1[i * nt + j] = cbar[0];
            h.etabar_a[i * nt + j] = surface_average(
                profile, [&](const Vec3& X) { return absorption.eta_a(x1, X, t); }, grid.n_z, grid.n_theta);
        }
    }
    return h;
}

void write_coefficients_csv(std::ostream& out, const HomogenizedCoefficients& coeffs) {
    CsvWriter csv(out);
    csv.header({"x1", "t", "cbar", "etap", "etaa", "rhobar"});
    const std::size_t nt = coeffs.t_samples.size();
    for (std::size_t i = 0; i < coeffs.x1_samples.size(); ++i) {
        for (std::size_t j = 0; j < nt; ++j) {
            csv.row({coeffs.x1_samples[i], coeffs.t_samples[j], coeffs.cbar_e1[i * nt + j], coeffs.etabar_p[i],
                     coeffs.etabar_a[i * nt + j], coeffs.rhobar[i]});
        }
    }
}

// ---------------------------------------------------------------------------
// Compatibility

double lambda_from_compatibility(const CellProblemData& data, const HomogenizedCoefficients& coeffs,
                                 const AbsorptionModel& absorption) {
    const double theta_bar = coeffs.etabar_p_at(data.x1) * data.mu +
                             coeffs.etabar_a_at(data.x1, data.t) * absorption.g_a(data.mu) -
                             absorption.alpha / absorption.omega * coeffs.rhobar_at(data.x1) * data.nu;
    return coeffs.ratio * theta_bar + coeffs.cbar_e1_at(data.x1, data.t) * data.p - data.delta;
}

SolvabilityCheck check_solvability(const CellProblemData& data, const HomogenizedCoefficients& coeffs,
                                   const AbsorptionModel& absorption, double tolerance) {
    SolvabilityCheck r;
    r.residual = std::abs(data.lambda - lambda_from_compatibility(data, coeffs, absorption));
    r.solvable = r.residual <= tolerance;
    return r;
}

// ---------------------------------------------------------------------------
// Cell problem

void write_corrector_csv(std::ostream& out, const CorrectorField& field) {
    CsvWriter csv(out);
    csv.header({"z", "rho_hat", "u1"});
    for (int i = 0; i < field.n_z; ++i) {
        for (int j = 0; j < field.n_rho; ++j) {
            csv.row({field.z[static_cast<std::size_t>(i)], field.rho_hat[static_cast<std::size_t>(j)], field.at(i, j)});
        }
    }
}

double CellSolution::incompatibility(double lam) const {
    double proj = 0.0, wn = 0.0;
    for (std::size_t k = 0; k < left_kernel.size(); ++k) {
        proj += left_kernel[k] * (rhs[k] + lam * volumes[k]);
        wn += left_kernel[k] * left_kernel[k];
    }
    return std::abs(proj) / std::sqrt(wn);
}

CellSolution solve_cell_problem(const VillusProfile& profile, const VelocityField& velocity,
                                const AbsorptionModel& absorption, const CellProblemData& data, const CellGrid& grid) {
    require(profile.axisymmetric, ErrorKind::UnsupportedGeometry,
            "cell solver supports theta-independent profiles only");
    require(grid.n_z >= 16 && grid.n_rho >= 16, ErrorKind::InvalidGrid, "cell grid needs at least 16 cells per direction");
    profile.validate();

    const MappedAxisymmetricGrid mesh(
        0.0, 1.0, grid.n_z, grid.n_rho, true, [&](double z) { return profile.radius(z); },
        [&](double z) { return profile.radius_dz(z); });
    const std::size_t n = mesh.cells();
    const int nz = mesh.nz(), ns = mesh.ns();
    const double chi = absorption.chi;
    const auto& vol = mesh.volumes();

    // Volume fluxes and ∫_P c·e1 per cell.
    std::vector<double> zf, sf, axial(n, 0.0);
    if (velocity.stream) {
        const auto& st = *velocity.stream;
        auto psi = [&](double, double s) { return st.stream(data.x1, data.t, s); };
        mesh.fluxes_from_stream(psi, zf, sf);
        for (int i = 0; i < nz; ++i) {
            for (int j = 0; j < ns; ++j) {
                axial[mesh.index(i, j)] = mesh.hz() * (psi(0.0, mesh.s_face(j + 1)) - psi(0.0, mesh.s_face(j)));
            }
        }
    } else {
        mesh.fluxes_from_velocity([&](double, const Vec3& X) { return velocity.c(data.x1, X, data.t); }, zf, sf);
        for (int i = 0; i < nz; ++i) {
            const double z = mesh.z_center(i);
            for (int j = 0; j < ns; ++j) {
                const Vec3 X{z, mesh.s_center(j) * profile.radius(z), 0.0};
                axial[mesh.index(i, j)] = velocity.c(data.x1, X, data.t)[0] * vol[mesh.index(i, j)];
            }
        }
    }

    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(n * 24);
    auto add_face = [&](const MappedAxisymmetricGrid::FaceStencil& st, std::size_t minus, std::size_t plus) {
        // Flux along + leaves `minus` and enters `plus`; the operator carries -chi.
        for (const auto& t : st.terms) {
            trips.emplace_back(static_cast<int>(minus), static_cast<int>(t.cell), -chi * t.coef);
            trips.emplace_back(static_cast<int>(plus), static_cast<int>(t.cell), chi * t.coef);
        }
    };
    auto add_upwind = [&](double phi, std::size_t minus, std::size_t plus) {
        const std::size_t down = phi > 0.0 ? plus : minus;
        const std::size_t up = phi > 0.0 ? minus : plus;
        const double a = std::abs(phi);
        trips.emplace_back(static_cast<int>(down), static_cast<int>(down), a);
        trips.emplace_back(static_cast<int>(down), static_cast<int>(up), -a);
    };
    for (int k = 0; k < mesh.z_face_count(); ++k) {
        const auto [left, right] = mesh.z_face_cells(k);
        for (int j = 0; j < ns; ++j) {
            const std::size_t l = mesh.index(static_cast<int>(left), j), r = mesh.index(static_cast<int>(right), j);
            add_face(mesh.z_stencil(k, j), l, r);
            add_upwind(zf[static_cast<std::size_t>(k) * ns + j], l, r);
        }
    }
    for (int i = 0; i < nz; ++i) {
        for (int j = 0; j < ns - 1; ++j) {
            const std::size_t lo = mesh.index(i, j), hi = mesh.index(i, j + 1);
            add_face(mesh.s_stencil(i, j), lo, hi);
            add_upwind(sf[static_cast<std::size_t>(i) * (ns - 1) + j], lo, hi);
        }
    }

    // Right-hand side f in A u = f + lambda V.
    std::vector<double> f(n);
    for (std::size_t c = 0; c < n; ++c) f[c] = data.delta * vol[c] - data.p * axial[c];
    for (int i = 0; i < nz; ++i) {
        const double z = mesh.z_center(i);
        const Vec3 X = wall_point(profile, z, 0.0);
        const double theta = theta_surface(data.x1, X, data.t, data.mu, data.nu, absorption);
        const double g = -theta / chi - data.p * mesh.wall_normal_z(i);
        f[mesh.index(i, ns - 1)] += chi * g * mesh.wall_area(i);
    }

    const int N = static_cast<int>(n);
    Eigen::SparseMatrix<double> A(N, N);
    A.setFromTriplets(trips.begin(), trips.end());

    // Bordered system [A -V; V^T 0][u; lambda] = [f; 0].
    std::vector<Eigen::Triplet<double>> btrips = trips;
    for (int c = 0; c < N; ++c) {
        btrips.emplace_back(c, N, -vol[static_cast<std::size_t>(c)]);
        btrips.emplace_back(N, c, vol[static_cast<std::size_t>(c)]);
    }
    Eigen::SparseMatrix<double> B(N + 1, N + 1);
    B.setFromTriplets(btrips.begin(), btrips.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(B);
    require(lu.info() == Eigen::Success, ErrorKind::SolverFailure, "cell problem factorization failed");
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(N + 1);
    for (int c = 0; c < N; ++c) rhs[c] = f[static_cast<std::size_t>(c)];
    const Eigen::VectorXd sol = lu.solve(rhs);
    require(lu.info() == Eigen::Success, ErrorKind::SolverFailure, "cell problem solve failed");

    CellSolution out;
    out.lambda = sol[N];
    const Eigen::Map<const Eigen::VectorXd> fv(f.data(), N), vv(vol.data(), N);
    const Eigen::VectorXd u = sol.head(N);
    const Eigen::VectorXd res = A * u - fv - out.lambda * vv;
    const double scale = std::max({fv.norm(), std::abs(out.lambda) * vv.norm(), 1e-300});
    out.relative_residual = (fv.norm() == 0.0 && out.lambda == 0.0) ? res.norm() : res.norm() / scale;
    if (!(out.relative_residual <= 1e-10)) {
        std::ostringstream msg;
        msg << "cell problem residual " << out.relative_residual << " exceeds 1e-10";
        throw Error(ErrorKind::SolverFailure, msg.str());
    }

    // Left kernel: [A^T e; V^T 0][w; m] = [0; 1].
    std::vector<Eigen::Triplet<double>> ktrips;
    ktrips.reserve(btrips.size());
    for (const auto& t : trips) ktrips.emplace_back(t.col(), t.row(), t.value());
    for (int c = 0; c < N; ++c) {
        ktrips.emplace_back(c, N, 1.0);
        ktrips.emplace_back(N, c, vol[static_cast<std::size_t>(c)]);
    }
    Eigen::SparseMatrix<double> K(N + 1, N + 1);
    K.setFromTriplets(ktrips.begin(), ktrips.end());
    lu.compute(K);
    require(lu.info() == Eigen::Success, ErrorKind::SolverFailure, "left-kernel factorization failed");
    Eigen::VectorXd krhs = Eigen::VectorXd::Zero(N + 1);
    krhs[N] = 1.0;
    const Eigen::VectorXd w = lu.solve(krhs).head(N);
    out.left_kernel.assign(w.data(), w.data() + N);
    out.lambda_projection = -w.dot(fv);
    out.rhs = f;
    out.volumes = vol;

    auto& cf = out.corrector;
    cf.n_z = nz;
    cf.n_rho = ns;
    for (int i = 0; i < nz; ++i) cf.z.push_back(mesh.z_center(i));
    for (int j = 0; j < ns; ++j) cf.rho_hat.push_back(mesh.s_center(j));
    cf.values.assign(u.data(), u.data() + N);
    cf.volumes = vol;
    double m = 0.0, vsum = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
        m += vol[c] * cf.values[c];
        vsum += vol[c];
    }
    cf.mean = m / vsum;
    return out;
}

}  // namespace villus
