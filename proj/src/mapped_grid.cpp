#include "villus/mapped_grid.hpp"

#include <algorithm>
#include <cmath>

#include "villus/error.hpp"

namespace villus {

MappedAxisymmetricGrid::MappedAxisymmetricGrid(double z0, double length, int nz, int ns, bool periodic,
                                               ScalarFn radius, ScalarFn radius_dz)
    : z0_(z0),
      length_(length),
      nz_(nz),
      ns_(ns),
      periodic_(periodic),
      radius_(std::move(radius)),
      radius_dz_(std::move(radius_dz)) {
    require(length_ > 0.0, ErrorKind::InvalidGrid, "mapped grid length must be positive");
    require(nz_ >= 2 && ns_ >= 2, ErrorKind::InvalidGrid, "mapped grid needs at least 2 cells per direction");
    hz_ = length_ / nz_;
    hs_ = 1.0 / ns_;
    volume_.resize(cells());
    wall_area_.resize(static_cast<std::size_t>(nz_));
    wall_normal_z_.resize(static_cast<std::size_t>(nz_));
    for (int i = 0; i < nz_; ++i) {
        const double z = z_center(i);
        const double rho = radius_(z);
        require(rho > 0.0, ErrorKind::SingularGeometry, "wall radius must stay positive");
        const double drho = radius_dz_(z);
        for (int j = 0; j < ns_; ++j) {
            const double s0 = s_face(j), s1 = s_face(j + 1);
            volume_[index(i, j)] = rho * rho * hz_ * (s1 * s1 - s0 * s0) / 2.0;
        }
        const double stretch = std::sqrt(1.0 + drho * drho);
        wall_area_[static_cast<std::size_t>(i)] = hz_ * rho * stretch;
        wall_normal_z_[static_cast<std::size_t>(i)] = -drho / stretch;
    }
    build_stencils();
}

std::pair<long, long> MappedAxisymmetricGrid::z_face_cells(int k) const {
    if (periodic_) return {(k - 1 + nz_) % nz_, k};
    return {k - 1, k < nz_ ? k : -1};
}

void MappedAxisymmetricGrid::build_stencils() {
    // Centered radial derivative inside column i at row j.
    auto ds_terms = [&](int i, int j, double scale, std::vector<Term>& out) {
        if (j == 0) {
            out.push_back({index(i, 1), scale / (2.0 * hs_)});
            out.push_back({index(i, 0), -scale / (2.0 * hs_)});
        } else if (j == ns_ - 1) {
            out.push_back({index(i, j), scale / hs_});
            out.push_back({index(i, j - 1), -scale / hs_});
        } else {
            out.push_back({index(i, j + 1), scale / (2.0 * hs_)});
            out.push_back({index(i, j - 1), -scale / (2.0 * hs_)});
        }
    };
    // Axial derivative inside row j at column i.
    auto dz_terms = [&](int i, int j, double scale, std::vector<Term>& out) {
        if (periodic_) {
            out.push_back({index((i + 1) % nz_, j), scale / (2.0 * hz_)});
            out.push_back({index((i - 1 + nz_) % nz_, j), -scale / (2.0 * hz_)});
        } else if (i == 0) {
            out.push_back({index(1, j), scale / hz_});
            out.push_back({index(0, j), -scale / hz_});
        } else if (i == nz_ - 1) {
            out.push_back({index(i, j), scale / hz_});
            out.push_back({index(i - 1, j), -scale / hz_});
        } else {
            out.push_back({index(i + 1, j), scale / (2.0 * hz_)});
            out.push_back({index(i - 1, j), -scale / (2.0 * hz_)});
        }
    };

    const int nfaces = z_face_count();
    z_stencils_.assign(static_cast<std::size_t>(nfaces) * ns_, {});
    for (int k = 0; k < nfaces; ++k) {
        const auto [left, right] = z_face_cells(k);
        if (right < 0) continue;  // outlet: free outflow, no diffusive flux
        const double z = z_face(k);
        const double rho = radius_(z);
        const double a_over_s = radius_dz_(z) / rho;
        for (int j = 0; j < ns_; ++j) {
            const double s = s_center(j);
            const double weight = hs_ * s * rho * rho;  // face measure times Jacobian
            const double a = s * a_over_s;
            auto& st = z_stencils_[static_cast<std::size_t>(k) * ns_ + j];
            if (left >= 0) {
                st.terms.push_back({index(static_cast<int>(right), j), weight / hz_});
                st.terms.push_back({index(static_cast<int>(left), j), -weight / hz_});
                ds_terms(static_cast<int>(left), j, -0.5 * weight * a, st.terms);
                ds_terms(static_cast<int>(right), j, -0.5 * weight * a, st.terms);
            } else {
                // Inlet face: one-sided difference to the Dirichlet value over hz/2.
                st.terms.push_back({index(static_cast<int>(right), j), 2.0 * weight / hz_});
                st.dirichlet_coef = -2.0 * weight / hz_;
                ds_terms(static_cast<int>(right), j, -weight * a, st.terms);
            }
        }
    }

    s_stencils_.assign(static_cast<std::size_t>(nz_) * (ns_ - 1), {});
    for (int i = 0; i < nz_; ++i) {
        const double z = z_center(i);
        const double rho = radius_(z);
        const double drho = radius_dz_(z);
        for (int j = 0; j < ns_ - 1; ++j) {
            const double s = s_face(j + 1);
            const double a = s * drho / rho;
            const double gss = a * a + 1.0 / (rho * rho);
            const double weight = hz_ * s * rho * rho;
            auto& st = s_stencils_[static_cast<std::size_t>(i) * (ns_ - 1) + j];
            st.terms.push_back({index(i, j + 1), weight * gss / hs_});
            st.terms.push_back({index(i, j), -weight * gss / hs_});
            dz_terms(i, j, -0.5 * weight * a, st.terms);
            dz_terms(i, j + 1, -0.5 * weight * a, st.terms);
        }
    }
}

void MappedAxisymmetricGrid::diffusive_divergence(const std::vector<double>& u, double inlet_value,
                                                  std::vector<double>& out) const {
    out.assign(cells(), 0.0);
    auto eval = [&](const FaceStencil& st) {
        double f = st.dirichlet_coef * inlet_value;
        for (const auto& t : st.terms) f += t.coef * u[t.cell];
        return f;
    };
    const int nfaces = z_face_count();
    for (int k = 0; k < nfaces; ++k) {
        const auto [left, right] = z_face_cells(k);
        if (right < 0) continue;
        for (int j = 0; j < ns_; ++j) {
            const double f = eval(z_stencil(k, j));
            if (left >= 0) out[index(static_cast<int>(left), j)] += f;
            out[index(static_cast<int>(right), j)] -= f;
        }
    }
    for (int i = 0; i < nz_; ++i) {
        for (int j = 0; j < ns_ - 1; ++j) {
            const double f = eval(s_stencil(i, j));
            out[index(i, j)] += f;
            out[index(i, j + 1)] -= f;
        }
    }
}

void MappedAxisymmetricGrid::fluxes_from_stream(const std::function<double(double z, double s)>& stream,
                                                std::vector<double>& z_flux, std::vector<double>& s_flux) const {
    const int nfaces = z_face_count();
    z_flux.assign(static_cast<std::size_t>(nfaces) * ns_, 0.0);
    s_flux.assign(static_cast<std::size_t>(nz_) * (ns_ - 1), 0.0);
    for (int k = 0; k < nfaces; ++k) {
        const double z = z_face(k);
        for (int j = 0; j < ns_; ++j) {
            z_flux[static_cast<std::size_t>(k) * ns_ + j] = stream(z, s_face(j + 1)) - stream(z, s_face(j));
        }
    }
    for (int i = 0; i < nz_; ++i) {
        for (int j = 0; j < ns_ - 1; ++j) {
            const double s = s_face(j + 1);
            s_flux[static_cast<std::size_t>(i) * (ns_ - 1) + j] = -(stream(z_face(i + 1), s) - stream(z_face(i), s));
        }
    }
}

void MappedAxisymmetricGrid::fluxes_from_velocity(const std::function<Vec3(double z, const Vec3& X)>& velocity,
                                                  std::vector<double>& z_flux, std::vector<double>& s_flux) const {
    const int nfaces = z_face_count();
    z_flux.assign(static_cast<std::size_t>(nfaces) * ns_, 0.0);
    s_flux.assign(static_cast<std::size_t>(nz_) * (ns_ - 1), 0.0);
    for (int k = 0; k < nfaces; ++k) {
        const double z = z_face(k);
        const double rho = radius_(z);
        for (int j = 0; j < ns_; ++j) {
            const double s0 = s_face(j), s1 = s_face(j + 1);
            const Vec3 c = velocity(z, Vec3{z, s_center(j) * rho, 0.0});
            z_flux[static_cast<std::size_t>(k) * ns_ + j] = c[0] * rho * rho * (s1 * s1 - s0 * s0) / 2.0;
        }
    }
    for (int i = 0; i < nz_; ++i) {
        const double z = z_center(i);
        const double rho = radius_(z);
        const double drho = radius_dz_(z);
        for (int j = 0; j < ns_ - 1; ++j) {
            const double s = s_face(j + 1);
            const Vec3 c = velocity(z, Vec3{z, s * rho, 0.0});
            // c·grad(s) times the Jacobian s rho^2 and the face length hz.
            const double contravariant = -s * drho / rho * c[0] + c[1] / rho;
            s_flux[static_cast<std::size_t>(i) * (ns_ - 1) + j] = contravariant * s * rho * rho * hz_;
        }
    }
}

void MappedAxisymmetricGrid::upwind_advection(const std::vector<double>& z_flux, const std::vector<double>& s_flux,
                                              const std::vector<double>& u, double inlet_value,
                                              std::vector<double>& out) const {
    out.assign(cells(), 0.0);
    const int nfaces = z_face_count();
    for (int k = 0; k < nfaces; ++k) {
        const auto [left, right] = z_face_cells(k);
        for (int j = 0; j < ns_; ++j) {
            const double phi = z_flux[static_cast<std::size_t>(k) * ns_ + j];  // along +z
            if (left >= 0 && right >= 0) {
                const std::size_t l = index(static_cast<int>(left), j), r = index(static_cast<int>(right), j);
                if (phi > 0.0) {
                    out[r] += phi * (u[r] - u[l]);  // inflow into the right cell
                } else {
                    out[l] += -phi * (u[l] - u[r]);
                }
            } else if (left < 0) {
                const std::size_t r = index(static_cast<int>(right), j);
                if (phi > 0.0) out[r] += phi * (u[r] - inlet_value);
            }
        }
    }
    for (int i = 0; i < nz_; ++i) {
        for (int j = 0; j < ns_ - 1; ++j) {
            const double phi = s_flux[static_cast<std::size_t>(i) * (ns_ - 1) + j];  // along +s
            const std::size_t lo = index(i, j), hi = index(i, j + 1);
            if (phi > 0.0) {
                out[hi] += phi * (u[hi] - u[lo]);
            } else {
                out[lo] += -phi * (u[lo] - u[hi]);
            }
        }
    }
}

}  // namespace villus
