#include "msgfem/fem.hpp"

#include <array>
#include <cmath>

namespace msgfem {

namespace {

struct GaussPoint {
    double xi, eta, w;
};

// 2x2 Gauss on the unit square: exact for the biquadratic integrands produced
// by bilinear shapes against cellwise-constant coefficients.
constexpr double kG0 = 0.211324865405187118; // (1 - 1/sqrt(3)) / 2
constexpr double kG1 = 0.788675134594812882;
constexpr std::array<GaussPoint, 4> kGauss2x2 = {
    GaussPoint{kG0, kG0, 0.25}, GaussPoint{kG1, kG0, 0.25}, GaussPoint{kG1, kG1, 0.25},
    GaussPoint{kG0, kG1, 0.25}};

void shape(double xi, double eta, std::array<double, 4>& n) {
    n = {(1 - xi) * (1 - eta), xi * (1 - eta), xi * eta, (1 - xi) * eta};
}

void shape_grad(double xi, double eta, std::array<double, 4>& dxi, std::array<double, 4>& deta) {
    dxi = {-(1 - eta), (1 - eta), eta, -eta};
    deta = {-(1 - xi), -xi, xi, (1 - xi)};
}

// Gauss-Legendre rule on [0,1] by Newton iteration on Legendre polynomials.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.resize(n);
    w.resize(n);
    for (int i = 0; i < n; ++i) {
        double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        x[i] = 0.5 * (1.0 - z); // map [-1,1] -> [0,1], ascending
        w[i] = 1.0 / ((1.0 - z * z) * pp * pp);
    }
}

} // namespace

NodalField NodalField::sample(MeshPtr m, const std::function<double(double, double)>& f) {
    Vec v(m->node_count());
    for (int id = 0; id < m->node_count(); ++id) v[id] = f(m->node_x(id), m->node_y(id));
    return NodalField(std::move(m), std::move(v));
}

std::array<std::array<double, 4>, 4> element_stiffness(const SymMat2& a, double hx, double hy) {
    std::array<std::array<double, 4>, 4> k{};
    std::array<double, 4> dxi, deta;
    for (const auto& gp : kGauss2x2) {
        shape_grad(gp.xi, gp.eta, dxi, deta);
        std::array<double, 4> gx, gy;
        for (int i = 0; i < 4; ++i) {
            gx[i] = dxi[i] / hx;
            gy[i] = deta[i] / hy;
        }
        const double scale = gp.w * hx * hy;
        for (int i = 0; i < 4; ++i) {
            const double fx = a.a11 * gx[i] + a.a12 * gy[i];
            const double fy = a.a12 * gx[i] + a.a22 * gy[i];
            for (int j = 0; j < 4; ++j) k[i][j] += scale * (fx * gx[j] + fy * gy[j]);
        }
    }
    return k;
}

std::array<std::array<double, 4>, 4> element_mass(double weight, double hx, double hy) {
    std::array<std::array<double, 4>, 4> m{};
    std::array<double, 4> n;
    for (const auto& gp : kGauss2x2) {
        shape(gp.xi, gp.eta, n);
        const double scale = gp.w * hx * hy * weight;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) m[i][j] += scale * n[i] * n[j];
    }
    return m;
}

namespace {

SparseSystem assemble(const Mesh& mesh, const Region& region,
                      const std::function<std::array<std::array<double, 4>, 4>(int)>& elem_matrix) {
    region.validate(mesh);
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(mesh.active_elem_count()) * 16);
    for (int e = 0; e < mesh.elem_count(); ++e) {
        if (!mesh.elem_active(e) || !region.contains(mesh, e)) continue;
        const auto ke = elem_matrix(e);
        const auto nodes = mesh.elem_nodes(e);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                if (ke[i][j] != 0.0) trips.emplace_back(nodes[i], nodes[j], ke[i][j]);
    }
    SparseSystem sys;
    sys.matrix.resize(mesh.node_count(), mesh.node_count());
    sys.matrix.setFromTriplets(trips.begin(), trips.end());
    return sys;
}

} // namespace

SparseSystem assemble_stiffness(const Mesh& mesh, const Region& region) {
    return assemble(mesh, region, [&](int e) {
        return element_stiffness(mesh.elem_mat(e), mesh.hx(), mesh.hy());
    });
}

SparseSystem assemble_weighted_mass(const Mesh& mesh, const std::function<double(int)>& cell_weight,
                                    const Region& region) {
    return assemble(mesh, region, [&](int e) {
        const double w = cell_weight(e);
        if (w < 0.0) throw ValidationError("assemble_weighted_mass: negative weight");
        return element_mass(w, mesh.hx(), mesh.hy());
    });
}

Vec mean_weights(const Mesh& mesh) {
    Vec c = Vec::Zero(mesh.node_count());
    const double q = 0.25 * mesh.hx() * mesh.hy();
    for (int e = 0; e < mesh.elem_count(); ++e) {
        if (!mesh.elem_active(e)) continue;
        for (int n : mesh.elem_nodes(e)) c[n] += q;
    }
    return c;
}

double field_mean(const NodalField& u) {
    const Vec c = mean_weights(*u.mesh);
    return c.dot(u.values) / c.sum();
}

Vec assemble_volume_load(const Mesh& mesh, const std::function<double(double, double)>& f) {
    Vec load = Vec::Zero(mesh.node_count());
    std::array<double, 4> n;
    for (int e = 0; e < mesh.elem_count(); ++e) {
        if (!mesh.elem_active(e)) continue;
        const int i = e % mesh.nx(), j = e / mesh.nx();
        const double x0 = mesh.rect().x0 + i * mesh.hx();
        const double y0 = mesh.rect().y0 + j * mesh.hy();
        const auto nodes = mesh.elem_nodes(e);
        for (const auto& gp : kGauss2x2) {
            shape(gp.xi, gp.eta, n);
            const double fx = f(x0 + gp.xi * mesh.hx(), y0 + gp.eta * mesh.hy());
            const double scale = gp.w * mesh.hx() * mesh.hy() * fx;
            for (int a = 0; a < 4; ++a) load[nodes[a]] += scale * n[a];
        }
    }
    return load;
}

namespace {

bool edge_on_mesh_side(const Mesh& mesh, const BoundaryEdge& e, int side) {
    const double tol = 1e-9 * std::max(mesh.hx(), mesh.hy());
    const double x0 = mesh.node_x(e.n0), y0 = mesh.node_y(e.n0);
    const double x1 = mesh.node_x(e.n1), y1 = mesh.node_y(e.n1);
    switch (side) {
    case 0: return std::abs(x0 - mesh.rect().x0) < tol && std::abs(x1 - mesh.rect().x0) < tol;
    case 1: return std::abs(x0 - mesh.rect().x1()) < tol && std::abs(x1 - mesh.rect().x1()) < tol;
    case 2: return std::abs(y0 - mesh.rect().y0) < tol && std::abs(y1 - mesh.rect().y0) < tol;
    case 3: return std::abs(y0 - mesh.rect().y1()) < tol && std::abs(y1 - mesh.rect().y1()) < tol;
    }
    return false;
}

bool edge_selected(const Mesh& mesh, const EdgeSet& set, const BoundaryEdge& e) {
    if (!e.outer) return false;
    if (set.select == EdgeSelect::AllOuter) return true;
    bool on = false;
    for (int s = 0; s < 4; ++s)
        if (set.sides[s] && edge_on_mesh_side(mesh, e, s)) on = true;
    return set.select == EdgeSelect::OnSides ? on : !on;
}

template <class Fn>
void for_each_edge_gauss(const Mesh& mesh, const EdgeSet& set,
                         int gauss_points, Fn&& fn) {
    std::vector<double> gx, gw;
    gauss_legendre(gauss_points, gx, gw);
    for (const auto& e : mesh.free_edges()) {
        if (!edge_selected(mesh, set, e)) continue;
        const double ax = mesh.node_x(e.n0), ay = mesh.node_y(e.n0);
        const double bx = mesh.node_x(e.n1), by = mesh.node_y(e.n1);
        const double len = std::hypot(bx - ax, by - ay);
        for (int q = 0; q < gauss_points; ++q) {
            const double t = gx[q];
            const double x = ax + t * (bx - ax), y = ay + t * (by - ay);
            fn(e, x, y, t, gw[q] * len);
        }
    }
}

} // namespace

Vec assemble_boundary_load(const Mesh& mesh, const EdgeSet& edges,
                           const std::function<double(double, double, double, double)>& flux,
                           int gauss_points) {
    Vec load = Vec::Zero(mesh.node_count());
    for_each_edge_gauss(mesh, edges, gauss_points,
                        [&](const BoundaryEdge& e, double x, double y, double t, double w) {
                            const double g = flux(x, y, e.nx, e.ny);
                            load[e.n0] += w * g * (1.0 - t);
                            load[e.n1] += w * g * t;
                        });
    return load;
}

double boundary_flux_total(const Mesh& mesh, const EdgeSet& edges,
                           const std::function<double(double, double, double, double)>& flux,
                           int gauss_points) {
    double total = 0.0;
    for_each_edge_gauss(mesh, edges, gauss_points,
                        [&](const BoundaryEdge& e, double x, double y, double, double w) {
                            total += w * flux(x, y, e.nx, e.ny);
                        });
    return total;
}

namespace {

double elem_energy(const Mesh& mesh, int e, const Vec& u, const Vec& v) {
    const auto nodes = mesh.elem_nodes(e);
    const auto& a = mesh.elem_mat(e);
    std::array<double, 4> dxi, deta;
    double acc = 0.0;
    for (const auto& gp : kGauss2x2) {
        shape_grad(gp.xi, gp.eta, dxi, deta);
        double ux = 0, uy = 0, vx = 0, vy = 0;
        for (int i = 0; i < 4; ++i) {
            ux += u[nodes[i]] * dxi[i] / mesh.hx();
            uy += u[nodes[i]] * deta[i] / mesh.hy();
            vx += v[nodes[i]] * dxi[i] / mesh.hx();
            vy += v[nodes[i]] * deta[i] / mesh.hy();
        }
        acc += gp.w * mesh.hx() * mesh.hy() *
               ((a.a11 * ux + a.a12 * uy) * vx + (a.a12 * ux + a.a22 * uy) * vy);
    }
    return acc;
}

double elem_l2(const Mesh& mesh, int e, const Vec& u, double weight) {
    const auto nodes = mesh.elem_nodes(e);
    std::array<double, 4> n;
    double acc = 0.0;
    for (const auto& gp : kGauss2x2) {
        shape(gp.xi, gp.eta, n);
        double uu = 0;
        for (int i = 0; i < 4; ++i) uu += u[nodes[i]] * n[i];
        acc += gp.w * mesh.hx() * mesh.hy() * weight * uu * uu;
    }
    return acc;
}

} // namespace

double norm(const NodalField& u, NormKind kind, const Region& region) {
    const Mesh& mesh = *u.mesh;
    region.validate(mesh);
    double acc = 0.0;
    for (int e = 0; e < mesh.elem_count(); ++e) {
        if (!mesh.elem_active(e) || !region.contains(mesh, e)) continue;
        switch (kind) {
        case NormKind::Energy: acc += elem_energy(mesh, e, u.values, u.values); break;
        case NormKind::L2: acc += elem_l2(mesh, e, u.values, 1.0); break;
        case NormKind::L2Star:
            acc += elem_l2(mesh, e, u.values, mesh.elem_mat(e).eigenvalues().second);
            break;
        }
    }
    return std::sqrt(std::max(0.0, acc));
}

double energy_inner(const NodalField& u, const NodalField& v, const Region& region) {
    const Mesh& mesh = *u.mesh;
    region.validate(mesh);
    double acc = 0.0;
    for (int e = 0; e < mesh.elem_count(); ++e) {
        if (!mesh.elem_active(e) || !region.contains(mesh, e)) continue;
        acc += elem_energy(mesh, e, u.values, v.values);
    }
    return acc;
}

} // namespace msgfem
