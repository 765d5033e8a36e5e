#include "msgfem/gfem.hpp"

#include <cmath>

namespace msgfem {

CoverAndPU build_cover_and_pu(const Rect& domain, int m, const MeshPtr& fine, int star_cells) {
    if (m < 1) throw ValidationError("build_cover_and_pu: m must be >= 1");
    if (fine->nx() % m != 0 || fine->ny() % m != 0)
        throw ValidationError("build_cover_and_pu: fine mesh does not nest the coarse grid");
    const double tolr = 1e-9 * domain.diam();
    if (std::abs(fine->rect().x0 - domain.x0) > tolr || std::abs(fine->rect().width - domain.width) > tolr ||
        std::abs(fine->rect().y0 - domain.y0) > tolr || std::abs(fine->rect().height - domain.height) > tolr)
        throw ValidationError("build_cover_and_pu: fine mesh does not cover the domain");

    const double hx = domain.width / m, hy = domain.height / m;
    const int half = star_cells / 2;
    CoverAndPU out;
    out.cover.domain = domain;
    out.cover.m = m;
    out.cover.star_cells = star_cells;

    for (int cj = 0; cj <= m; ++cj) {
        for (int ci = 0; ci <= m; ++ci) {
            CoverPatch p;
            p.index = static_cast<int>(out.cover.patches.size());
            p.ci = ci;
            p.cj = cj;
            const double xc = domain.x0 + ci * hx, yc = domain.y0 + cj * hy;
            const Rect omega{xc - hx, yc - hy, 2 * hx, 2 * hy};
            const Rect star{xc - half * hx, yc - half * hy, 2.0 * half * hx, 2.0 * half * hy};
            p.omega = omega.intersect(domain);
            p.omega_star = star.intersect(domain);
            const double tol = tolr;
            p.star_sides_on_domain = {std::abs(p.omega_star.x0 - domain.x0) < tol,
                                      std::abs(p.omega_star.x1() - domain.x1()) < tol,
                                      std::abs(p.omega_star.y0 - domain.y0) < tol,
                                      std::abs(p.omega_star.y1() - domain.y1()) < tol};
            const bool touches = ci <= 1 || ci >= m - 1 || cj <= 1 || cj >= m - 1;
            p.kind = touches ? PatchKind::Boundary : PatchKind::Interior;
            p.diam = p.omega.diam();
            out.cover.patches.push_back(p);
        }
    }

    // hat functions at the fine nodes of each support
    const int fx = fine->nx() / m, fy = fine->ny() / m; // fine elements per coarse cell
    Vec sum = Vec::Zero(fine->node_count());
    for (auto& p : out.cover.patches) {
        PartitionOfUnity::Support s;
        const int i0 = std::max(0, (p.ci - 1) * fx), i1 = std::min(fine->nx(), (p.ci + 1) * fx);
        const int j0 = std::max(0, (p.cj - 1) * fy), j1 = std::min(fine->ny(), (p.cj + 1) * fy);
        const double xc = domain.x0 + p.ci * hx, yc = domain.y0 + p.cj * hy;
        for (int j = j0; j <= j1; ++j) {
            for (int i = i0; i <= i1; ++i) {
                const int id = fine->node_id(i, j);
                const double tx = 1.0 - std::abs(fine->node_x(id) - xc) / hx;
                const double ty = 1.0 - std::abs(fine->node_y(id) - yc) / hy;
                const double phi = std::max(0.0, tx) * std::max(0.0, ty);
                s.nodes.push_back(id);
                s.phi.push_back(phi);
                sum[id] += phi;
            }
        }
        out.pu.supports.push_back(std::move(s));
    }

    out.pu.c1 = 1.0;
    out.pu.sum_defect = (sum.array() - 1.0).abs().maxCoeff();
    double c2 = 0.0;
    for (std::size_t pi = 0; pi < out.cover.patches.size(); ++pi) {
        NodalField phi = NodalField::zeros(fine);
        const auto& s = out.pu.supports[pi];
        for (std::size_t k = 0; k < s.nodes.size(); ++k) phi.values[s.nodes[k]] = s.phi[k];
        c2 = std::max(c2, max_gradient(phi) * out.cover.patches[pi].diam);
    }
    out.pu.c2 = c2;
    return out;
}

double max_gradient(const NodalField& u) {
    const Mesh& mesh = *u.mesh;
    double worst = 0.0;
    // bilinear gradients are extremal at element corners
    const std::array<std::pair<double, double>, 4> corners = {
        std::pair{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}};
    for (int e = 0; e < mesh.elem_count(); ++e) {
        if (!mesh.elem_active(e)) continue;
        const auto nodes = mesh.elem_nodes(e);
        for (const auto& [xi, eta] : corners) {
            const double dxi[4] = {-(1 - eta), (1 - eta), eta, -eta};
            const double deta[4] = {-(1 - xi), -xi, xi, (1 - xi)};
            double gx = 0, gy = 0;
            for (int i = 0; i < 4; ++i) {
                gx += u.values[nodes[i]] * dxi[i] / mesh.hx();
                gy += u.values[nodes[i]] * deta[i] / mesh.hy();
            }
            worst = std::max(worst, std::hypot(gx, gy));
        }
    }
    return worst;
}

} // namespace msgfem
