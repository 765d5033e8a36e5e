#include "msgfem/patch.hpp"

#include <cmath>

namespace msgfem {

namespace {

Rect snap_to_cells(const CoefficientField& field, const Rect& r, bool outward) {
    const double cw = field.cell_w(), ch = field.cell_h();
    const Rect& d = field.domain();
    auto snap = [&](double v, double origin, double step, bool down) {
        const double t = (v - origin) / step;
        const double s = down ? std::floor(t + 1e-9) : std::ceil(t - 1e-9);
        return origin + s * step;
    };
    double x0 = snap(r.x0, d.x0, cw, outward);
    double x1 = snap(r.x1(), d.x0, cw, !outward);
    double y0 = snap(r.y0, d.y0, ch, outward);
    double y1 = snap(r.y1(), d.y0, ch, !outward);
    x0 = std::max(x0, d.x0);
    y0 = std::max(y0, d.y0);
    x1 = std::min(x1, d.x1());
    y1 = std::min(y1, d.y1());
    return Rect{x0, y0, x1 - x0, y1 - y0};
}

} // namespace

PatchPair make_rect_patch(const CoefficientField& field, Rect omega, Rect omega_star,
                          const Rect& domain, int refine, bool clip_fibers) {
    PatchPair p;
    p.omega = snap_to_cells(field, omega.intersect(domain), true);
    p.omega_star = snap_to_cells(field, omega_star.intersect(domain), true);
    if (!p.omega_star.contains(p.omega, 1e-12))
        throw ValidationError("make_rect_patch: omega not inside omega_star");
    const double tol = 1e-9 * domain.diam();
    p.star_sides_on_domain = {std::abs(p.omega_star.x0 - domain.x0) < tol,
                              std::abs(p.omega_star.x1() - domain.x1()) < tol,
                              std::abs(p.omega_star.y0 - domain.y0) < tol,
                              std::abs(p.omega_star.y1() - domain.y1()) < tol};
    const bool omega_touches = std::abs(p.omega.x0 - domain.x0) < tol ||
                               std::abs(p.omega.x1() - domain.x1()) < tol ||
                               std::abs(p.omega.y0 - domain.y0) < tol ||
                               std::abs(p.omega.y1() - domain.y1()) < tol;
    p.kind = omega_touches ? PatchKind::Boundary : PatchKind::Interior;

    CoefficientField local = clip_fibers ? clip_inclusions(field, p.omega_star) : field;
    p.field = std::make_shared<const CoefficientField>(subfield(local, p.omega_star));
    const int nx = refine * static_cast<int>(std::llround(p.omega_star.width * field.res_x()));
    const int ny = refine * static_cast<int>(std::llround(p.omega_star.height * field.res_y()));
    p.mesh = build_mesh(p.omega_star, nx, ny, *p.field);
    p.omega_region = Region::rect(p.omega);
    // separation between the inner and outer boundaries relative to omega
    p.rho = 2.0 *
            std::min({p.omega.x0 - p.omega_star.x0, p.omega_star.x1() - p.omega.x1(),
                      p.omega.y0 - p.omega_star.y0, p.omega_star.y1() - p.omega.y1()}) /
            std::max(p.omega.width, p.omega.height);
    return p;
}

PatchPair make_ellipse_patch(const CoefficientField& field, const SymMat2& a0, double cx,
                             double cy, double r, double r_star, int refine) {
    if (!(r > 0.0) || r >= r_star)
        throw ValidationError("make_ellipse_patch: need 0 < r < r_star");
    // eigenbasis of a0: rotation angle and axis ratio b = a2/a1
    double theta = 0.0;
    if (std::abs(a0.a12) > 1e-14 || std::abs(a0.a11 - a0.a22) > 1e-14)
        theta = 0.5 * std::atan2(2.0 * a0.a12, a0.a11 - a0.a22);
    const double c = std::cos(theta), s = std::sin(theta);
    const double a1 = a0.a11 * c * c + 2.0 * a0.a12 * s * c + a0.a22 * s * s;
    const double a2 = a0.a11 * s * s - 2.0 * a0.a12 * s * c + a0.a22 * c * c;
    const double b = a2 / a1;

    auto metric = [=](double x, double y) {
        const double dx = x - cx, dy = y - cy;
        const double y1 = c * dx + s * dy;
        const double y2 = -s * dx + c * dy;
        return y1 * y1 + y2 * y2 / b;
    };
    // bounding box of the outer ellipse in the original coordinates
    const double ex = r_star * std::sqrt(c * c + b * s * s);
    const double ey = r_star * std::sqrt(s * s + b * c * c);
    PatchPair p;
    p.omega_star = snap_to_cells(field, Rect{cx - ex, cy - ey, 2 * ex, 2 * ey}, true);
    p.omega = p.omega_star; // bounding rect only; the masks carry the geometry
    p.kind = PatchKind::Interior;

    const CoefficientField sub = subfield(field, p.omega_star);
    const int nx = refine * static_cast<int>(std::llround(p.omega_star.width * field.res_x()));
    const int ny = refine * static_cast<int>(std::llround(p.omega_star.height * field.res_y()));
    // exclude cells outside the outer mask by marking them as holes
    std::vector<SymMat2> cells;
    std::vector<std::uint8_t> holes;
    const int ncx = sub.cells_x(), ncy = sub.cells_y();
    cells.reserve(static_cast<std::size_t>(ncx) * ncy);
    for (int j = 0; j < ncy; ++j)
        for (int i = 0; i < ncx; ++i) {
            cells.push_back(sub.cell(i, j));
            const double x = sub.domain().x0 + (i + 0.5) * sub.cell_w();
            const double y = sub.domain().y0 + (j + 0.5) * sub.cell_h();
            const bool outside = metric(x, y) > r_star * r_star;
            holes.push_back(outside || sub.is_hole(i, j) ? 1 : 0);
        }
    p.field = std::make_shared<const CoefficientField>(p.omega_star, sub.res_x(), sub.res_y(),
                                                       std::move(cells), std::move(holes));
    p.mesh = build_mesh(p.omega_star, nx, ny, *p.field);

    std::vector<std::uint8_t> inner(p.mesh->elem_count(), 0);
    for (int e = 0; e < p.mesh->elem_count(); ++e) {
        const int i = e % p.mesh->nx(), j = e / p.mesh->nx();
        const double x = p.omega_star.x0 + (i + 0.5) * p.mesh->hx();
        const double y = p.omega_star.y0 + (j + 0.5) * p.mesh->hy();
        inner[e] = metric(x, y) <= r * r ? 1 : 0;
    }
    p.omega_region = Region::mask(std::move(inner));
    p.rho = r_star / r - 1.0;
    return p;
}

std::vector<int> embed_nodes(const Mesh& sub, const Mesh& super) {
    const double tol = 1e-9 * std::max(super.hx(), super.hy());
    if (std::abs(sub.hx() - super.hx()) > tol || std::abs(sub.hy() - super.hy()) > tol)
        throw ValidationError("embed_nodes: meshes have different spacing");
    const double fx = (sub.rect().x0 - super.rect().x0) / super.hx();
    const double fy = (sub.rect().y0 - super.rect().y0) / super.hy();
    const int ox = static_cast<int>(std::llround(fx));
    const int oy = static_cast<int>(std::llround(fy));
    if (std::abs(fx - ox) > 1e-6 || std::abs(fy - oy) > 1e-6)
        throw ValidationError("embed_nodes: meshes not aligned");
    if (ox < 0 || oy < 0 || ox + sub.nx() > super.nx() || oy + sub.ny() > super.ny())
        throw ValidationError("embed_nodes: sub mesh not inside super mesh");
    std::vector<int> map(sub.node_count());
    for (int j = 0; j <= sub.ny(); ++j)
        for (int i = 0; i <= sub.nx(); ++i)
            map[sub.node_id(i, j)] = super.node_id(i + ox, j + oy);
    return map;
}

} // namespace msgfem
