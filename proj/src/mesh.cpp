#include "msgfem/mesh.hpp"

#include <array>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace msgfem {

Mesh::Mesh(Rect rect, int nx, int ny, const CoefficientField& field)
    : rect_(rect), nx_(nx), ny_(ny), hx_(rect.width / nx), hy_(rect.height / ny) {
    if (nx < 1 || ny < 1) throw ValidationError("build_mesh: element counts must be >= 1");
    if (!field.domain().contains(rect, 1e-9 * rect.diam()))
        throw ValidationError("build_mesh: mesh rectangle outside field domain");

    elem_mat_.resize(static_cast<std::size_t>(nx) * ny);
    elem_active_.resize(elem_mat_.size(), 1);
    const double tol = 1e-9 * std::max(hx_, hy_);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const double ex0 = rect.x0 + i * hx_, ey0 = rect.y0 + j * hy_;
            const double cx = ex0 + 0.5 * hx_, cy = ey0 + 0.5 * hy_;
            const auto [ci, cj] = field.cell_of(cx, cy);
            // Each element must sit inside exactly one coefficient cell.
            const Rect cell_rect{field.domain().x0 + ci * field.cell_w(),
                                 field.domain().y0 + cj * field.cell_h(), field.cell_w(),
                                 field.cell_h()};
            if (!cell_rect.contains(Rect{ex0, ey0, hx_, hy_}, tol))
                throw ValidationError("build_mesh: element grid misaligned with coefficient cells");
            const int e = elem_id(i, j);
            if (field.is_hole(ci, cj)) {
                elem_active_[e] = 0;
            } else {
                elem_mat_[e] = field.cell(ci, cj);
            }
        }
    }
    for (auto a : elem_active_) active_elem_count_ += a;
    if (active_elem_count_ == 0) throw ValidationError("build_mesh: no active elements");

    node_active_idx_.assign(node_count(), -1);
    for (int e = 0; e < elem_count(); ++e) {
        if (!elem_active_[e]) continue;
        for (int n : elem_nodes(e)) node_active_idx_[n] = 0;
    }
    for (int id = 0; id < node_count(); ++id) {
        if (node_active_idx_[id] == 0) {
            node_active_idx_[id] = static_cast<int>(active_nodes_.size());
            active_nodes_.push_back(id);
        }
    }
    classify_boundary();
}

void Mesh::classify_boundary() {
    // Inactive cells connected to the mesh frame form the "outside"; the rest
    // are holes with natural boundary conditions.
    std::vector<std::uint8_t> outside(elem_count(), 0);
    std::deque<int> queue;
    auto push_if_inactive = [&](int i, int j) {
        if (i < 0 || j < 0 || i >= nx_ || j >= ny_) return;
        const int e = elem_id(i, j);
        if (!elem_active_[e] && !outside[e]) {
            outside[e] = 1;
            queue.push_back(e);
        }
    };
    for (int i = 0; i < nx_; ++i) {
        push_if_inactive(i, 0);
        push_if_inactive(i, ny_ - 1);
    }
    for (int j = 0; j < ny_; ++j) {
        push_if_inactive(0, j);
        push_if_inactive(nx_ - 1, j);
    }
    while (!queue.empty()) {
        const int e = queue.front();
        queue.pop_front();
        const int i = e % nx_, j = e / nx_;
        push_if_inactive(i - 1, j);
        push_if_inactive(i + 1, j);
        push_if_inactive(i, j - 1);
        push_if_inactive(i, j + 1);
    }

    auto neighbor_state = [&](int i, int j) -> int {
        // 0 = active, 1 = outside (or frame), 2 = hole
        if (i < 0 || j < 0 || i >= nx_ || j >= ny_) return 1;
        const int e = elem_id(i, j);
        if (elem_active_[e]) return 0;
        return outside[e] ? 1 : 2;
    };

    for (int j = 0; j < ny_; ++j) {
        for (int i = 0; i < nx_; ++i) {
            const int e = elem_id(i, j);
            if (!elem_active_[e]) continue;
            const auto nodes = elem_nodes(e);
            const std::array<std::tuple<Side, int, int, int, int, double, double>, 4> faces = {
                std::tuple{Side::Left, i - 1, j, nodes[0], nodes[3], -1.0, 0.0},
                std::tuple{Side::Right, i + 1, j, nodes[1], nodes[2], 1.0, 0.0},
                std::tuple{Side::Bottom, i, j - 1, nodes[0], nodes[1], 0.0, -1.0},
                std::tuple{Side::Top, i, j + 1, nodes[3], nodes[2], 0.0, 1.0}};
            for (const auto& [side, ni, nj, a, b, nx, ny] : faces) {
                const int state = neighbor_state(ni, nj);
                if (state == 0) continue;
                BoundaryEdge edge;
                edge.elem = e;
                edge.side = side;
                edge.n0 = a;
                edge.n1 = b;
                edge.nx = nx;
                edge.ny = ny;
                edge.outer = (state == 1);
                free_edges_.push_back(edge);
                if (edge.outer)
                    outer_perimeter_ += (side == Side::Left || side == Side::Right) ? hy_ : hx_;
            }
        }
    }
}

std::vector<int> Mesh::outer_boundary_nodes() const {
    std::vector<std::uint8_t> mark(node_count(), 0);
    for (const auto& e : free_edges_) {
        if (!e.outer) continue;
        mark[e.n0] = 1;
        mark[e.n1] = 1;
    }
    std::vector<int> out;
    for (int id = 0; id < node_count(); ++id)
        if (mark[id]) out.push_back(id);
    return out;
}

std::vector<int> Mesh::outer_boundary_nodes_on_sides(const std::array<bool, 4>& sides) const {
    const double tol = 1e-9 * std::max(hx_, hy_);
    std::vector<std::uint8_t> mark(node_count(), 0);
    for (const auto& e : free_edges_) {
        if (!e.outer) continue;
        for (int n : {e.n0, e.n1}) {
            const double x = node_x(n), y = node_y(n);
            const bool on = (sides[0] && std::abs(x - rect_.x0) < tol) ||
                            (sides[1] && std::abs(x - rect_.x1()) < tol) ||
                            (sides[2] && std::abs(y - rect_.y0) < tol) ||
                            (sides[3] && std::abs(y - rect_.y1()) < tol);
            if (on) mark[n] = 1;
        }
    }
    std::vector<int> out;
    for (int id = 0; id < node_count(); ++id)
        if (mark[id]) out.push_back(id);
    return out;
}

bool Mesh::elem_in_rect(int e, const Rect& r) const {
    const int i = e % nx_, j = e / nx_;
    const Rect er{rect_.x0 + i * hx_, rect_.y0 + j * hy_, hx_, hy_};
    return r.contains(er, 1e-9 * std::max(hx_, hy_));
}

bool Mesh::side_on_rect(Side s, const Rect& r) const {
    const double tol = 1e-9 * rect_.diam();
    switch (s) {
    case Side::Left: return std::abs(rect_.x0 - r.x0) < tol;
    case Side::Right: return std::abs(rect_.x1() - r.x1()) < tol;
    case Side::Bottom: return std::abs(rect_.y0 - r.y0) < tol;
    case Side::Top: return std::abs(rect_.y1() - r.y1()) < tol;
    }
    return false;
}

MeshPtr build_mesh(Rect rect, int nx, int ny, const CoefficientField& field) {
    return std::make_shared<Mesh>(rect, nx, ny, field);
}

Region Region::disk(const Mesh& mesh, const Disk& d) {
    std::vector<std::uint8_t> m(mesh.elem_count(), 0);
    for (int e = 0; e < mesh.elem_count(); ++e) {
        const int i = e % mesh.nx(), j = e / mesh.nx();
        const double cx = mesh.rect().x0 + (i + 0.5) * mesh.hx();
        const double cy = mesh.rect().y0 + (j + 0.5) * mesh.hy();
        m[e] = d.contains(cx, cy) ? 1 : 0;
    }
    return Region::mask(std::move(m));
}

bool Region::contains(const Mesh& mesh, int e) const {
    switch (kind_) {
    case Kind::All: return true;
    case Kind::InRect: return mesh.elem_in_rect(e, rect_);
    case Kind::Mask: return mask_[e] != 0;
    }
    return false;
}

void Region::validate(const Mesh& mesh) const {
    if (kind_ == Kind::InRect && !mesh.rect().contains(rect_, 1e-9 * mesh.rect().diam()))
        throw ValidationError("region rectangle outside mesh");
    if (kind_ == Kind::Mask && mask_.size() != static_cast<std::size_t>(mesh.elem_count()))
        throw ValidationError("region mask size does not match mesh");
}

} // namespace msgfem
