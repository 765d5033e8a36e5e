#pragma once

#include <memory>
#include <vector>

#include "msgfem/coefficient_field.hpp"
#include "msgfem/geometry.hpp"

namespace msgfem {

enum class Side { Left = 0, Right = 1, Bottom = 2, Top = 3 };

/// Free face of an active element: either on the outer boundary of the
/// computational region or on the boundary of an interior hole.
struct BoundaryEdge {
    int elem = -1;
    Side side = Side::Left;
    int n0 = -1, n1 = -1; // endpoint node ids, ordered along the edge
    double nx = 0.0, ny = 0.0;
    bool outer = false; // false: hole boundary (always natural / zero flux)
};

/// Structured bilinear-quad mesh aligned with a coefficient grid. Elements
/// carry a copy of their cell matrix; hole cells are inactive and never
/// assembled.
class Mesh {
  public:
    Mesh(Rect rect, int nx, int ny, const CoefficientField& field);

    const Rect& rect() const { return rect_; }
    int nx() const { return nx_; }
    int ny() const { return ny_; }
    double hx() const { return hx_; }
    double hy() const { return hy_; }
    int node_count() const { return (nx_ + 1) * (ny_ + 1); }
    int elem_count() const { return nx_ * ny_; }

    int node_id(int i, int j) const { return j * (nx_ + 1) + i; }
    int elem_id(int i, int j) const { return j * nx_ + i; }
    double node_x(int id) const { return rect_.x0 + (id % (nx_ + 1)) * hx_; }
    double node_y(int id) const { return rect_.y0 + (id / (nx_ + 1)) * hy_; }
    /// Corner nodes of an element, counter-clockwise from lower-left.
    std::array<int, 4> elem_nodes(int e) const {
        const int i = e % nx_, j = e / nx_;
        return {node_id(i, j), node_id(i + 1, j), node_id(i + 1, j + 1), node_id(i, j + 1)};
    }

    bool elem_active(int e) const { return elem_active_[e] != 0; }
    const SymMat2& elem_mat(int e) const { return elem_mat_[e]; }
    int active_elem_count() const { return active_elem_count_; }

    bool node_active(int id) const { return node_active_idx_[id] >= 0; }
    int active_index(int id) const { return node_active_idx_[id]; }
    const std::vector<int>& active_nodes() const { return active_nodes_; }

    const std::vector<BoundaryEdge>& free_edges() const { return free_edges_; }
    /// Node ids incident to outer free edges.
    std::vector<int> outer_boundary_nodes() const;
    /// Node ids incident to outer free edges lying on the given mesh side.
    std::vector<int> outer_boundary_nodes_on_sides(const std::array<bool, 4>& sides) const;
    double outer_perimeter() const { return outer_perimeter_; }

    bool elem_in_rect(int e, const Rect& r) const;
    /// True when the mesh side coincides with that side of rectangle `r`.
    bool side_on_rect(Side s, const Rect& r) const;

  private:
    void classify_boundary();

    Rect rect_;
    int nx_, ny_;
    double hx_, hy_;
    std::vector<SymMat2> elem_mat_;
    std::vector<std::uint8_t> elem_active_;
    int active_elem_count_ = 0;
    std::vector<int> node_active_idx_;
    std::vector<int> active_nodes_;
    std::vector<BoundaryEdge> free_edges_;
    double outer_perimeter_ = 0.0;
};

using MeshPtr = std::shared_ptr<const Mesh>;

MeshPtr build_mesh(Rect rect, int nx, int ny, const CoefficientField& field);

/// Element selection for norms, Gram matrices, and restricted assembly.
class Region {
  public:
    static Region all() { return Region{}; }
    static Region rect(const Rect& r) {
        Region reg;
        reg.rect_ = r;
        reg.kind_ = Kind::InRect;
        return reg;
    }
    static Region mask(std::vector<std::uint8_t> m) {
        Region reg;
        reg.mask_ = std::move(m);
        reg.kind_ = Kind::Mask;
        return reg;
    }
    /// Cells whose centers lie inside the disk.
    static Region disk(const Mesh& mesh, const Disk& d);

    bool contains(const Mesh& mesh, int e) const;
    void validate(const Mesh& mesh) const;

  private:
    enum class Kind { All, InRect, Mask } kind_ = Kind::All;
    Rect rect_{};
    std::vector<std::uint8_t> mask_;
};

} // namespace msgfem
