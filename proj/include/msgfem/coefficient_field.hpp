#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "msgfem/geometry.hpp"

namespace msgfem {

/// Symmetric 2x2 conductivity matrix.
struct SymMat2 {
    double a11 = 1.0;
    double a12 = 0.0;
    double a22 = 1.0;

    static SymMat2 identity() { return {1.0, 0.0, 1.0}; }
    static SymMat2 isotropic(double a) { return {a, 0.0, a}; }
    static SymMat2 diagonal(double a, double d) { return {a, 0.0, d}; }
    /// R(theta) * diag(a, d) * R(theta)^T.
    static SymMat2 rotated(double a, double d, double theta);

    /// Closed-form eigenvalues, ascending.
    std::pair<double, double> eigenvalues() const;
    bool spd() const { return a11 > 0.0 && a22 > 0.0 && a11 * a22 - a12 * a12 > 0.0; }

    SymMat2 operator*(double s) const { return {a11 * s, a12 * s, a22 * s}; }
    bool operator==(const SymMat2& o) const = default;
};

/// Value assigned to inclusion cells: a material or an excluded hole.
struct InclusionValue {
    bool is_hole = true;
    SymMat2 value{};

    static InclusionValue hole() { return {true, {}}; }
    static InclusionValue material(const SymMat2& m) { return {false, m}; }
};

struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Cellwise-constant SPD coefficient field on a rectangle. Immutable after
/// construction; cells are squares of side 1/resolution, holes are excluded
/// from every assembled integral.
class CoefficientField {
  public:
    CoefficientField(Rect domain, int res_x, int res_y, std::vector<SymMat2> cells,
                     std::vector<std::uint8_t> holes = {});

    const Rect& domain() const { return domain_; }
    int res_x() const { return res_x_; }
    int res_y() const { return res_y_; }
    int cells_x() const { return ncx_; }
    int cells_y() const { return ncy_; }
    double cell_w() const { return 1.0 / res_x_; }
    double cell_h() const { return 1.0 / res_y_; }

    bool is_hole(int ix, int iy) const { return holes_[idx(ix, iy)] != 0; }
    const SymMat2& cell(int ix, int iy) const { return cells_[idx(ix, iy)]; }
    /// Cell containing the point (clamped to the grid).
    std::pair<int, int> cell_of(double x, double y) const;

    double alpha() const { return alpha_; }
    double beta() const { return beta_; }
    bool has_holes() const { return any_hole_; }

    /// Inclusion layout metadata, kept so clip_inclusions can rebuild cells.
    struct Layout {
        std::vector<Disk> disks;
        SymMat2 matrix;
        InclusionValue inclusion;
    };
    const std::optional<Layout>& layout() const { return layout_; }

    friend CoefficientField inclusion_field(Rect, int, int, const std::vector<Disk>&,
                                            const SymMat2&, const InclusionValue&);
    friend CoefficientField clip_inclusions(const CoefficientField&, const Rect&);

  private:
    int idx(int ix, int iy) const { return iy * ncx_ + ix; }
    void compute_bounds();

    Rect domain_;
    int res_x_, res_y_;
    int ncx_, ncy_;
    std::vector<SymMat2> cells_;
    std::vector<std::uint8_t> holes_;
    std::optional<Layout> layout_;
    double alpha_ = 0.0, beta_ = 0.0;
    bool any_hole_ = false;
};

CoefficientField constant_field(const SymMat2& a0, Rect domain, int res_x, int res_y);

/// Tile a unit-cell field with period epsilon = 1/ell; resolutions must align
/// so that no coefficient is ever interpolated.
CoefficientField periodic_field(const CoefficientField& unit_cell, double epsilon,
                                Rect domain, int res_x, int res_y);

CoefficientField inclusion_field(Rect domain, int res_x, int res_y,
                                 const std::vector<Disk>& disks, const SymMat2& matrix_value,
                                 const InclusionValue& inclusion_value);

/// Replace every disk that crosses `patch_boundary`'s boundary with matrix
/// material. No-op on fields without an inclusion layout.
CoefficientField clip_inclusions(const CoefficientField& field, const Rect& patch_boundary);

/// (alpha, beta) over non-hole cells.
std::pair<double, double> coercivity_bounds(const CoefficientField& field);

/// Restriction of a field to an aligned sub-rectangle (same resolution).
CoefficientField subfield(const CoefficientField& field, const Rect& rect);

} // namespace msgfem
