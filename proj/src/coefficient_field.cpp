#include "msgfem/coefficient_field.hpp"

#include <cmath>

namespace msgfem {

namespace {

bool near_integer(double x, double tol = 1e-9) {
    return std::abs(x - std::round(x)) <= tol * std::max(1.0, std::abs(x));
}

int checked_cell_count(double extent, int res, const char* axis) {
    const double n = extent * res;
    if (res < 1) throw ValidationError(std::string("resolution must be >= 1 on ") + axis);
    if (extent <= 0.0) throw ValidationError(std::string("empty domain extent on ") + axis);
    if (!near_integer(n))
        throw ValidationError(std::string("domain extent times resolution is not integral on ") + axis);
    return static_cast<int>(std::llround(n));
}

} // namespace

SymMat2 SymMat2::rotated(double a, double d, double theta) {
    const double c = std::cos(theta), s = std::sin(theta);
    return {a * c * c + d * s * s, (a - d) * s * c, a * s * s + d * c * c};
}

std::pair<double, double> SymMat2::eigenvalues() const {
    const double tr = a11 + a22;
    const double disc = std::sqrt(std::max(0.0, (a11 - a22) * (a11 - a22) + 4.0 * a12 * a12));
    return {0.5 * (tr - disc), 0.5 * (tr + disc)};
}

CoefficientField::CoefficientField(Rect domain, int res_x, int res_y,
                                   std::vector<SymMat2> cells, std::vector<std::uint8_t> holes)
    : domain_(domain), res_x_(res_x), res_y_(res_y),
      ncx_(checked_cell_count(domain.width, res_x, "x")),
      ncy_(checked_cell_count(domain.height, res_y, "y")),
      cells_(std::move(cells)), holes_(std::move(holes)) {
    const std::size_t n = static_cast<std::size_t>(ncx_) * ncy_;
    if (cells_.size() != n) throw ValidationError("cell array size does not match grid");
    if (holes_.empty()) holes_.assign(n, 0);
    if (holes_.size() != n) throw ValidationError("hole mask size does not match grid");
    compute_bounds();
}

void CoefficientField::compute_bounds() {
    alpha_ = 0.0;
    beta_ = 0.0;
    any_hole_ = false;
    bool first = true;
    for (std::size_t i = 0; i < cells_.size(); ++i) {
        if (holes_[i]) {
            any_hole_ = true;
            continue;
        }
        if (!cells_[i].spd())
            throw ValidationError("non-SPD coefficient cell at index " + std::to_string(i));
        const auto [lo, hi] = cells_[i].eigenvalues();
        if (first) {
            alpha_ = lo;
            beta_ = hi;
            first = false;
        } else {
            alpha_ = std::min(alpha_, lo);
            beta_ = std::max(beta_, hi);
        }
    }
    if (first) throw ValidationError("field has no non-hole cells");
}

std::pair<int, int> CoefficientField::cell_of(double x, double y) const {
    int ix = static_cast<int>(std::floor((x - domain_.x0) * res_x_));
    int iy = static_cast<int>(std::floor((y - domain_.y0) * res_y_));
    ix = std::clamp(ix, 0, ncx_ - 1);
    iy = std::clamp(iy, 0, ncy_ - 1);
    return {ix, iy};
}

CoefficientField constant_field(const SymMat2& a0, Rect domain, int res_x, int res_y) {
    if (!a0.spd()) throw ValidationError("constant_field: matrix is not SPD");
    const int ncx = checked_cell_count(domain.width, res_x, "x");
    const int ncy = checked_cell_count(domain.height, res_y, "y");
    return CoefficientField(domain, res_x, res_y,
                            std::vector<SymMat2>(static_cast<std::size_t>(ncx) * ncy, a0));
}

CoefficientField periodic_field(const CoefficientField& unit_cell, double epsilon, Rect domain,
                                int res_x, int res_y) {
    if (!near_integer(1.0 / epsilon) || epsilon <= 0.0 || epsilon > 1.0)
        throw ValidationError("periodic_field: epsilon must be 1/ell for integer ell >= 1");
    const Rect& ud = unit_cell.domain();
    if (std::abs(ud.x0) > 1e-12 || std::abs(ud.y0) > 1e-12 || std::abs(ud.width - 1.0) > 1e-12 ||
        std::abs(ud.height - 1.0) > 1e-12)
        throw ValidationError("periodic_field: unit cell must live on [0,1]^2");
    // Cells per period must be an integer multiple of the unit-cell grid on
    // both axes; coefficients are copied, never interpolated.
    for (auto [res, ures, axis] :
         {std::tuple{res_x, unit_cell.res_x(), "x"}, std::tuple{res_y, unit_cell.res_y(), "y"}}) {
        const double per_period = res * epsilon;
        if (!near_integer(per_period) || !near_integer(per_period / ures))
            throw ValidationError(std::string("periodic_field: resolutions misaligned on ") + axis);
    }
    const int ncx = checked_cell_count(domain.width, res_x, "x");
    const int ncy = checked_cell_count(domain.height, res_y, "y");
    std::vector<SymMat2> cells(static_cast<std::size_t>(ncx) * ncy);
    const double hx = 1.0 / res_x, hy = 1.0 / res_y;
    for (int iy = 0; iy < ncy; ++iy) {
        for (int ix = 0; ix < ncx; ++ix) {
            const double x = domain.x0 + (ix + 0.5) * hx;
            const double y = domain.y0 + (iy + 0.5) * hy;
            double fx = std::fmod(x / epsilon, 1.0);
            double fy = std::fmod(y / epsilon, 1.0);
            if (fx < 0.0) fx += 1.0;
            if (fy < 0.0) fy += 1.0;
            const auto [ux, uy] = unit_cell.cell_of(fx, fy);
            if (unit_cell.is_hole(ux, uy))
                throw ValidationError("periodic_field: unit cells with holes are not supported");
            cells[static_cast<std::size_t>(iy) * ncx + ix] = unit_cell.cell(ux, uy);
        }
    }
    return CoefficientField(domain, res_x, res_y, std::move(cells));
}

CoefficientField inclusion_field(Rect domain, int res_x, int res_y, const std::vector<Disk>& disks,
                                 const SymMat2& matrix_value, const InclusionValue& inclusion_value) {
    if (!matrix_value.spd()) throw ValidationError("inclusion_field: matrix value is not SPD");
    if (!inclusion_value.is_hole && !inclusion_value.value.spd())
        throw ValidationError("inclusion_field: inclusion value is not SPD");
    for (std::size_t i = 0; i < disks.size(); ++i) {
        if (!disks[i].inside(domain))
            throw ValidationError("inclusion_field: disk " + std::to_string(i) + " outside domain");
        if (inclusion_value.is_hole) {
            for (std::size_t j = i + 1; j < disks.size(); ++j)
                if (disks[i].overlaps(disks[j]))
                    throw ValidationError("inclusion_field: hole disks " + std::to_string(i) +
                                          " and " + std::to_string(j) + " overlap");
        }
    }
    const int ncx = checked_cell_count(domain.width, res_x, "x");
    const int ncy = checked_cell_count(domain.height, res_y, "y");
    std::vector<SymMat2> cells(static_cast<std::size_t>(ncx) * ncy, matrix_value);
    std::vector<std::uint8_t> holes(cells.size(), 0);
    const double hx = 1.0 / res_x, hy = 1.0 / res_y;
    for (int iy = 0; iy < ncy; ++iy) {
        for (int ix = 0; ix < ncx; ++ix) {
            const double x = domain.x0 + (ix + 0.5) * hx;
            const double y = domain.y0 + (iy + 0.5) * hy;
            for (const Disk& d : disks) {
                if (!d.contains(x, y)) continue;
                const std::size_t k = static_cast<std::size_t>(iy) * ncx + ix;
                if (inclusion_value.is_hole)
                    holes[k] = 1;
                else
                    cells[k] = inclusion_value.value;
                break;
            }
        }
    }
    CoefficientField f(domain, res_x, res_y, std::move(cells), std::move(holes));
    f.layout_ = CoefficientField::Layout{disks, matrix_value, inclusion_value};
    return f;
}

CoefficientField clip_inclusions(const CoefficientField& field, const Rect& patch_boundary) {
    if (!field.domain().contains(patch_boundary, 1e-12))
        throw ValidationError("clip_inclusions: rectangle outside field domain");
    if (!field.layout_) return field;
    std::vector<Disk> kept;
    kept.reserve(field.layout_->disks.size());
    for (const Disk& d : field.layout_->disks)
        if (!d.intersects_boundary(patch_boundary)) kept.push_back(d);
    if (kept.size() == field.layout_->disks.size()) return field;
    return inclusion_field(field.domain(), field.res_x(), field.res_y(), kept,
                           field.layout_->matrix, field.layout_->inclusion);
}

std::pair<double, double> coercivity_bounds(const CoefficientField& field) {
    return {field.alpha(), field.beta()};
}

CoefficientField subfield(const CoefficientField& field, const Rect& rect) {
    const double ix0f = (rect.x0 - field.domain().x0) * field.res_x();
    const double iy0f = (rect.y0 - field.domain().y0) * field.res_y();
    const double nxf = rect.width * field.res_x();
    const double nyf = rect.height * field.res_y();
    for (double v : {ix0f, iy0f, nxf, nyf})
        if (std::abs(v - std::round(v)) > 1e-7)
            throw ValidationError("subfield: rectangle not aligned with the coefficient grid");
    const int ix0 = static_cast<int>(std::llround(ix0f));
    const int iy0 = static_cast<int>(std::llround(iy0f));
    const int nx = static_cast<int>(std::llround(nxf));
    const int ny = static_cast<int>(std::llround(nyf));
    if (ix0 < 0 || iy0 < 0 || ix0 + nx > field.cells_x() || iy0 + ny > field.cells_y())
        throw ValidationError("subfield: rectangle outside field domain");
    std::vector<SymMat2> cells(static_cast<std::size_t>(nx) * ny);
    std::vector<std::uint8_t> holes(cells.size(), 0);
    for (int iy = 0; iy < ny; ++iy)
        for (int ix = 0; ix < nx; ++ix) {
            cells[static_cast<std::size_t>(iy) * nx + ix] = field.cell(ix0 + ix, iy0 + iy);
            holes[static_cast<std::size_t>(iy) * nx + ix] = field.is_hole(ix0 + ix, iy0 + iy);
        }
    return CoefficientField(rect, field.res_x(), field.res_y(), std::move(cells), std::move(holes));
}

} // namespace msgfem
