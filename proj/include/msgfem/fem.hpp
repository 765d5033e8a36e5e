#pragma once

#include <Eigen/Sparse>
#include <functional>
#include <memory>

#include "msgfem/mesh.hpp"

namespace msgfem {

using SparseMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

/// One real value per mesh node; inactive nodes carry zeros.
struct NodalField {
    MeshPtr mesh;
    Vec values;

    NodalField() = default;
    NodalField(MeshPtr m, Vec v) : mesh(std::move(m)), values(std::move(v)) {}
    static NodalField zeros(MeshPtr m) {
        const int n = m->node_count();
        return NodalField(std::move(m), Vec::Zero(n));
    }
    /// Sample a function at the nodes (inactive nodes included).
    static NodalField sample(MeshPtr m, const std::function<double(double, double)>& f);
};

/// Assembled symmetric bilinear form plus the optional mean-value constraint
/// used to quotient out constants on pure-Neumann problems.
struct SparseSystem {
    SparseMat matrix;   // full node indexing, inactive rows empty
    Vec mean_weights;   // lumped L^2 weights (M*1); empty when unused
};

/// Element stiffness for a constant matrix on an hx-by-hy bilinear quad.
std::array<std::array<double, 4>, 4> element_stiffness(const SymMat2& a, double hx, double hy);
std::array<std::array<double, 4>, 4> element_mass(double weight, double hx, double hy);

SparseSystem assemble_stiffness(const Mesh& mesh, const Region& region = Region::all());
/// Weighted mass matrix; `cell_weight` maps element id to a nonnegative weight.
SparseSystem assemble_weighted_mass(const Mesh& mesh,
                                    const std::function<double(int)>& cell_weight,
                                    const Region& region = Region::all());

/// Lumped L^2 weights over active elements (row sums of the unit mass matrix).
Vec mean_weights(const Mesh& mesh);
/// Area-weighted mean of a nodal field over the active region.
double field_mean(const NodalField& u);

Vec assemble_volume_load(const Mesh& mesh, const std::function<double(double, double)>& f);

/// Which outer free edges receive boundary data. Hole edges never do.
enum class EdgeSelect { AllOuter, OnSides, NotOnSides };

struct EdgeSet {
    EdgeSelect select = EdgeSelect::AllOuter;
    std::array<bool, 4> sides{false, false, false, false}; // L, R, B, T
    static EdgeSet all_outer() { return {}; }
    static EdgeSet on_sides(std::array<bool, 4> s) { return {EdgeSelect::OnSides, s}; }
    static EdgeSet not_on_sides(std::array<bool, 4> s) { return {EdgeSelect::NotOnSides, s}; }
};

/// flux(x, y, nx, ny) integrated against the edge trace shape functions with
/// Gauss-Legendre quadrature (degree <= 2*points-1 exact per edge).
Vec assemble_boundary_load(const Mesh& mesh, const EdgeSet& edges,
                           const std::function<double(double, double, double, double)>& flux,
                           int gauss_points = 8);
/// Integral of the flux over the selected edges (consistency bookkeeping).
double boundary_flux_total(const Mesh& mesh, const EdgeSet& edges,
                           const std::function<double(double, double, double, double)>& flux,
                           int gauss_points = 8);

enum class NormKind { Energy, L2, L2Star };

double norm(const NodalField& u, NormKind kind, const Region& region = Region::all());
/// Energy inner product over a region (exact per-element quadrature).
double energy_inner(const NodalField& u, const NodalField& v,
                    const Region& region = Region::all());

} // namespace msgfem
