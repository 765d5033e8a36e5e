#pragma once

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "msgfem/fem.hpp"

namespace msgfem {

struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Direct factorization of the mean-constrained pure-Neumann system
///   [K c; c^T 0] [u; mu] = [F; 0],  c = lumped L^2 weights.
/// Reusable across right-hand sides (one factorization per patch).
class NeumannSolver {
  public:
    NeumannSolver(MeshPtr mesh, const SparseSystem& stiffness);

    /// Requires |1^T load| <= tol * ||load|| (discrete consistency); returns
    /// the mean-zero solution with relative residual <= residual_tol.
    NodalField solve(const Vec& load) const;

    double consistency_tol = 1e-10;
    double residual_tol = 1e-10;
    /// Skip the consistency precheck and project the load instead (used for
    /// data known consistent up to quadrature roundoff).
    bool project_load = false;

    const Mesh& mesh() const { return *mesh_; }

  private:
    struct Impl;
    MeshPtr mesh_;
    std::vector<int> active_;
    Vec c_; // active-indexed mean weights
    std::shared_ptr<Impl> impl_;
    double knorm_ = 0.0;
};

/// Direct Cholesky-type factorization of the Dirichlet-reduced SPD system.
class DirichletSolver {
  public:
    DirichletSolver(MeshPtr mesh, const SparseSystem& stiffness,
                    const std::vector<int>& boundary_nodes);

    /// boundary_values indexed like boundary_nodes passed at construction.
    NodalField solve(const Vec& boundary_values, const Vec& load) const;

    double residual_tol = 1e-10;
    const Mesh& mesh() const { return *mesh_; }
    const std::vector<int>& boundary_nodes() const { return bnodes_; }

  private:
    MeshPtr mesh_;
    std::vector<int> bnodes_;
    std::vector<int> free_; // free active node ids
    std::vector<int> free_index_;
    SparseMat k_fb_;
    SparseMat kff_;
    Eigen::SimplicialLDLT<SparseMat> ldlt_;
    double knorm_ = 0.0;
};

NodalField solve_neumann(MeshPtr mesh, const SparseSystem& stiffness, const Vec& load);
NodalField solve_dirichlet(MeshPtr mesh, const SparseSystem& stiffness,
                           const std::vector<int>& boundary_nodes, const Vec& boundary_values,
                           const Vec& load);

struct HarmonicBC {
    enum class Kind { NeumannFlux, DirichletTrace } kind = Kind::NeumannFlux;
    // Neumann: flux density on the outer boundary edges in `edges`.
    std::function<double(double, double, double, double)> flux;
    EdgeSet edges = EdgeSet::all_outer();
    // Dirichlet: nodal trace evaluated at outer boundary nodes.
    std::function<double(double, double)> trace;
};

/// Discrete A-harmonic extension of the given boundary data (zero interior
/// residual); Neumann data is mean-corrected and the result normalized to
/// zero mean.
NodalField harmonic_extension(MeshPtr mesh, const SparseSystem& stiffness, const HarmonicBC& bc);

/// Max interior residual |K u|_i over active nodes not on the outer boundary
/// and not in `skip`, relative to ||K|| ||u||.
double interior_residual(const Mesh& mesh, const SparseSystem& stiffness, const NodalField& u,
                         const std::vector<int>& skip = {});

struct CaccioppoliResult {
    double lhs = 0.0; // ||u||_E(O)
    double rhs = 0.0; // (2 sqrt(beta) / delta) ||u||_L2(omega*)
    bool ok = false;
};

/// Checks the interior Caccioppoli bound for a discrete A-harmonic field on
/// its mesh; `inner` must keep distance delta from the outer boundary.
CaccioppoliResult caccioppoli_check(const NodalField& u, const SparseSystem& stiffness,
                                    const Region& inner, double beta, double delta,
                                    double harmonic_tol = 1e-8);

} // namespace msgfem
