#pragma once

#include <functional>
#include <optional>
#include <string>

#include "msgfem/patch.hpp"
#include "msgfem/solver.hpp"
#include "msgfem/spectral.hpp"

namespace msgfem {

/// Mean-zero discrete A-harmonic function on a patch mesh.
struct Snapshot {
    std::string label;
    NodalField field;
};

/// Ordered span of local functions on a patch mesh; best-approximation
/// queries go through the (rank-filtered) energy Gram on a region.
struct LocalSpan {
    std::vector<NodalField> funcs;
};

struct LocalBasis {
    std::vector<double> lambda;    // descending, full retained spectrum
    std::vector<NodalField> funcs; // top-n eigenfunctions (nodal on the patch mesh)
    int n = 0;
    double d_n_estimate = 1.0;     // sqrt(lambda_{n+1}); 1 when no oversampling gap
    bool d_n_available = false;
    bool includes_constant = false;
    std::optional<NodalField> particular;

    LocalSpan span() const {
        LocalSpan s;
        s.funcs = funcs;
        return s;
    }
};

/// Shared per-patch assembly/factorization state, reused by every snapshot
/// and particular-solution solve on the same patch.
class PatchOperator {
  public:
    explicit PatchOperator(const PatchPair& patch);

    const PatchPair& patch() const { return *patch_; }
    const SparseSystem& stiffness() const { return k_; }
    const SparseSystem& stiffness_omega() const { return k_omega_; }
    const NeumannSolver& neumann() const { return *neumann_; }

    /// Snapshot-Gram restriction pencil over (omega, omega_star).
    ReducedPencil pencil(const std::vector<Snapshot>& snapshots) const;

  private:
    const PatchPair* patch_;
    SparseSystem k_;
    SparseSystem k_omega_;
    std::shared_ptr<NeumannSolver> neumann_;
};

using FluxFn = std::function<double(double, double, double, double)>;

/// A-harmonic snapshots with Neumann data from normal derivatives of the
/// harmonic polynomials (degree 1..ceil(M/2), Re/Im pairs), centered at the
/// patch center; data imposed away from dOmega and mean-corrected there.
std::vector<Snapshot> snapshots_poly_neumann(const PatchOperator& op, int m);

struct NeumannModes {
    std::vector<double> values; // ascending, first n non-constant Ritz values
    std::vector<NodalField> fields;
};
/// First n non-constant Neumann eigenmodes of (K, M) on the patch mesh,
/// approximated by Rayleigh-Ritz on a tensor-cosine subspace.
NeumannModes neumann_eigenmodes(const MeshPtr& mesh, int n);

/// W_n family: Dirichlet traces of the Neumann modes, A-harmonically
/// extended inward, mean-zero.
std::vector<Snapshot> snapshots_neumann_eigen(const PatchOperator& op, int n);

struct OptimalBasisOptions {
    int n = 4;
    double rank_threshold = 1e-12;
    bool include_constant = true;
    const FluxFn* boundary_flux = nullptr; // g on dOmega; builds the particular solution
};

/// The n-width eigenbasis on the snapshot span: Grams over (omega, omega*),
/// pencil solve, top-n restriction, d_n estimate = sqrt(lambda_{n+1}).
LocalBasis optimal_basis(const PatchOperator& op, const std::vector<Snapshot>& snapshots,
                         const OptimalBasisOptions& opts);

/// Particular solution for boundary data: n.A grad u = g on the dOmega sides,
/// u = 0 on the rest of the patch boundary.
NodalField boundary_particular_solution(const PatchOperator& op, const FluxFn& g);

/// Particular solution for a source: -div(A grad u) = f with the constant
/// compensating flux on the outer patch boundary, mean-zero.
NodalField particular_solution_source(const PatchOperator& op,
                                      const std::function<double(double, double)>& f);

/// Iterated space T(m) = sum of F_n over the nested rectangles between omega
/// and omega_star (interior rectangular patches only).
LocalSpan iterated_space(const PatchOperator& op, int n, int levels);

enum class TraceKind { Dirichlet, Neumann };

/// Span of A-eps-harmonic extensions of the A0-harmonic polynomial traces.
LocalSpan homogenized_trace_space(const PatchOperator& op, const SymMat2& a0, int n,
                                  TraceKind trace = TraceKind::Dirichlet);

/// Energy-orthogonal projection error ||u - proj||_E(region); exact
/// minimization over the rank-filtered span Gram.
double best_approx_error(const NodalField& u, const LocalSpan& span, const Region& region,
                         const SparseSystem& stiffness_region);

/// CSV export of eigenvalues, d_n estimate, and nodal coefficients.
void export_basis_csv(const LocalBasis& basis, const std::string& path);

} // namespace msgfem
