#pragma once

#include "msgfem/localspace.hpp"

namespace msgfem {

/// Overlapping cover of a rectangular domain built on an m-by-m coarse grid:
/// one patch per coarse node, omega = the 2x2 cell support of its hat
/// function, omega_star = the 6x6 cell oversampled block, both clipped.
struct CoverPatch {
    int index = 0;
    int ci = 0, cj = 0; // coarse node
    Rect omega;
    Rect omega_star;
    PatchKind kind = PatchKind::Interior;
    std::array<bool, 4> star_sides_on_domain{};
    double diam = 0.0; // diam(omega)
};

struct Cover {
    Rect domain;
    int m = 0;
    int star_cells = 6;
    int kappa = 4;
    std::vector<CoverPatch> patches;
};

/// Bilinear hat of each coarse node stored at the fine-mesh nodes of its
/// support, plus the measured PU constants.
struct PartitionOfUnity {
    struct Support {
        std::vector<int> nodes;  // global fine node ids, closure of omega
        std::vector<double> phi; // hat values there
    };
    std::vector<Support> supports;
    double c1 = 1.0;          // max |phi|
    double c2 = 0.0;          // max |grad phi| * diam(omega)
    double sum_defect = 0.0;  // max |sum phi - 1| over fine nodes
};

struct CoverAndPU {
    Cover cover;
    PartitionOfUnity pu;
};

CoverAndPU build_cover_and_pu(const Rect& domain, int m, const MeshPtr& fine, int star_cells = 6);

/// Max |grad u| over active-element Gauss points.
double max_gradient(const NodalField& u);

enum class BasisFamily { Polynomial, Optimal };

struct LocalSpaceSpec {
    BasisFamily family = BasisFamily::Optimal;
    int dim = 5;        // local dimension including the constant
    int snapshots = 0;  // 0: default max(3n, n+10)
    double rank_threshold = 1e-12;
};

/// Per-patch local basis mapped onto global fine-mesh nodes (the concurrent
/// patch job). Functions exclude the constant; the flag appends it globally.
struct PatchBasisGlobal {
    int patch_index = 0;
    std::vector<int> nodes; // global node ids on the closure of omega
    Mat funcs;              // nodes.size() x n_funcs
    bool includes_constant = true;
    bool has_particular = false;
    Vec particular;
    std::vector<double> lambda;
    double d_n_estimate = 1.0;
    bool d_n_available = false;
};

struct ProblemData {
    std::function<double(double, double)> f; // volume source (may be null)
    FluxFn g;                                // Neumann data on dOmega (may be null)
};

PatchBasisGlobal build_patch_basis(const CoefficientField& field, const Cover& cover,
                                   int patch_index, const Mesh& fine, const LocalSpaceSpec& spec,
                                   const ProblemData& data);

struct GlobalSolution {
    Vec coefficients;        // pruned global dofs
    NodalField fine;         // assembled fine-mesh solution (mean-zero)
    double residual_rel = 0.0;
    double energy = 0.0;
    int dofs = 0;
    int pruned_dofs = 0;
};

struct GlobalOptions {
    double prune_threshold = 1e-10;
    double residual_tol = 1e-9;
};

GlobalSolution solve_gfem(const MeshPtr& fine, const SparseSystem& k_fine,
                          const PartitionOfUnity& pu, const std::vector<PatchBasisGlobal>& bases,
                          const ProblemData& data, const GlobalOptions& opts = {});

/// Direct FEM reference on a refine_factor-finer mesh, injected back onto the
/// fine mesh at shared nodes; mean-zero.
NodalField overkill_reference(const Rect& domain, const CoefficientField& field,
                              const ProblemData& data, int fine_nx, int fine_ny,
                              int refine_factor, std::size_t unknown_cap = 8'000'000);

/// (relative energy error, relative L2 error) after mean alignment.
std::pair<double, double> global_error(const NodalField& u_ref, const NodalField& u_gfem);

struct LocalGlobalReport {
    double lhs_energy = 0.0;   // ||u0 - zeta||_E(Omega)
    double rhs_energy = 0.0;   // theorem bound with measured C1, C2
    double lhs_l2star = 0.0;   // ||u0 - zeta||_L2*(Omega)
    double rhs_l2star = 0.0;   // C1 (sum eps1^2)^(1/2)
    bool ok = false;
    std::vector<double> eps1, eps2;
};

/// Evaluates the local-to-global bound with the PU-blended best local
/// approximations of u0.
LocalGlobalReport verify_local_global_bound(const MeshPtr& fine, const SparseSystem& k_fine,
                                            const Cover& cover, const PartitionOfUnity& pu,
                                            const std::vector<PatchBasisGlobal>& bases,
                                            const NodalField& u0);

} // namespace msgfem
