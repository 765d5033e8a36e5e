#pragma once

#include "msgfem/localspace.hpp"

namespace msgfem {

/// Periodic cell problem on the unit cell: correctors and the effective
/// matrix A0 = cell average of A (grad chi + I).
struct CellProblemResult {
    SymMat2 a0;
    NodalField corrector_x; // w^1, mean-zero periodic nodal field on the cell mesh
    NodalField corrector_y; // w^2
    double residual_rel = 0.0;
};

CellProblemResult cell_problem(const CoefficientField& unit_cell, int refine = 1);

/// Closed-form restriction eigenvalues for concentric ellipses adapted to a
/// constant diagonal A0: lambda_j = (r/r_star)^(2j), multiplicity 2 (cos/sin).
struct EllipseWidths {
    std::vector<double> lambda; // flattened descending, each value twice
    double d_n(int n) const;    // sqrt(lambda[n]) of the flattened list
};
EllipseWidths analytic_ellipse_widths(double r, double r_star, int n, const SymMat2& a0);

/// Patch geometry used by the homogenization sweeps.
struct SweepPatchSpec {
    bool ellipse = false;
    // rectangular: omega inside omega_star inside the field domain
    Rect omega;
    Rect omega_star;
    // elliptic: concentric masks centered in the field domain
    double r = 0.35;
    double r_star = 0.49;
    int snapshots = 24;
    int n = 4;
};

struct SweepRow {
    double eps;
    int i;              // eigenvalue index, 1-based
    double lambda_eps;
    double lambda_ref;  // constant-A0 run of the identical pipeline
    double deviation;   // |lambda_eps - lambda_ref|
};

struct SweepTable {
    SymMat2 a0;
    std::vector<double> lambda_ref;
    std::vector<SweepRow> rows; // eps strictly decreasing, then i
};

/// For each eps: tile the unit cell, build the patch, compute the optimal
/// restriction eigenvalues; reference from the constant-A0 run of the same
/// discrete pipeline.
SweepTable epsilon_sweep(const CoefficientField& unit_cell, const std::vector<double>& eps_list,
                         const Rect& domain, int resolution, const SweepPatchSpec& spec);

/// Q_eps^n: omega-energy of the last homogenized-trace function normalized to
/// unit omega*-energy.
double q_estimator(const PatchOperator& op, const LocalSpan& span);

} // namespace msgfem
