#include "msgfem/homog.hpp"

#include <Eigen/SparseLU>
#include <cmath>

namespace msgfem {

CellProblemResult cell_problem(const CoefficientField& unit_cell, int refine) {
    const Rect& q = unit_cell.domain();
    if (std::abs(q.width - 1.0) > 1e-12 || std::abs(q.height - 1.0) > 1e-12)
        throw ValidationError("cell_problem: unit cell must be 1x1");
    if (unit_cell.has_holes())
        throw ValidationError("cell_problem: holes are not supported in the unit cell");

    const int nx = refine * unit_cell.cells_x();
    const int ny = refine * unit_cell.cells_y();
    const MeshPtr mesh = build_mesh(q, nx, ny, unit_cell);

    // periodic identification: right edge -> left, top edge -> bottom
    const int nper = nx * ny;
    std::vector<int> pid(mesh->node_count());
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i)
            pid[mesh->node_id(i, j)] = (j % ny) * nx + (i % nx);

    std::vector<Eigen::Triplet<double>> kt;
    Vec rhs1 = Vec::Zero(nper + 1), rhs2 = Vec::Zero(nper + 1);
    Vec c = Vec::Zero(nper);
    for (int e = 0; e < mesh->elem_count(); ++e) {
        const auto ke = element_stiffness(mesh->elem_mat(e), mesh->hx(), mesh->hy());
        const auto nodes = mesh->elem_nodes(e);
        for (int a = 0; a < 4; ++a) {
            for (int b = 0; b < 4; ++b) kt.emplace_back(pid[nodes[a]], pid[nodes[b]], ke[a][b]);
            c[pid[nodes[a]]] += 0.25 * mesh->hx() * mesh->hy();
        }
        // rhs_a = -integral (A e_k) . grad N_a ; grad N_a integrates exactly
        const auto& m = mesh->elem_mat(e);
        // integral of dN/dx over the element: +-hy/2; dN/dy: +-hx/2
        const double ix[4] = {-0.5 * mesh->hy(), 0.5 * mesh->hy(), 0.5 * mesh->hy(),
                              -0.5 * mesh->hy()};
        const double iy[4] = {-0.5 * mesh->hx(), -0.5 * mesh->hx(), 0.5 * mesh->hx(),
                              0.5 * mesh->hx()};
        for (int a = 0; a < 4; ++a) {
            rhs1[pid[nodes[a]]] -= m.a11 * ix[a] + m.a12 * iy[a];
            rhs2[pid[nodes[a]]] -= m.a12 * ix[a] + m.a22 * iy[a];
        }
    }
    for (int i = 0; i < nper; ++i) {
        kt.emplace_back(i, nper, c[i]);
        kt.emplace_back(nper, i, c[i]);
    }
    SparseMat aug(nper + 1, nper + 1);
    aug.setFromTriplets(kt.begin(), kt.end());
    Eigen::SparseLU<SparseMat> lu;
    lu.compute(aug);
    if (lu.info() != Eigen::Success)
        throw SolverError("cell_problem: singular periodic system");
    const Vec w1 = lu.solve(rhs1);
    const Vec w2 = lu.solve(rhs2);
    const double res = std::max((aug * w1 - rhs1).norm() / std::max(rhs1.norm(), 1e-300),
                                (aug * w2 - rhs2).norm() / std::max(rhs2.norm(), 1e-300));

    // expand periodic unknowns back to mesh nodes
    auto expand = [&](const Vec& w) {
        NodalField f = NodalField::zeros(mesh);
        for (int id = 0; id < mesh->node_count(); ++id) f.values[id] = w[pid[id]];
        return f;
    };
    CellProblemResult out;
    out.corrector_x = expand(w1);
    out.corrector_y = expand(w2);
    out.residual_rel = res;

    // A0_jk = integral A (grad w^j + e_j) . (grad w^k + e_k), evaluated with
    // the same quadrature as the stiffness
    double a11 = 0.0, a12 = 0.0, a22 = 0.0;
    const double g0 = 0.211324865405187118, g1 = 0.788675134594812882;
    const std::array<std::pair<double, double>, 4> gauss = {
        std::pair{g0, g0}, {g1, g0}, {g1, g1}, {g0, g1}};
    for (int e = 0; e < mesh->elem_count(); ++e) {
        const auto nodes = mesh->elem_nodes(e);
        const auto& m = mesh->elem_mat(e);
        for (const auto& [xi, eta] : gauss) {
            const double dxi[4] = {-(1 - eta), (1 - eta), eta, -eta};
            const double deta[4] = {-(1 - xi), -xi, xi, (1 - xi)};
            double g1x = 1.0, g1y = 0.0, g2x = 0.0, g2y = 1.0; // grad w^k + e_k
            for (int i = 0; i < 4; ++i) {
                g1x += out.corrector_x.values[nodes[i]] * dxi[i] / mesh->hx();
                g1y += out.corrector_x.values[nodes[i]] * deta[i] / mesh->hy();
                g2x += out.corrector_y.values[nodes[i]] * dxi[i] / mesh->hx();
                g2y += out.corrector_y.values[nodes[i]] * deta[i] / mesh->hy();
            }
            const double w = 0.25 * mesh->hx() * mesh->hy();
            a11 += w * (g1x * (m.a11 * g1x + m.a12 * g1y) + g1y * (m.a12 * g1x + m.a22 * g1y));
            a22 += w * (g2x * (m.a11 * g2x + m.a12 * g2y) + g2y * (m.a12 * g2x + m.a22 * g2y));
            a12 += w * (g1x * (m.a11 * g2x + m.a12 * g2y) + g1y * (m.a12 * g2x + m.a22 * g2y));
        }
    }
    out.a0 = SymMat2{a11, a12, a22};
    if (!out.a0.spd()) throw SolverError("cell_problem: effective matrix is not SPD");
    return out;
}

double EllipseWidths::d_n(int n) const {
    if (n < 0 || n >= static_cast<int>(lambda.size()))
        throw ValidationError("EllipseWidths::d_n: index out of range");
    return std::sqrt(lambda[n]);
}

EllipseWidths analytic_ellipse_widths(double r, double r_star, int n, const SymMat2& a0) {
    if (!(r > 0.0) || r >= r_star)
        throw ValidationError("analytic_ellipse_widths: need 0 < r < r_star");
    if (!a0.spd()) throw ValidationError("analytic_ellipse_widths: A0 must be SPD");
    EllipseWidths out;
    const double q = (r / r_star) * (r / r_star);
    double l = 1.0;
    for (int j = 1; j <= n; ++j) {
        l *= q; // (r/r*)^(2j)
        out.lambda.push_back(l);
        out.lambda.push_back(l); // cos/sin pair
    }
    return out;
}

namespace {

std::vector<double> patch_lambdas(const CoefficientField& field, const SweepPatchSpec& spec,
                                  const SymMat2& a0_for_masks) {
    PatchPair patch;
    if (spec.ellipse) {
        patch = make_ellipse_patch(field, a0_for_masks, field.domain().cx(), field.domain().cy(),
                                   spec.r, spec.r_star);
    } else {
        patch = make_rect_patch(field, spec.omega, spec.omega_star, field.domain());
    }
    PatchOperator op(patch);
    const auto snaps = snapshots_poly_neumann(op, spec.snapshots);
    OptimalBasisOptions obo;
    obo.n = spec.n;
    const LocalBasis basis = optimal_basis(op, snaps, obo);
    return basis.lambda;
}

} // namespace

SweepTable epsilon_sweep(const CoefficientField& unit_cell, const std::vector<double>& eps_list,
                         const Rect& domain, int resolution, const SweepPatchSpec& spec) {
    for (std::size_t i = 0; i + 1 < eps_list.size(); ++i)
        if (eps_list[i] <= eps_list[i + 1])
            throw ValidationError("epsilon_sweep: eps ladder must be strictly decreasing");

    SweepTable table;
    const CellProblemResult cell = cell_problem(unit_cell);
    table.a0 = cell.a0;

    const CoefficientField ref_field = constant_field(cell.a0, domain, resolution, resolution);
    table.lambda_ref = patch_lambdas(ref_field, spec, cell.a0);

    for (const double eps : eps_list) {
        const CoefficientField field = periodic_field(unit_cell, eps, domain, resolution, resolution);
        const auto lam = patch_lambdas(field, spec, cell.a0);
        for (int i = 0; i < spec.n; ++i) {
            SweepRow row;
            row.eps = eps;
            row.i = i + 1;
            row.lambda_eps = lam[i];
            row.lambda_ref = table.lambda_ref[i];
            row.deviation = std::abs(lam[i] - table.lambda_ref[i]);
            table.rows.push_back(row);
        }
    }
    return table;
}

double q_estimator(const PatchOperator& op, const LocalSpan& span) {
    if (span.funcs.empty()) throw ValidationError("q_estimator: empty span");
    const NodalField& u = span.funcs.back();
    const double t = u.values.dot(op.stiffness().matrix * u.values);
    const double s = u.values.dot(op.stiffness_omega().matrix * u.values);
    if (t <= 0.0) throw ValidationError("q_estimator: zero omega*-energy");
    return std::sqrt(std::max(0.0, s / t));
}

} // namespace msgfem
