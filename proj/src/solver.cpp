#include "msgfem/solver.hpp"

#include <algorithm>
#include <cmath>

namespace msgfem {

namespace {

double matrix_inf_norm(const SparseMat& k) {
    double m = 0.0;
    for (int c = 0; c < k.outerSize(); ++c)
        for (SparseMat::InnerIterator it(k, c); it; ++it) m = std::max(m, std::abs(it.value()));
    return m;
}

Vec gather(const Vec& full, const std::vector<int>& ids, int extra = 0) {
    Vec out = Vec::Zero(static_cast<int>(ids.size()) + extra);
    for (std::size_t i = 0; i < ids.size(); ++i) out[static_cast<int>(i)] = full[ids[i]];
    return out;
}

} // namespace

struct NeumannSolver::Impl {
    SparseMat aug;
    Eigen::SparseLU<SparseMat> lu;
};

NeumannSolver::NeumannSolver(MeshPtr mesh, const SparseSystem& stiffness)
    : mesh_(std::move(mesh)), active_(mesh_->active_nodes()), impl_(std::make_shared<Impl>()) {
    const int n = static_cast<int>(active_.size());
    c_ = gather(mean_weights(*mesh_), active_);
    knorm_ = matrix_inf_norm(stiffness.matrix);

    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(stiffness.matrix.nonZeros() + 2 * static_cast<std::size_t>(n));
    for (int col = 0; col < stiffness.matrix.outerSize(); ++col) {
        const int jc = mesh_->active_index(col);
        if (jc < 0) continue;
        for (SparseMat::InnerIterator it(stiffness.matrix, col); it; ++it) {
            const int ir = mesh_->active_index(static_cast<int>(it.row()));
            if (ir >= 0) trips.emplace_back(ir, jc, it.value());
        }
    }
    for (int i = 0; i < n; ++i) {
        trips.emplace_back(i, n, c_[i]);
        trips.emplace_back(n, i, c_[i]);
    }
    impl_->aug.resize(n + 1, n + 1);
    impl_->aug.setFromTriplets(trips.begin(), trips.end());
    impl_->lu.compute(impl_->aug);
    if (impl_->lu.info() != Eigen::Success)
        throw SolverError("solve_neumann: singular factorization of the constrained system");
}

NodalField NeumannSolver::solve(const Vec& load) const {
    const int n = static_cast<int>(active_.size());
    Vec rhs = gather(load, active_, 1);
    const double lnorm = rhs.head(n).norm();
    const double defect = rhs.head(n).sum();
    if (project_load) {
        if (lnorm > 0.0) rhs.head(n).array() -= defect / n;
    } else if (std::abs(defect) > consistency_tol * std::max(lnorm, knorm_)) {
        throw SolverError("solve_neumann: inconsistent Neumann data, defect = " +
                          std::to_string(defect));
    }
    rhs[n] = 0.0;
    const Vec sol = impl_->lu.solve(rhs);
    if (impl_->lu.info() != Eigen::Success)
        throw SolverError("solve_neumann: back substitution failed");

    const double res = (impl_->aug * sol - rhs).norm();
    const double scale = std::max({lnorm, knorm_ * sol.head(n).norm(), 1e-300});
    if (res > residual_tol * scale)
        throw SolverError("solve_neumann: residual " + std::to_string(res / scale) +
                          " above tolerance");

    NodalField u = NodalField::zeros(mesh_);
    for (int i = 0; i < n; ++i) u.values[active_[i]] = sol[i];
    // The constraint already pins the weighted mean to machine precision;
    // subtract the leftover for exact reporting.
    const double mean = c_.dot(sol.head(n)) / c_.sum();
    for (int id : active_) u.values[id] -= mean;
    return u;
}

DirichletSolver::DirichletSolver(MeshPtr mesh, const SparseSystem& stiffness,
                                 const std::vector<int>& boundary_nodes)
    : mesh_(std::move(mesh)), bnodes_(boundary_nodes) {
    if (bnodes_.empty()) throw ValidationError("solve_dirichlet: empty boundary node set");
    knorm_ = matrix_inf_norm(stiffness.matrix);

    std::vector<std::uint8_t> is_b(mesh_->node_count(), 0);
    for (int id : bnodes_) is_b[id] = 1;
    free_index_.assign(mesh_->node_count(), -1);
    for (int id : mesh_->active_nodes()) {
        if (is_b[id]) continue;
        free_index_[id] = static_cast<int>(free_.size());
        free_.push_back(id);
    }
    if (free_.empty()) throw ValidationError("solve_dirichlet: no free unknowns");

    std::vector<Eigen::Triplet<double>> tff, tfb;
    for (int col = 0; col < stiffness.matrix.outerSize(); ++col) {
        for (SparseMat::InnerIterator it(stiffness.matrix, col); it; ++it) {
            const int r = static_cast<int>(it.row());
            const int fr = free_index_[r];
            if (fr < 0) continue;
            const int fc = free_index_[col];
            if (fc >= 0)
                tff.emplace_back(fr, fc, it.value());
            else if (is_b[col])
                tfb.emplace_back(fr, mesh_->active_index(col), it.value());
        }
    }
    SparseMat kff(static_cast<int>(free_.size()), static_cast<int>(free_.size()));
    kff.setFromTriplets(tff.begin(), tff.end());
    k_fb_.resize(static_cast<int>(free_.size()), static_cast<int>(mesh_->active_nodes().size()));
    k_fb_.setFromTriplets(tfb.begin(), tfb.end());
    kff_ = kff;
    ldlt_.compute(kff);
    if (ldlt_.info() != Eigen::Success)
        throw SolverError("solve_dirichlet: factorization failed");
}

NodalField DirichletSolver::solve(const Vec& boundary_values, const Vec& load) const {
    if (boundary_values.size() != static_cast<Eigen::Index>(bnodes_.size()))
        throw ValidationError("solve_dirichlet: boundary value count mismatch");
    Vec ub = Vec::Zero(static_cast<int>(mesh_->active_nodes().size()));
    for (std::size_t i = 0; i < bnodes_.size(); ++i) {
        const int ai = mesh_->active_index(bnodes_[i]);
        if (ai < 0) throw ValidationError("solve_dirichlet: boundary node is inactive");
        ub[ai] = boundary_values[static_cast<int>(i)];
    }
    Vec rhs = gather(load, free_) - k_fb_ * ub;
    const Vec uf = ldlt_.solve(rhs);
    if (ldlt_.info() != Eigen::Success)
        throw SolverError("solve_dirichlet: back substitution failed");
    const double res = (kff_ * uf - rhs).norm();
    const double scale = std::max({rhs.norm(), knorm_ * uf.norm(), 1e-300});
    if (res > residual_tol * scale)
        throw SolverError("solve_dirichlet: residual " + std::to_string(res / scale) +
                          " above tolerance");

    NodalField u = NodalField::zeros(mesh_);
    for (std::size_t i = 0; i < free_.size(); ++i) u.values[free_[i]] = uf[static_cast<int>(i)];
    for (std::size_t i = 0; i < bnodes_.size(); ++i)
        u.values[bnodes_[i]] = boundary_values[static_cast<int>(i)];
    return u;
}

NodalField solve_neumann(MeshPtr mesh, const SparseSystem& stiffness, const Vec& load) {
    return NeumannSolver(std::move(mesh), stiffness).solve(load);
}

NodalField solve_dirichlet(MeshPtr mesh, const SparseSystem& stiffness,
                           const std::vector<int>& boundary_nodes, const Vec& boundary_values,
                           const Vec& load) {
    return DirichletSolver(std::move(mesh), stiffness, boundary_nodes)
        .solve(boundary_values, load);
}

NodalField harmonic_extension(MeshPtr mesh, const SparseSystem& stiffness, const HarmonicBC& bc) {
    if (bc.kind == HarmonicBC::Kind::NeumannFlux) {
        Vec load = assemble_boundary_load(*mesh, bc.edges, bc.flux);
        NeumannSolver solver(mesh, stiffness);
        solver.project_load = true; // mean-correct the discrete flux
        return solver.solve(load);
    }
    const std::vector<int> bnodes = mesh->outer_boundary_nodes();
    Vec bvals(static_cast<int>(bnodes.size()));
    for (std::size_t i = 0; i < bnodes.size(); ++i)
        bvals[static_cast<int>(i)] = bc.trace(mesh->node_x(bnodes[i]), mesh->node_y(bnodes[i]));
    NodalField u = solve_dirichlet(mesh, stiffness, bnodes, bvals, Vec::Zero(mesh->node_count()));
    const double mean = field_mean(u);
    for (int id : mesh->active_nodes()) u.values[id] -= mean;
    return u;
}

double interior_residual(const Mesh& mesh, const SparseSystem& stiffness, const NodalField& u,
                         const std::vector<int>& skip) {
    std::vector<std::uint8_t> excluded(mesh.node_count(), 0);
    for (const auto& e : mesh.free_edges()) {
        if (!e.outer) continue;
        excluded[e.n0] = 1;
        excluded[e.n1] = 1;
    }
    for (int id : skip) excluded[id] = 1;
    const Vec r = stiffness.matrix * u.values;
    double worst = 0.0;
    for (int id : mesh.active_nodes())
        if (!excluded[id]) worst = std::max(worst, std::abs(r[id]));
    const double scale = matrix_inf_norm(stiffness.matrix) *
                         std::max(u.values.cwiseAbs().maxCoeff(), 1e-300);
    return worst / scale;
}

CaccioppoliResult caccioppoli_check(const NodalField& u, const SparseSystem& stiffness,
                                    const Region& inner, double beta, double delta,
                                    double harmonic_tol) {
    if (delta <= 0.0) throw ValidationError("caccioppoli_check: delta must be positive");
    const double rel = interior_residual(*u.mesh, stiffness, u);
    if (rel > harmonic_tol)
        throw ValidationError("caccioppoli_check: input is not discrete A-harmonic (residual " +
                              std::to_string(rel) + ")");
    CaccioppoliResult out;
    out.lhs = norm(u, NormKind::Energy, inner);
    out.rhs = (2.0 * std::sqrt(beta) / delta) * norm(u, NormKind::L2);
    out.ok = out.lhs <= out.rhs * (1.0 + 1e-8);
    return out;
}

} // namespace msgfem
