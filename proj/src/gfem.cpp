#include "msgfem/gfem.hpp"

#include <cmath>

namespace msgfem {

namespace {

// Global fine node ids on the closure of a cover patch's omega, in the same
// row-major order used by the PU supports.
std::vector<int> support_nodes(const Cover& cover, const CoverPatch& p, const Mesh& fine) {
    const int fx = fine.nx() / cover.m, fy = fine.ny() / cover.m;
    const int i0 = std::max(0, (p.ci - 1) * fx), i1 = std::min(fine.nx(), (p.ci + 1) * fx);
    const int j0 = std::max(0, (p.cj - 1) * fy), j1 = std::min(fine.ny(), (p.cj + 1) * fy);
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(i1 - i0 + 1) * (j1 - j0 + 1));
    for (int j = j0; j <= j1; ++j)
        for (int i = i0; i <= i1; ++i) out.push_back(fine.node_id(i, j));
    return out;
}

} // namespace

PatchBasisGlobal build_patch_basis(const CoefficientField& field, const Cover& cover,
                                   int patch_index, const Mesh& fine, const LocalSpaceSpec& spec,
                                   const ProblemData& data) {
    const CoverPatch& cp = cover.patches[patch_index];
    // patch meshes share the fine-mesh spacing so nodal transfer is exact
    const double ratio = field.cell_w() / fine.hx();
    const int refine = static_cast<int>(std::llround(ratio));
    if (refine < 1 || std::abs(ratio - refine) > 1e-9)
        throw ValidationError("build_patch_basis: fine mesh not nested in the coefficient grid");
    const PatchPair patch = make_rect_patch(field, cp.omega, cp.omega_star, cover.domain, refine);
    PatchOperator op(patch);

    PatchBasisGlobal out;
    out.patch_index = patch_index;
    const int n_funcs = spec.dim - 1; // the constant is appended globally
    std::vector<NodalField> funcs;
    if (n_funcs > 0) {
        if (spec.family == BasisFamily::Polynomial) {
            for (auto& s : snapshots_poly_neumann(op, n_funcs)) funcs.push_back(std::move(s.field));
        } else {
            const int m = spec.snapshots > 0 ? spec.snapshots
                                             : std::max(3 * n_funcs, n_funcs + 10);
            const auto snaps = snapshots_poly_neumann(op, m);
            OptimalBasisOptions obo;
            obo.n = n_funcs;
            obo.rank_threshold = spec.rank_threshold;
            LocalBasis basis = optimal_basis(op, snaps, obo);
            out.lambda = basis.lambda;
            out.d_n_estimate = basis.d_n_estimate;
            out.d_n_available = basis.d_n_available;
            funcs = std::move(basis.funcs);
        }
    }

    NodalField particular = NodalField::zeros(patch.mesh);
    bool has_particular = false;
    if (data.g && patch.touches_domain_boundary()) {
        const NodalField up = boundary_particular_solution(op, data.g);
        particular.values += up.values;
        has_particular = true;
    }
    if (data.f) {
        const NodalField uf = particular_solution_source(op, data.f);
        particular.values += uf.values;
        has_particular = true;
    }

    out.nodes = support_nodes(cover, cp, fine);
    const auto emb = embed_nodes(*patch.mesh, fine);
    std::vector<int> fine_to_patch(fine.node_count(), -1);
    for (int id = 0; id < patch.mesh->node_count(); ++id) fine_to_patch[emb[id]] = id;

    out.funcs.resize(static_cast<int>(out.nodes.size()), static_cast<int>(funcs.size()));
    out.particular = Vec::Zero(static_cast<int>(out.nodes.size()));
    out.has_particular = has_particular;
    for (std::size_t r = 0; r < out.nodes.size(); ++r) {
        const int pid = fine_to_patch[out.nodes[r]];
        if (pid < 0) throw ValidationError("build_patch_basis: omega node outside the patch mesh");
        for (std::size_t c = 0; c < funcs.size(); ++c)
            out.funcs(static_cast<int>(r), static_cast<int>(c)) = funcs[c].values[pid];
        if (has_particular) out.particular[static_cast<int>(r)] = particular.values[pid];
    }
    return out;
}

GlobalSolution solve_gfem(const MeshPtr& fine, const SparseSystem& k_fine,
                          const PartitionOfUnity& pu, const std::vector<PatchBasisGlobal>& bases,
                          const ProblemData& data, const GlobalOptions& opts) {
    const int nn = fine->node_count();
    Vec f_fine = Vec::Zero(nn);
    if (data.f) f_fine += assemble_volume_load(*fine, data.f);
    if (data.g) f_fine += assemble_boundary_load(*fine, EdgeSet::all_outer(), data.g);

    // affine part: PU-blended particular solutions
    Vec u_part = Vec::Zero(nn);
    for (const auto& b : bases) {
        if (!b.has_particular) continue;
        const auto& s = pu.supports[b.patch_index];
        for (std::size_t k = 0; k < s.nodes.size(); ++k)
            u_part[s.nodes[k]] += s.phi[k] * b.particular[static_cast<int>(k)];
    }

    // raw trial columns: phi_i * xi_j, plus phi_i itself for the constant
    std::vector<Eigen::Triplet<double>> wt;
    std::vector<std::pair<int, int>> block; // (start, count) per patch
    int dofs = 0;
    for (const auto& b : bases) {
        const auto& s = pu.supports[b.patch_index];
        const int nf = static_cast<int>(b.funcs.cols()) + (b.includes_constant ? 1 : 0);
        block.emplace_back(dofs, nf);
        for (int c = 0; c < static_cast<int>(b.funcs.cols()); ++c)
            for (std::size_t k = 0; k < s.nodes.size(); ++k) {
                const double v = s.phi[k] * b.funcs(static_cast<int>(k), c);
                if (v != 0.0) wt.emplace_back(s.nodes[k], dofs + c, v);
            }
        if (b.includes_constant)
            for (std::size_t k = 0; k < s.nodes.size(); ++k)
                if (s.phi[k] != 0.0)
                    wt.emplace_back(s.nodes[k], dofs + nf - 1, s.phi[k]);
        dofs += nf;
    }
    SparseMat w_raw(nn, dofs);
    w_raw.setFromTriplets(wt.begin(), wt.end());

    // per-patch rank pruning of the block Gram in the global energy
    const SparseMat kw = k_fine.matrix * w_raw;
    std::vector<Mat> transforms;
    int pruned = 0;
    for (std::size_t p = 0; p < bases.size(); ++p) {
        const auto [start, count] = block[p];
        const Mat wb = Mat(w_raw.middleCols(start, count));
        const Mat kb = Mat(kw.middleCols(start, count));
        const Mat g = wb.transpose() * kb;
        const RankFilter f = filter_rank(g, opts.prune_threshold);
        transforms.push_back(f.transform);
        pruned += f.rank;
    }
    std::vector<Eigen::Triplet<double>> vt;
    int col0 = 0;
    for (std::size_t p = 0; p < bases.size(); ++p) {
        const auto [start, count] = block[p];
        const Mat& tr = transforms[p];
        for (int c = 0; c < tr.cols(); ++c)
            for (int r = 0; r < count; ++r)
                if (tr(r, c) != 0.0) vt.emplace_back(start + r, col0 + c, tr(r, c));
        col0 += static_cast<int>(tr.cols());
    }
    SparseMat v(dofs, pruned);
    v.setFromTriplets(vt.begin(), vt.end());
    const SparseMat w = w_raw * v;

    // reduced system with the mean constraint on the represented solution
    const SparseMat kg = SparseMat(w.transpose() * (k_fine.matrix * w));
    const Vec c_fine = mean_weights(*fine);
    const Vec cg = w.transpose() * c_fine;
    const Vec rhs_red = w.transpose() * Vec(f_fine - k_fine.matrix * u_part);

    std::vector<Eigen::Triplet<double>> at;
    for (int c = 0; c < kg.outerSize(); ++c)
        for (SparseMat::InnerIterator it(kg, c); it; ++it)
            at.emplace_back(static_cast<int>(it.row()), c, it.value());
    for (int i = 0; i < pruned; ++i) {
        at.emplace_back(i, pruned, cg[i]);
        at.emplace_back(pruned, i, cg[i]);
    }
    SparseMat aug(pruned + 1, pruned + 1);
    aug.setFromTriplets(at.begin(), at.end());
    Eigen::SparseLU<SparseMat> lu;
    lu.compute(aug);
    if (lu.info() != Eigen::Success)
        throw SolverError("solve_gfem: rank deficiency beyond the constant nullspace "
                          "(degenerate local bases)");
    Vec rhs_aug(pruned + 1);
    rhs_aug.head(pruned) = rhs_red;
    rhs_aug[pruned] = -c_fine.dot(u_part);
    const Vec sol = lu.solve(rhs_aug);
    if (lu.info() != Eigen::Success) throw SolverError("solve_gfem: back substitution failed");

    GlobalSolution out;
    out.dofs = dofs;
    out.pruned_dofs = pruned;
    out.coefficients = sol.head(pruned);
    const double res = (aug * sol - rhs_aug).norm();
    const double scale = std::max(rhs_aug.norm(), 1e-300);
    out.residual_rel = res / scale;
    if (out.residual_rel > opts.residual_tol * 1e3)
        throw SolverError("solve_gfem: residual " + std::to_string(out.residual_rel) +
                          " signals a degenerate system");

    Vec u = u_part + w * out.coefficients;
    NodalField uf(fine, std::move(u));
    const double mean = c_fine.dot(uf.values) / c_fine.sum();
    for (int id : fine->active_nodes()) uf.values[id] -= mean;
    for (int id = 0; id < nn; ++id)
        if (!fine->node_active(id)) uf.values[id] = 0.0;
    out.energy = norm(uf, NormKind::Energy);
    out.fine = std::move(uf);
    return out;
}

NodalField overkill_reference(const Rect& domain, const CoefficientField& field,
                              const ProblemData& data, int fine_nx, int fine_ny,
                              int refine_factor, std::size_t unknown_cap) {
    if (refine_factor < 2)
        throw ValidationError("overkill_reference: refine_factor must be >= 2");
    const int rnx = fine_nx * refine_factor, rny = fine_ny * refine_factor;
    if (static_cast<std::size_t>(rnx + 1) * (rny + 1) > unknown_cap)
        throw ValidationError("overkill_reference: refined mesh exceeds the unknown cap");
    const MeshPtr refined = build_mesh(domain, rnx, rny, field);
    const SparseSystem k = assemble_stiffness(*refined);
    Vec load = Vec::Zero(refined->node_count());
    if (data.f) load += assemble_volume_load(*refined, data.f);
    if (data.g) load += assemble_boundary_load(*refined, EdgeSet::all_outer(), data.g);
    NeumannSolver solver(refined, k);
    solver.project_load = true;
    const NodalField u_ref = solver.solve(load);

    const MeshPtr fine = build_mesh(domain, fine_nx, fine_ny, field);
    NodalField out = NodalField::zeros(fine);
    for (int j = 0; j <= fine_ny; ++j)
        for (int i = 0; i <= fine_nx; ++i)
            out.values[fine->node_id(i, j)] =
                u_ref.values[refined->node_id(i * refine_factor, j * refine_factor)];
    const Vec c = mean_weights(*fine);
    const double mean = c.dot(out.values) / c.sum();
    for (int id : fine->active_nodes()) out.values[id] -= mean;
    for (int id = 0; id < fine->node_count(); ++id)
        if (!fine->node_active(id)) out.values[id] = 0.0;
    return out;
}

std::pair<double, double> global_error(const NodalField& u_ref, const NodalField& u_gfem) {
    if (u_ref.values.size() != u_gfem.values.size())
        throw ValidationError("global_error: mesh mismatch");
    const Vec c = mean_weights(*u_ref.mesh);
    auto centered = [&](const NodalField& u) {
        NodalField v = u;
        const double mean = c.dot(v.values) / c.sum();
        for (int id : u.mesh->active_nodes()) v.values[id] -= mean;
        return v;
    };
    const NodalField a = centered(u_ref);
    const NodalField b = centered(u_gfem);
    const double ref_e = norm(a, NormKind::Energy);
    const double ref_l2 = norm(a, NormKind::L2);
    if (ref_e <= 0.0 || ref_l2 <= 0.0)
        throw ValidationError("global_error: zero-norm reference");
    const NodalField diff(a.mesh, a.values - b.values);
    return {norm(diff, NormKind::Energy) / ref_e, norm(diff, NormKind::L2) / ref_l2};
}

LocalGlobalReport verify_local_global_bound(const MeshPtr& fine, const SparseSystem& k_fine,
                                            const Cover& cover, const PartitionOfUnity& pu,
                                            const std::vector<PatchBasisGlobal>& bases,
                                            const NodalField& u0) {
    LocalGlobalReport rep;
    Vec zeta = Vec::Zero(fine->node_count());
    double sum_eps1_diam = 0.0, sum_eps2 = 0.0, sum_eps1 = 0.0;

    for (const auto& b : bases) {
        const CoverPatch& cp = cover.patches[b.patch_index];
        const Region region = Region::rect(cp.omega);
        const SparseSystem k_region = assemble_stiffness(*fine, region);

        // expand local functions (plus constant) onto the global mesh
        const int nf = static_cast<int>(b.funcs.cols()) + (b.includes_constant ? 1 : 0);
        std::vector<Vec> funcs;
        for (int c = 0; c < static_cast<int>(b.funcs.cols()); ++c) {
            Vec v = Vec::Zero(fine->node_count());
            for (std::size_t k = 0; k < b.nodes.size(); ++k)
                v[b.nodes[k]] = b.funcs(static_cast<int>(k), c);
            funcs.push_back(std::move(v));
        }
        if (b.includes_constant) {
            Vec v = Vec::Zero(fine->node_count());
            for (int id : b.nodes) v[id] = 1.0;
            funcs.push_back(std::move(v));
        }
        Vec target = u0.values;
        if (b.has_particular) {
            for (std::size_t k = 0; k < b.nodes.size(); ++k)
                target[b.nodes[k]] -= b.particular[static_cast<int>(k)];
        }
        // energy projection over omega_i
        Vec coeff = Vec::Zero(nf);
        if (nf > 0) {
            Mat gram(nf, nf);
            Vec rhs(nf);
            std::vector<Vec> kf;
            for (int i = 0; i < nf; ++i) kf.push_back(k_region.matrix * funcs[i]);
            for (int i = 0; i < nf; ++i) {
                rhs[i] = kf[i].dot(target);
                for (int j = 0; j <= i; ++j) gram(i, j) = gram(j, i) = kf[i].dot(funcs[j]);
            }
            // constants have zero energy, so the rank filter drops them from
            // the projection; any admissible zeta_i works for the bound
            const RankFilter f = filter_rank(gram, 1e-12);
            coeff = f.transform * (f.transform.transpose() * rhs);
            if (b.includes_constant) {
                // pick the constant to match the mean of the residual
                Vec resid = target;
                for (int i = 0; i < nf; ++i) resid -= coeff[i] * funcs[i];
                double wsum = 0.0, wavg = 0.0;
                for (int e = 0; e < fine->elem_count(); ++e) {
                    if (!fine->elem_active(e) || !region.contains(*fine, e)) continue;
                    const auto ns = fine->elem_nodes(e);
                    const double q = 0.25 * fine->hx() * fine->hy();
                    for (int n : ns) {
                        wsum += q;
                        wavg += q * resid[n];
                    }
                }
                coeff[nf - 1] += wavg / wsum;
            }
        }
        Vec zi = Vec::Zero(fine->node_count());
        if (b.has_particular)
            for (std::size_t k = 0; k < b.nodes.size(); ++k)
                zi[b.nodes[k]] += b.particular[static_cast<int>(k)];
        for (int i = 0; i < nf; ++i) zi += coeff[i] * funcs[i];

        const NodalField err(fine, u0.values - zi);
        const double eps2 = std::sqrt(std::max(0.0, err.values.dot(k_region.matrix * err.values)));
        const double eps1 = norm(err, NormKind::L2Star, region);
        rep.eps1.push_back(eps1);
        rep.eps2.push_back(eps2);
        sum_eps1 += eps1 * eps1;
        sum_eps2 += eps2 * eps2;
        sum_eps1_diam += eps1 * eps1 / (cp.diam * cp.diam);

        const auto& s = pu.supports[b.patch_index];
        for (std::size_t k = 0; k < s.nodes.size(); ++k)
            zeta[s.nodes[k]] += s.phi[k] * zi[s.nodes[k]];
    }

    const NodalField diff(fine, u0.values - zeta);
    rep.lhs_energy = norm(diff, NormKind::Energy);
    rep.lhs_l2star = norm(diff, NormKind::L2Star);
    rep.rhs_energy = std::sqrt(pu.c2 * pu.c2 * sum_eps1_diam + pu.c1 * pu.c1 * sum_eps2);
    rep.rhs_l2star = pu.c1 * std::sqrt(sum_eps1);
    rep.ok = rep.lhs_energy <= rep.rhs_energy * (1.0 + 1e-9) &&
             rep.lhs_l2star <= rep.rhs_l2star * (1.0 + 1e-9);
    return rep;
}

} // namespace msgfem
