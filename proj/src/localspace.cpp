#include "msgfem/localspace.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>

namespace msgfem {

PatchOperator::PatchOperator(const PatchPair& patch)
    : patch_(&patch), k_(assemble_stiffness(*patch.mesh)),
      k_omega_(assemble_stiffness(*patch.mesh, patch.omega_region)),
      neumann_(std::make_shared<NeumannSolver>(patch.mesh, k_)) {
    neumann_->project_load = true;
}

ReducedPencil PatchOperator::pencil(const std::vector<Snapshot>& snapshots) const {
    const int m = static_cast<int>(snapshots.size());
    const int nn = patch_->mesh->node_count();
    Mat u(nn, m);
    for (int i = 0; i < m; ++i) u.col(i) = snapshots[i].field.values;
    ReducedPencil p;
    const Mat ks = k_omega_.matrix * u;
    const Mat kt = k_.matrix * u;
    p.s = u.transpose() * ks;
    p.t = u.transpose() * kt;
    for (const auto& s : snapshots) p.labels.push_back(s.label);
    return p;
}

namespace {

// flux of the normalized harmonic polynomial Re/Im ((z - zc)/r0)^k
FluxFn poly_flux(int k, bool re, double zcx, double zcy, double r0) {
    return [=](double x, double y, double nx, double ny) {
        const std::complex<double> w((x - zcx) / r0, (y - zcy) / r0);
        std::complex<double> wp = 1.0; // w^(k-1)
        for (int i = 1; i < k; ++i) wp *= w;
        const double gx = re ? wp.real() : wp.imag();
        const double gy = re ? -wp.imag() : wp.real();
        return (k / r0) * (gx * nx + gy * ny);
    };
}

FluxFn mean_corrected(const Mesh& mesh, const EdgeSet& edges, const FluxFn& flux) {
    const double total = boundary_flux_total(mesh, edges, flux);
    const double len = boundary_flux_total(mesh, edges, [](double, double, double, double) {
        return 1.0;
    });
    const double shift = total / len;
    return [flux, shift](double x, double y, double nx, double ny) {
        return flux(x, y, nx, ny) - shift;
    };
}

} // namespace

std::vector<Snapshot> snapshots_poly_neumann(const PatchOperator& op, int m) {
    if (m < 1) throw ValidationError("snapshots_poly_neumann: M must be >= 1");
    const PatchPair& patch = op.patch();
    const Mesh& mesh = *patch.mesh;
    const EdgeSet edges = patch.snapshot_edges();
    const double r0 = 0.5 * patch.omega_star.diam();
    const double zcx = patch.omega_star.cx(), zcy = patch.omega_star.cy();

    std::vector<Snapshot> out;
    out.reserve(m);
    for (int k = 1; static_cast<int>(out.size()) < m; ++k) {
        for (const bool re : {true, false}) {
            if (static_cast<int>(out.size()) == m) break;
            const FluxFn flux = mean_corrected(mesh, edges, poly_flux(k, re, zcx, zcy, r0));
            const Vec load = assemble_boundary_load(mesh, edges, flux);
            Snapshot s;
            s.label = "poly:" + std::to_string(k) + (re ? ":re" : ":im");
            s.field = op.neumann().solve(load);
            out.push_back(std::move(s));
        }
    }
    return out;
}

NeumannModes neumann_eigenmodes(const MeshPtr& mesh_ptr, int n) {
    if (n < 1) throw ValidationError("neumann_eigenmodes: n must be >= 1");
    const Mesh& mesh = *mesh_ptr;
    const int target = std::max({3 * n, n + 10, 12});
    // tensor-cosine Ritz directions ordered by the Laplace eigenvalue of the
    // bounding rectangle, constants excluded
    struct Mode {
        int i, j;
        double key;
    };
    std::vector<Mode> modes;
    const double w = mesh.rect().width, h = mesh.rect().height;
    for (int i = 0; i <= target; ++i)
        for (int j = 0; j <= target; ++j) {
            if (i == 0 && j == 0) continue;
            modes.push_back({i, j, (i * i) / (w * w) + (j * j) / (h * h)});
        }
    std::stable_sort(modes.begin(), modes.end(),
                     [](const Mode& a, const Mode& b) { return a.key < b.key; });
    modes.resize(target);

    const int nn = mesh.node_count();
    Mat x(nn, target);
    for (int c = 0; c < target; ++c) {
        for (int id = 0; id < nn; ++id) {
            const double tx = (mesh.node_x(id) - mesh.rect().x0) / w;
            const double ty = (mesh.node_y(id) - mesh.rect().y0) / h;
            x(id, c) = std::cos(modes[c].i * M_PI * tx) * std::cos(modes[c].j * M_PI * ty);
        }
        for (int id = 0; id < nn; ++id)
            if (!mesh.node_active(id)) x(id, c) = 0.0;
    }

    const SparseSystem k = assemble_stiffness(mesh);
    const SparseSystem mass = assemble_weighted_mass(mesh, [](int) { return 1.0; });
    const Mat sk = x.transpose() * (k.matrix * x);
    const Mat sm = x.transpose() * (mass.matrix * x);

    const RankFilter f = filter_rank(sm, 1e-12);
    if (f.rank < n) throw ValidationError("neumann_eigenmodes: requested more modes than the Ritz space holds");
    const SymEig eig = jacobi_eigensolve(f.transform.transpose() * sk * f.transform);

    NeumannModes out;
    const double scale = std::max(eig.values[f.rank - 1], 1e-300);
    for (int i = 0; i < f.rank && static_cast<int>(out.values.size()) < n; ++i) {
        if (eig.values[i] <= 1e-10 * scale) continue; // constant-like direction
        out.values.push_back(eig.values[i]);
        const Vec coeff = x * (f.transform * eig.vectors.col(i));
        out.fields.emplace_back(NodalField{mesh_ptr, coeff});
    }
    if (static_cast<int>(out.values.size()) < n)
        throw ValidationError("neumann_eigenmodes: Ritz space exhausted before n modes");
    return out;
}

std::vector<Snapshot> snapshots_neumann_eigen(const PatchOperator& op, int n) {
    const PatchPair& patch = op.patch();
    const MeshPtr mesh = patch.mesh;
    const NeumannModes modes = neumann_eigenmodes(mesh, n);

    const auto bnodes = mesh->outer_boundary_nodes();
    DirichletSolver dirichlet(mesh, op.stiffness(), bnodes);
    std::vector<Snapshot> out;
    for (int i = 0; i < n; ++i) {
        Vec bvals(static_cast<int>(bnodes.size()));
        for (std::size_t b = 0; b < bnodes.size(); ++b)
            bvals[static_cast<int>(b)] = modes.fields[i].values[bnodes[b]];
        NodalField ext = dirichlet.solve(bvals, Vec::Zero(mesh->node_count()));
        const double mean = field_mean(ext);
        for (int id : mesh->active_nodes()) ext.values[id] -= mean;
        out.push_back(Snapshot{"wn:" + std::to_string(i + 1), std::move(ext)});
    }
    return out;
}

LocalBasis optimal_basis(const PatchOperator& op, const std::vector<Snapshot>& snapshots,
                         const OptimalBasisOptions& opts) {
    if (static_cast<int>(snapshots.size()) < opts.n + 1)
        throw ValidationError("optimal_basis: need at least n+1 snapshots for the d_n estimate");
    const EigenPairs pairs = solve_pencil(op.pencil(snapshots), opts.rank_threshold);
    if (pairs.retained_rank < opts.n)
        throw ValidationError("optimal_basis: snapshot set degenerate, achieved rank " +
                              std::to_string(pairs.retained_rank) + " < n = " +
                              std::to_string(opts.n));
    // restriction contract: energies over omega never exceed omega_star
    for (int i = 0; i < pairs.retained_rank; ++i)
        if (pairs.values[i] < -1e-9 || pairs.values[i] > 1.0 + 1e-9)
            throw ValidationError("optimal_basis: restriction eigenvalue outside [0,1]: " +
                                  std::to_string(pairs.values[i]));

    LocalBasis basis;
    basis.n = opts.n;
    basis.includes_constant = opts.include_constant;
    basis.lambda.assign(pairs.values.data(), pairs.values.data() + pairs.retained_rank);
    const int nn = op.patch().mesh->node_count();
    Mat u(nn, static_cast<int>(snapshots.size()));
    for (std::size_t i = 0; i < snapshots.size(); ++i)
        u.col(static_cast<int>(i)) = snapshots[i].field.values;
    for (int i = 0; i < opts.n; ++i)
        basis.funcs.emplace_back(op.patch().mesh, Vec(u * pairs.vectors.col(i)));
    if (pairs.retained_rank > opts.n) {
        basis.d_n_estimate = std::sqrt(std::max(0.0, pairs.values[opts.n]));
        // no oversampling gap: the whole spectrum sits at 1
        basis.d_n_available = basis.d_n_estimate < 1.0 - 1e-6;
        if (!basis.d_n_available) basis.d_n_estimate = 1.0;
    }
    if (opts.boundary_flux && op.patch().touches_domain_boundary())
        basis.particular = boundary_particular_solution(op, *opts.boundary_flux);
    return basis;
}

NodalField boundary_particular_solution(const PatchOperator& op, const FluxFn& g) {
    const PatchPair& patch = op.patch();
    if (!patch.touches_domain_boundary())
        throw ValidationError("boundary_particular_solution: patch does not touch the boundary");
    const MeshPtr mesh = patch.mesh;
    const EdgeSet domain_edges = EdgeSet::on_sides(patch.star_sides_on_domain);
    const Vec load = assemble_boundary_load(*mesh, domain_edges, g);
    // homogeneous Dirichlet on the interior part of the patch boundary
    const auto pinned = mesh->outer_boundary_nodes_on_sides({!patch.star_sides_on_domain[0],
                                                             !patch.star_sides_on_domain[1],
                                                             !patch.star_sides_on_domain[2],
                                                             !patch.star_sides_on_domain[3]});
    DirichletSolver solver(mesh, op.stiffness(), pinned);
    return solver.solve(Vec::Zero(static_cast<int>(pinned.size())), load);
}

NodalField particular_solution_source(const PatchOperator& op,
                                      const std::function<double(double, double)>& f) {
    const Mesh& mesh = *op.patch().mesh;
    const Vec volume = assemble_volume_load(mesh, f);
    const double total = volume.sum();
    const double flux = -total / mesh.outer_perimeter();
    const Vec boundary = assemble_boundary_load(
        mesh, EdgeSet::all_outer(),
        [flux](double, double, double, double) { return flux; });
    return op.neumann().solve(volume + boundary);
}

LocalSpan iterated_space(const PatchOperator& op, int n, int levels) {
    const PatchPair& patch = op.patch();
    if (levels < 1) throw ValidationError("iterated_space: need N >= 1");
    if (patch.touches_domain_boundary() || !patch.field)
        throw ValidationError("iterated_space: interior rectangular patches only");
    const Mesh& mesh = *patch.mesh;
    const double sigma = std::max(patch.omega.width, patch.omega.height);
    const double cx = patch.omega.cx(), cy = patch.omega.cy();

    LocalSpan span;
    for (int j = 1; j <= levels; ++j) {
        // side interpolates between sigma* (j = 1) and sigma, snapped outward
        const double side = sigma * (1.0 + patch.rho * (levels + 1 - j) / levels);
        const double half_w = 0.5 * side * patch.omega.width / sigma;
        const double half_h = 0.5 * side * patch.omega.height / sigma;
        auto snap = [&](double v, double origin, double step, bool down) {
            const double t = (v - origin) / step;
            return origin + (down ? std::floor(t + 1e-9) : std::ceil(t - 1e-9)) * step;
        };
        Rect level_rect{snap(cx - half_w, mesh.rect().x0, mesh.hx(), true),
                        snap(cy - half_h, mesh.rect().y0, mesh.hy(), true), 0, 0};
        level_rect.width =
            snap(cx + half_w, mesh.rect().x0, mesh.hx(), false) - level_rect.x0;
        level_rect.height =
            snap(cy + half_h, mesh.rect().y0, mesh.hy(), false) - level_rect.y0;
        level_rect = level_rect.intersect(mesh.rect());
        if (!level_rect.contains(patch.omega, 1e-12))
            throw ValidationError("iterated_space: nesting collapsed below omega");

        const int snx = static_cast<int>(std::llround(level_rect.width / mesh.hx()));
        const int sny = static_cast<int>(std::llround(level_rect.height / mesh.hy()));
        const MeshPtr sub = (j == 1 && level_rect.contains(mesh.rect(), 1e-12))
                                ? patch.mesh
                                : build_mesh(level_rect, snx, sny, *patch.field);
        const SparseSystem ks = (sub == patch.mesh) ? op.stiffness() : assemble_stiffness(*sub);
        const NeumannModes modes = neumann_eigenmodes(sub, n);
        const auto bnodes = sub->outer_boundary_nodes();
        DirichletSolver dirichlet(sub, ks, bnodes);
        const auto emb = embed_nodes(*sub, mesh);
        for (int i = 0; i < n; ++i) {
            Vec bvals(static_cast<int>(bnodes.size()));
            for (std::size_t b = 0; b < bnodes.size(); ++b)
                bvals[static_cast<int>(b)] = modes.fields[i].values[bnodes[b]];
            const NodalField ext = dirichlet.solve(bvals, Vec::Zero(sub->node_count()));
            NodalField lifted = NodalField::zeros(patch.mesh);
            for (int id = 0; id < sub->node_count(); ++id) lifted.values[emb[id]] = ext.values[id];
            span.funcs.push_back(std::move(lifted));
        }
    }
    return span;
}

LocalSpan homogenized_trace_space(const PatchOperator& op, const SymMat2& a0, int n,
                                  TraceKind trace) {
    if (!a0.spd()) throw ValidationError("homogenized_trace_space: A0 must be SPD");
    const PatchPair& patch = op.patch();
    const MeshPtr mesh = patch.mesh;
    double theta = 0.0;
    if (std::abs(a0.a12) > 1e-14 || std::abs(a0.a11 - a0.a22) > 1e-14)
        theta = 0.5 * std::atan2(2.0 * a0.a12, a0.a11 - a0.a22);
    const double c = std::cos(theta), s = std::sin(theta);
    const double a1 = a0.a11 * c * c + 2.0 * a0.a12 * s * c + a0.a22 * s * s;
    const double a2 = a0.a11 * s * s - 2.0 * a0.a12 * s * c + a0.a22 * c * c;
    const double b = a2 / a1;
    const double r0 = 0.5 * patch.omega_star.diam();
    const double cx = patch.omega_star.cx(), cy = patch.omega_star.cy();

    // A0-harmonic polynomial v_j (real part) / v-hat_j (imaginary part) of
    // zeta = (y1 + i y2 / sqrt(b)) / r0 in the A0 eigenbasis
    auto value = [=](int j, bool re, double x, double y) {
        const double dx = x - cx, dy = y - cy;
        const std::complex<double> zeta((c * dx + s * dy) / r0,
                                        (-s * dx + c * dy) / (std::sqrt(b) * r0));
        const std::complex<double> zj = std::pow(zeta, j);
        return re ? zj.real() : zj.imag();
    };
    auto grad = [=](int j, bool re, double x, double y, double& gx, double& gy) {
        const double dx = x - cx, dy = y - cy;
        const std::complex<double> zeta((c * dx + s * dy) / r0,
                                        (-s * dx + c * dy) / (std::sqrt(b) * r0));
        const std::complex<double> zp = static_cast<double>(j) * std::pow(zeta, j - 1);
        // d/dy1 Re z^j = Re z', d/dy2 Re z^j = -Im z' / sqrt(b) (chain rule)
        const double g1 = (re ? zp.real() : zp.imag()) / r0;
        const double g2 = (re ? -zp.imag() : zp.real()) / (std::sqrt(b) * r0);
        gx = c * g1 - s * g2;
        gy = s * g1 + c * g2;
    };

    LocalSpan span;
    const EdgeSet edges = patch.snapshot_edges();
    std::optional<DirichletSolver> dirichlet;
    std::vector<int> bnodes;
    if (trace == TraceKind::Dirichlet) {
        bnodes = mesh->outer_boundary_nodes();
        dirichlet.emplace(mesh, op.stiffness(), bnodes);
    }
    for (int idx = 0; idx < n; ++idx) {
        const int j = idx / 2 + 1;
        const bool re = (idx % 2 == 0);
        NodalField ext;
        if (trace == TraceKind::Dirichlet) {
            Vec bvals(static_cast<int>(bnodes.size()));
            for (std::size_t i = 0; i < bnodes.size(); ++i)
                bvals[static_cast<int>(i)] = value(j, re, mesh->node_x(bnodes[i]),
                                                   mesh->node_y(bnodes[i]));
            ext = dirichlet->solve(bvals, Vec::Zero(mesh->node_count()));
            const double mean = field_mean(ext);
            for (int id : mesh->active_nodes()) ext.values[id] -= mean;
        } else {
            const FluxFn flux = [=](double x, double y, double nx, double ny) {
                double gx, gy;
                grad(j, re, x, y, gx, gy);
                // n . A0 grad v
                return nx * (a0.a11 * gx + a0.a12 * gy) + ny * (a0.a12 * gx + a0.a22 * gy);
            };
            const FluxFn corrected = mean_corrected(*mesh, edges, flux);
            ext = op.neumann().solve(assemble_boundary_load(*mesh, edges, corrected));
        }
        span.funcs.push_back(std::move(ext));
    }
    return span;
}

double best_approx_error(const NodalField& u, const LocalSpan& span, const Region& region,
                         const SparseSystem& stiffness_region) {
    const double uu = u.values.dot(stiffness_region.matrix * u.values);
    if (span.funcs.empty()) return std::sqrt(std::max(0.0, uu));
    const int m = static_cast<int>(span.funcs.size());
    const int nn = static_cast<int>(u.values.size());
    Mat b(nn, m);
    for (int i = 0; i < m; ++i) b.col(i) = span.funcs[i].values;
    const Mat kb = stiffness_region.matrix * b;
    const Mat gram = b.transpose() * kb;
    const Vec rhs = kb.transpose() * u.values;
    const RankFilter f = filter_rank(gram, 1e-12);
    if (f.rank == 0) return std::sqrt(std::max(0.0, uu));
    const Vec proj = f.transform.transpose() * rhs;
    return std::sqrt(std::max(0.0, uu - proj.squaredNorm()));
}

void export_basis_csv(const LocalBasis& basis, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("export_basis_csv: cannot open " + path);
    out << "# eigenvalues (descending), d_n estimate, then nodal coefficients per function\n";
    out.precision(17);
    out << "lambda";
    for (double l : basis.lambda) out << "," << l;
    out << "\n";
    out << "d_n," << basis.d_n_estimate << "," << (basis.d_n_available ? "estimated" : "degenerate")
        << "\n";
    out << "includes_constant," << (basis.includes_constant ? 1 : 0) << "\n";
    for (std::size_t i = 0; i < basis.funcs.size(); ++i) {
        out << "psi_" << (i + 1);
        const Vec& v = basis.funcs[i].values;
        out.precision(17);
        for (Eigen::Index k = 0; k < v.size(); ++k) out << "," << v[k];
        out << "\n";
    }
}

} // namespace msgfem
