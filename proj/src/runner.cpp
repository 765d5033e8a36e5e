#include "msgfem/runner.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <random>
#include <thread>

namespace msgfem {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::ofstream open_out(const std::string& dir, const std::string& name) {
    std::filesystem::create_directories(dir);
    std::ofstream out(dir + "/" + name, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + dir + "/" + name);
    return out;
}

std::string timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[64];
    std::strftime(buf, sizeof buf, "%Y-%m-%d %H:%M:%S", std::gmtime(&t));
    return buf;
}

FluxFn linear_flux(const ScenarioConfig& c) {
    if (c.g0 == 0.0 && c.gx == 0.0 && c.gy == 0.0) return nullptr;
    const double g0 = c.g0, gx = c.gx, gy = c.gy;
    return [=](double x, double y, double, double) { return g0 + gx * x + gy * y; };
}

std::function<double(double, double)> const_source(const ScenarioConfig& c) {
    if (c.f_const == 0.0) return nullptr;
    const double f = c.f_const;
    return [=](double, double) { return f; };
}

} // namespace

void parallel_for(int count, int workers, const std::function<void(int)>& fn) {
    if (count <= 0) return;
    if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
    workers = std::clamp(workers, 1, count);
    if (workers == 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::mutex err_mutex;
    std::string first_error;
    int first_error_index = -1;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
                try {
                    fn(i);
                } catch (const std::exception& e) {
                    std::scoped_lock lock(err_mutex);
                    if (first_error_index < 0 || i < first_error_index) {
                        first_error_index = i;
                        first_error = e.what();
                    }
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error_index >= 0)
        throw std::runtime_error("job " + std::to_string(first_error_index) + " failed: " +
                                 first_error);
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw ValidationError("fit_line: need at least two points");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
        syy += y[i] * y[i];
    }
    LineFit f;
    const double den = n * sxx - sx * sx;
    f.slope = (n * sxy - sx * sy) / den;
    f.intercept = (sy - f.slope * sx) / n;
    double ss_res = 0, ss_tot = 0;
    const double mean = sy / n;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double fit = f.slope * x[i] + f.intercept;
        ss_res += (y[i] - fit) * (y[i] - fit);
        ss_tot += (y[i] - mean) * (y[i] - mean);
    }
    f.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
    return f;
}

namespace {

struct PatchStudyResult {
    // bases[family][k_index]
    std::vector<PatchBasisGlobal> optimal;
    std::vector<PatchBasisGlobal> polynomial;
};

PatchStudyResult study_patch_job(const CoefficientField& field, const Cover& cover,
                                 int patch_index, const Mesh& fine, const ScenarioConfig& c,
                                 const ProblemData& data) {
    const CoverPatch& cp = cover.patches[patch_index];
    const double ratio = field.cell_w() / fine.hx();
    const int refine = static_cast<int>(std::llround(ratio));
    const PatchPair patch = make_rect_patch(field, cp.omega, cp.omega_star, cover.domain, refine);
    PatchOperator op(patch);

    const int n_max = 2 * c.k_max;
    const int m = c.snapshots > 0 ? c.snapshots : std::max(3 * n_max, n_max + 10);
    const auto snaps = snapshots_poly_neumann(op, m);
    OptimalBasisOptions obo;
    obo.n = n_max;
    obo.rank_threshold = c.rank_threshold;
    const LocalBasis full = optimal_basis(op, snaps, obo);

    NodalField particular = NodalField::zeros(patch.mesh);
    bool has_particular = false;
    if (data.g && patch.touches_domain_boundary()) {
        particular.values += boundary_particular_solution(op, data.g).values;
        has_particular = true;
    }
    if (data.f) {
        particular.values += particular_solution_source(op, data.f).values;
        has_particular = true;
    }

    const auto emb = embed_nodes(*patch.mesh, fine);
    std::vector<int> fine_to_patch(fine.node_count(), -1);
    for (int id = 0; id < patch.mesh->node_count(); ++id) fine_to_patch[emb[id]] = id;

    const int fx = fine.nx() / cover.m, fy = fine.ny() / cover.m;
    const int i0 = std::max(0, (cp.ci - 1) * fx), i1 = std::min(fine.nx(), (cp.ci + 1) * fx);
    const int j0 = std::max(0, (cp.cj - 1) * fy), j1 = std::min(fine.ny(), (cp.cj + 1) * fy);
    std::vector<int> nodes;
    for (int j = j0; j <= j1; ++j)
        for (int i = i0; i <= i1; ++i) nodes.push_back(fine.node_id(i, j));

    auto pack = [&](const std::vector<const NodalField*>& funcs, const LocalBasis* spectrum) {
        PatchBasisGlobal b;
        b.patch_index = patch_index;
        b.nodes = nodes;
        b.includes_constant = true;
        b.has_particular = has_particular;
        b.funcs.resize(static_cast<int>(nodes.size()), static_cast<int>(funcs.size()));
        b.particular = Vec::Zero(static_cast<int>(nodes.size()));
        for (std::size_t r = 0; r < nodes.size(); ++r) {
            const int pid = fine_to_patch[nodes[r]];
            for (std::size_t cix = 0; cix < funcs.size(); ++cix)
                b.funcs(static_cast<int>(r), static_cast<int>(cix)) = funcs[cix]->values[pid];
            if (has_particular) b.particular[static_cast<int>(r)] = particular.values[pid];
        }
        if (spectrum) {
            b.lambda = spectrum->lambda;
            const int nf = static_cast<int>(b.funcs.cols());
            if (static_cast<int>(b.lambda.size()) > nf) {
                b.d_n_estimate = std::sqrt(std::max(0.0, b.lambda[nf]));
                b.d_n_available = true;
            }
        }
        return b;
    };

    PatchStudyResult out;
    for (int k = c.k_min; k <= c.k_max; ++k) {
        std::vector<const NodalField*> opt, poly;
        for (int i = 0; i < 2 * k; ++i) {
            opt.push_back(&full.funcs[i]);
            poly.push_back(&snaps[i].field);
        }
        out.optimal.push_back(pack(opt, &full));
        out.polynomial.push_back(pack(poly, nullptr));
    }
    return out;
}

} // namespace

StudyReport run_study(const ScenarioConfig& c, const std::string& out_dir, int workers,
                      std::uint64_t seed) {
    const CoefficientField field = build_field(c, seed);
    const int nx = static_cast<int>(std::llround(c.domain.width * c.resolution));
    const int ny = static_cast<int>(std::llround(c.domain.height * c.resolution));
    if (nx % c.m != 0 || ny % c.m != 0)
        throw ConfigError("study: resolution must be divisible by the cover size m");
    const MeshPtr fine = build_mesh(c.domain, nx, ny, field);
    const SparseSystem k_fine = assemble_stiffness(*fine);
    const auto [cover, pu] = build_cover_and_pu(c.domain, c.m, fine, c.star_cells);

    ProblemData data;
    data.f = const_source(c);
    data.g = linear_flux(c);

    const NodalField u_ref =
        overkill_reference(c.domain, field, data, nx, ny, c.overkill_refine);
    // reference self-convergence guard at the next refinement
    double overkill_gap = 0.0;
    {
        const NodalField u_ref2 =
            overkill_reference(c.domain, field, data, nx, ny, 2 * c.overkill_refine);
        overkill_gap = global_error(u_ref2, u_ref).first;
    }

    const int np = static_cast<int>(cover.patches.size());
    std::vector<PatchStudyResult> results(np);
    parallel_for(np, workers, [&](int i) {
        results[i] = study_patch_job(field, cover, i, *fine, c, data);
    });

    StudyReport rep;
    rep.fine_nx = nx;
    rep.seed = seed;
    std::vector<double> xs, ys_opt, ys_poly;
    for (int kidx = 0; kidx <= c.k_max - c.k_min; ++kidx) {
        const int k = c.k_min + kidx;
        for (const std::string family : {std::string("optimal"), std::string("polynomial")}) {
            std::vector<PatchBasisGlobal> bases;
            bases.reserve(np);
            for (int p = 0; p < np; ++p)
                bases.push_back(family == "optimal" ? results[p].optimal[kidx]
                                                    : results[p].polynomial[kidx]);
            const GlobalSolution sol = solve_gfem(fine, k_fine, pu, bases, data);
            const auto [e_rel, l2_rel] = global_error(u_ref, sol.fine);
            rep.rows.push_back(StudyRow{family, k, 2 * k + 1, e_rel, l2_rel});
            if (family == "optimal") {
                ys_opt.push_back(std::log(e_rel));
            } else {
                ys_poly.push_back(std::log(e_rel));
            }
        }
        xs.push_back(2.0 * k + 1.0);
    }
    rep.fit_optimal = fit_line(xs, ys_opt);
    rep.fit_polynomial = fit_line(xs, ys_poly);
    rep.overkill_gap = overkill_gap;

    auto csv = open_out(out_dir, "report.csv");
    csv << "family,k,n,energy_rel,l2_rel\n";
    for (const auto& r : rep.rows)
        csv << r.family << "," << r.k << "," << r.n << "," << fmt(r.energy_rel) << ","
            << fmt(r.l2_rel) << "\n";

    auto sum = open_out(out_dir, "summary.txt");
    sum << "scenario: study\n";
    sum << "generated: " << timestamp() << "\n";
    sum << "seed: " << seed << "\n";
    sum << "fine mesh: " << nx << "x" << ny << ", cover m = " << c.m << ", field = "
        << c.field_kind << "\n";
    sum << "overkill refine: " << c.overkill_refine
        << ", reference self-convergence gap: " << fmt(overkill_gap) << "\n";
    sum << "fit optimal:    slope " << fmt(rep.fit_optimal.slope) << "  R^2 "
        << fmt(rep.fit_optimal.r2) << "\n";
    sum << "fit polynomial: slope " << fmt(rep.fit_polynomial.slope) << "  R^2 "
        << fmt(rep.fit_polynomial.r2) << "\n";
    sum << "published shaft benchmark for qualitative comparison only (its fiber\n"
           "geometry is unpublished, so these numbers are not reproducible here):\n"
           "k=1..5 errors 2.45% 1.55% 0.89% 0.56% 0.35%, rate e^(-0.48 n)\n";
    return rep;
}

NWidthReport run_nwidth(const ScenarioConfig& c, const std::string& out_dir, std::uint64_t seed) {
    const CoefficientField field = build_field(c, seed);
    PatchPair patch;
    if (c.geometry == "disks") {
        patch = make_ellipse_patch(field, SymMat2::identity(), c.domain.cx(), c.domain.cy(), c.r,
                                   c.r_star);
    } else if (c.geometry == "squares") {
        const double cx = c.domain.cx(), cy = c.domain.cy();
        const Rect omega{cx - c.r, cy - c.r, 2 * c.r, 2 * c.r};
        const Rect star{cx - c.r_star, cy - c.r_star, 2 * c.r_star, 2 * c.r_star};
        patch = make_rect_patch(field, omega, star, c.domain);
    } else {
        throw ConfigError("nwidth.geometry must be disks|squares");
    }
    PatchOperator op(patch);
    const int m = c.snapshots > 0 ? c.snapshots : std::max({3 * c.n, c.n + 10, 24});
    const auto snaps = snapshots_poly_neumann(op, m);
    OptimalBasisOptions obo;
    obo.n = c.n;
    obo.rank_threshold = c.rank_threshold;
    const LocalBasis basis = optimal_basis(op, snaps, obo);

    NWidthReport rep;
    rep.seed = seed;
    rep.d_n = basis.d_n_estimate;
    const double q = (c.r / c.r_star) * (c.r / c.r_star);
    for (int j = 0; j < c.n; ++j) {
        NWidthRow row;
        row.j = j + 1;
        row.lambda = basis.lambda[j];
        row.sqrt_lambda = std::sqrt(std::max(0.0, basis.lambda[j]));
        row.lambda_disk_reference = std::pow(q, j / 2 + 1);
        rep.rows.push_back(row);
    }

    export_basis_csv(basis, out_dir + "/basis_0.csv");
    auto csv = open_out(out_dir, "report.csv");
    csv << "j,lambda,sqrt_lambda,lambda_disk_reference\n";
    for (const auto& r : rep.rows)
        csv << r.j << "," << fmt(r.lambda) << "," << fmt(r.sqrt_lambda) << ","
            << fmt(r.lambda_disk_reference) << "\n";
    auto sum = open_out(out_dir, "summary.txt");
    sum << "scenario: nwidth\n";
    sum << "generated: " << timestamp() << "\n";
    sum << "seed: " << seed << "\n";
    sum << "geometry: " << c.geometry << " r = " << fmt(c.r) << " r* = " << fmt(c.r_star) << "\n";
    sum << "snapshots: " << m << ", retained n: " << c.n << "\n";
    sum << "d_n estimate: " << fmt(rep.d_n) << "\n";
    return rep;
}

HomogReport run_homog(const ScenarioConfig& c, const std::string& out_dir, std::uint64_t seed) {
    const CoefficientField cell = build_unit_cell(c);
    SweepPatchSpec spec;
    spec.ellipse = (c.geometry == "disks");
    spec.r = c.r;
    spec.r_star = c.r_star;
    const double cx = c.domain.cx(), cy = c.domain.cy();
    spec.omega = Rect{cx - c.r, cy - c.r, 2 * c.r, 2 * c.r};
    spec.omega_star = Rect{cx - c.r_star, cy - c.r_star, 2 * c.r_star, 2 * c.r_star};
    spec.n = c.sweep_n;
    spec.snapshots = c.sweep_snapshots;

    HomogReport rep;
    rep.seed = seed;
    const SweepTable sweep = epsilon_sweep(cell, c.eps_list, c.domain, c.resolution, spec);
    rep.a0 = sweep.a0;
    rep.sweep = sweep;
    const CellProblemResult cp = cell_problem(cell);
    rep.cell_residual = cp.residual_rel;

    // Q estimator across the ladder, against sqrt(lambda_n) of the same runs
    const TraceKind trace = (c.trace == "neumann") ? TraceKind::Neumann : TraceKind::Dirichlet;
    for (const double eps : c.eps_list) {
        const CoefficientField field =
            periodic_field(cell, eps, c.domain, c.resolution, c.resolution);
        PatchPair patch;
        if (spec.ellipse)
            patch = make_ellipse_patch(field, sweep.a0, cx, cy, c.r, c.r_star);
        else
            patch = make_rect_patch(field, spec.omega, spec.omega_star, c.domain);
        PatchOperator op(patch);
        const LocalSpan span = homogenized_trace_space(op, sweep.a0, spec.n, trace);
        const double q = q_estimator(op, span);
        double lam_n = 0.0;
        for (const auto& row : sweep.rows)
            if (row.eps == eps && row.i == spec.n) lam_n = row.lambda_eps;
        HomogReport::QRow qr;
        qr.eps = eps;
        qr.q = q;
        qr.sqrt_lambda_n = std::sqrt(std::max(0.0, lam_n));
        qr.diff = std::abs(qr.q - qr.sqrt_lambda_n);
        rep.q_rows.push_back(qr);
    }

    auto csv = open_out(out_dir, "report.csv");
    csv << "eps,i,lambda_eps,lambda_ref,deviation\n";
    for (const auto& r : sweep.rows)
        csv << fmt(r.eps) << "," << r.i << "," << fmt(r.lambda_eps) << "," << fmt(r.lambda_ref)
            << "," << fmt(r.deviation) << "\n";
    auto qcsv = open_out(out_dir, "q_estimator.csv");
    qcsv << "eps,q,sqrt_lambda_n,diff\n";
    for (const auto& r : rep.q_rows)
        qcsv << fmt(r.eps) << "," << fmt(r.q) << "," << fmt(r.sqrt_lambda_n) << "," << fmt(r.diff)
             << "\n";
    auto ccsv = open_out(out_dir, "cell.csv");
    ccsv << "a11,a12,a22,residual_rel\n";
    ccsv << fmt(rep.a0.a11) << "," << fmt(rep.a0.a12) << "," << fmt(rep.a0.a22) << ","
         << fmt(rep.cell_residual) << "\n";
    auto xcsv = open_out(out_dir, "correctors.csv");
    xcsv << "x,y,w1,w2\n";
    const Mesh& cm = *cp.corrector_x.mesh;
    for (int id = 0; id < cm.node_count(); ++id)
        xcsv << fmt(cm.node_x(id)) << "," << fmt(cm.node_y(id)) << ","
             << fmt(cp.corrector_x.values[id]) << "," << fmt(cp.corrector_y.values[id]) << "\n";
    auto sum = open_out(out_dir, "summary.txt");
    sum << "scenario: homog\n";
    sum << "generated: " << timestamp() << "\n";
    sum << "seed: " << seed << "\n";
    sum << "cell: " << c.cell << " (a = " << fmt(c.cell_a) << ", b = " << fmt(c.cell_b) << ")\n";
    sum << "A0 = [" << fmt(rep.a0.a11) << " " << fmt(rep.a0.a12) << "; " << fmt(rep.a0.a12) << " "
        << fmt(rep.a0.a22) << "]\n";
    sum << "cell residual: " << fmt(rep.cell_residual) << "\n";
    return rep;
}

int run_validate(const ScenarioConfig& c, const std::string& out_dir, std::uint64_t seed) {
    auto sum = open_out(out_dir, "summary.txt");
    sum << "scenario: validate\ngenerated: " << timestamp() << "\nseed: " << seed << "\n";
    int failures = 0;
    auto check = [&](const std::string& name, bool ok) {
        sum << (ok ? "[PASS] " : "[FAIL] ") << name << "\n";
        std::cout << (ok ? "[PASS] " : "[FAIL] ") << name << "\n";
        if (!ok) ++failures;
    };

    // partition of unity invariants
    const CoefficientField f1 = constant_field(SymMat2::identity(), Rect{0, 0, 1, 1}, 64, 64);
    const MeshPtr fine = build_mesh(Rect{0, 0, 1, 1}, 64, 64, f1);
    const auto [cover, pu] = build_cover_and_pu(Rect{0, 0, 1, 1}, 8, fine);
    check("pu sum equals one within 1e-12", pu.sum_defect <= 1e-12);
    check("pu bounded by one", pu.c1 <= 1.0 + 1e-12);
    check("pu gradient constant finite", pu.c2 > 0.0 && pu.c2 < 10.0);

    // kernel invariants on a seeded two-phase field
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    std::vector<SymMat2> cells(64 * 64);
    for (auto& m : cells) m = SymMat2::isotropic(coin(rng) < 0.5 ? 1.0 : 10.0);
    const CoefficientField f2(Rect{0, 0, 1, 1}, 64, 64, cells);
    const MeshPtr mesh2 = build_mesh(Rect{0, 0, 1, 1}, 64, 64, f2);
    const SparseSystem k2 = assemble_stiffness(*mesh2);
    const double kmax = [&] {
        double m = 0;
        for (int col = 0; col < k2.matrix.outerSize(); ++col)
            for (SparseMat::InnerIterator it(k2.matrix, col); it; ++it)
                m = std::max(m, std::abs(it.value()));
        return m;
    }();
    const SparseMat diff = SparseMat(k2.matrix - SparseMat(k2.matrix.transpose()));
    double asym = 0;
    for (int col = 0; col < diff.outerSize(); ++col)
        for (SparseMat::InnerIterator it(diff, col); it; ++it)
            asym = std::max(asym, std::abs(it.value()));
    check("stiffness symmetric within 1e-12", asym <= 1e-12 * kmax);
    const Vec ones = Vec::Ones(mesh2->node_count());
    check("constants in the stiffness nullspace", (k2.matrix * ones).cwiseAbs().maxCoeff() <=
                                                      1e-12 * kmax);

    // Caccioppoli spot checks on random A-harmonic samples
    bool cacc_ok = true;
    {
        PatchPair patch = make_rect_patch(f2, Rect{0.25, 0.25, 0.5, 0.5}, Rect{0, 0, 1, 1},
                                          Rect{-1, -1, 3, 3});
        PatchOperator op(patch);
        const auto snaps = snapshots_poly_neumann(op, 8);
        std::normal_distribution<double> gauss;
        for (int t = 0; t < 20 && cacc_ok; ++t) {
            NodalField u = NodalField::zeros(patch.mesh);
            for (const auto& s : snaps) u.values += gauss(rng) * s.field.values;
            const auto res = caccioppoli_check(u, op.stiffness(), patch.omega_region, f2.beta(),
                                               0.25);
            cacc_ok = cacc_ok && res.ok;
        }
    }
    check("caccioppoli bound on random harmonic samples", cacc_ok);

    // restriction pencil range
    bool range_ok = true;
    {
        PatchPair patch = make_rect_patch(f2, Rect{0.25, 0.25, 0.5, 0.5}, Rect{0, 0, 1, 1},
                                          Rect{-1, -1, 3, 3});
        PatchOperator op(patch);
        const auto snaps = snapshots_poly_neumann(op, 10);
        const EigenPairs pairs = solve_pencil(op.pencil(snaps));
        for (int i = 0; i < pairs.retained_rank; ++i) {
            range_ok = range_ok && pairs.values[i] >= -1e-9 && pairs.values[i] <= 1.0 + 1e-9;
            if (i + 1 < pairs.retained_rank)
                range_ok = range_ok && pairs.values[i] >= pairs.values[i + 1] - 1e-12;
        }
    }
    check("restriction eigenvalues in [0,1], sorted", range_ok);

    // config round trip
    ScenarioConfig c2 = c;
    c2.disks.push_back(Disk{0.1, 0.2, 0.05});
    check("config round-trips through serialize/parse", parse_config(serialize_config(c2)) == c2);

    auto csv = open_out(out_dir, "report.csv");
    csv << "check,passed\n";
    csv << "all," << (failures == 0 ? 1 : 0) << "\n";
    return failures == 0 ? 0 : 1;
}

int run_solve(const ScenarioConfig& c, const std::string& out_dir, int workers,
              std::uint64_t seed) {
    const CoefficientField field = build_field(c, seed);
    const int nx = static_cast<int>(std::llround(c.domain.width * c.resolution));
    const int ny = static_cast<int>(std::llround(c.domain.height * c.resolution));
    if (nx % c.m != 0 || ny % c.m != 0)
        throw ConfigError("solve: resolution must be divisible by the cover size m");
    const MeshPtr fine = build_mesh(c.domain, nx, ny, field);
    const SparseSystem k_fine = assemble_stiffness(*fine);
    const auto [cover, pu] = build_cover_and_pu(c.domain, c.m, fine, c.star_cells);

    ProblemData data;
    data.f = const_source(c);
    data.g = linear_flux(c);

    LocalSpaceSpec spec;
    spec.family = (c.family == "polynomial") ? BasisFamily::Polynomial : BasisFamily::Optimal;
    spec.dim = c.n + 1;
    spec.snapshots = c.snapshots;
    spec.rank_threshold = c.rank_threshold;

    const int np = static_cast<int>(cover.patches.size());
    std::vector<PatchBasisGlobal> bases(np);
    parallel_for(np, workers, [&](int i) {
        bases[i] = build_patch_basis(field, cover, i, *fine, spec, data);
    });
    const GlobalSolution sol = solve_gfem(fine, k_fine, pu, bases, data);

    auto scsv = open_out(out_dir, "solution.csv");
    scsv << "x,y,u\n";
    for (int id = 0; id < fine->node_count(); ++id)
        scsv << fmt(fine->node_x(id)) << "," << fmt(fine->node_y(id)) << ","
             << fmt(sol.fine.values[id]) << "\n";
    auto csv = open_out(out_dir, "report.csv");
    csv << "key,value\n";
    csv << "dofs," << sol.dofs << "\n";
    csv << "pruned_dofs," << sol.pruned_dofs << "\n";
    csv << "energy," << fmt(sol.energy) << "\n";
    csv << "residual_rel," << fmt(sol.residual_rel) << "\n";
    auto sum = open_out(out_dir, "summary.txt");
    sum << "scenario: solve\ngenerated: " << timestamp() << "\nseed: " << seed << "\n";
    sum << "dofs: " << sol.dofs << " (pruned " << sol.pruned_dofs << ")\n";
    sum << "energy: " << fmt(sol.energy) << "\nresidual: " << fmt(sol.residual_rel) << "\n";
    return 0;
}

int run_scenario(const ScenarioConfig& config, const std::string& out_dir, int workers,
                 std::uint64_t seed) {
    try {
        if (config.kind == "study") {
            const StudyReport rep = run_study(config, out_dir, workers, seed);
            bool decreasing = true;
            double prev = 1e300;
            for (const auto& r : rep.rows)
                if (r.family == "optimal") {
                    decreasing = decreasing && r.energy_rel < prev;
                    prev = r.energy_rel;
                }
            return decreasing ? 0 : 1;
        }
        if (config.kind == "nwidth") {
            run_nwidth(config, out_dir, seed);
            return 0;
        }
        if (config.kind == "homog") {
            run_homog(config, out_dir, seed);
            return 0;
        }
        if (config.kind == "validate") return run_validate(config, out_dir, seed);
        if (config.kind == "solve") return run_solve(config, out_dir, workers, seed);
        throw ConfigError("unknown scenario kind: " + config.kind);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

} // namespace msgfem
