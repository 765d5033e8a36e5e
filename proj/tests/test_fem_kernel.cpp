#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "msgfem/fem.hpp"
#include "msgfem/solver.hpp"

using namespace msgfem;
using Mat = Eigen::MatrixXd;

namespace {

const Rect kUnit{0.0, 0.0, 1.0, 1.0};

CoefficientField identity_field(int res = 1) {
    return constant_field(SymMat2::identity(), kUnit, res, res);
}

NodalField saddle(MeshPtr mesh) {
    return NodalField::sample(std::move(mesh), [](double x, double y) { return x * x - y * y; });
}

double flux_saddle(double x, double y, double nx, double ny) {
    return nx * 2.0 * x - ny * 2.0 * y; // normal derivative of x^2 - y^2
}

// Test-side oracles: errors against the analytic field, integrated with 3x3
// Gauss per element (the nodal interpolant coincides with the discrete
// solution for this reference, so nodal comparison would measure nothing).
template <class GradFn>
double energy_error_vs(const NodalField& u, GradFn grad_exact) {
    const Mesh& mesh = *u.mesh;
    static const double gp[3] = {0.1127016653792583, 0.5, 0.8872983346207417};
    static const double gw[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
    double acc = 0.0;
    for (int e = 0; e < mesh.elem_count(); ++e) {
        if (!mesh.elem_active(e)) continue;
        const auto nodes = mesh.elem_nodes(e);
        const int i = e % mesh.nx(), j = e / mesh.nx();
        const double x0 = mesh.rect().x0 + i * mesh.hx();
        const double y0 = mesh.rect().y0 + j * mesh.hy();
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) {
                const double xi = gp[a], eta = gp[b];
                const double dxi[4] = {-(1 - eta), (1 - eta), eta, -eta};
                const double deta[4] = {-(1 - xi), -xi, xi, (1 - xi)};
                double ux = 0, uy = 0;
                for (int q = 0; q < 4; ++q) {
                    ux += u.values[nodes[q]] * dxi[q] / mesh.hx();
                    uy += u.values[nodes[q]] * deta[q] / mesh.hy();
                }
                const auto [gx, gy] = grad_exact(x0 + xi * mesh.hx(), y0 + eta * mesh.hy());
                acc += gw[a] * gw[b] * mesh.hx() * mesh.hy() *
                       ((ux - gx) * (ux - gx) + (uy - gy) * (uy - gy));
            }
    }
    return std::sqrt(acc);
}

template <class Fn>
double l2_error_vs(const NodalField& u, Fn exact) {
    const Mesh& mesh = *u.mesh;
    static const double gp[3] = {0.1127016653792583, 0.5, 0.8872983346207417};
    static const double gw[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
    double acc = 0.0;
    for (int e = 0; e < mesh.elem_count(); ++e) {
        if (!mesh.elem_active(e)) continue;
        const auto nodes = mesh.elem_nodes(e);
        const int i = e % mesh.nx(), j = e / mesh.nx();
        const double x0 = mesh.rect().x0 + i * mesh.hx();
        const double y0 = mesh.rect().y0 + j * mesh.hy();
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) {
                const double xi = gp[a], eta = gp[b];
                const double n1 = (1 - xi) * (1 - eta), n2 = xi * (1 - eta), n3 = xi * eta,
                             n4 = (1 - xi) * eta;
                const double uh = u.values[nodes[0]] * n1 + u.values[nodes[1]] * n2 +
                                  u.values[nodes[2]] * n3 + u.values[nodes[3]] * n4;
                const double ue = exact(x0 + xi * mesh.hx(), y0 + eta * mesh.hy());
                acc += gw[a] * gw[b] * mesh.hx() * mesh.hy() * (uh - ue) * (uh - ue);
            }
    }
    return std::sqrt(acc);
}

std::pair<double, double> grad_saddle(double x, double y) { return {2.0 * x, -2.0 * y}; }

} // namespace

// Hand-integrated one-element oracles, frozen once:
//   stiffness (A = I, unit square): diag 2/3, edge -1/6, opposite corner -1/3
//   mass (w = 1, unit square):      diag 1/9, edge 1/18, opposite corner 1/36
TEST_CASE("single-element matrices match hand integration exactly") {
    const auto f = identity_field();
    const auto mesh = build_mesh(kUnit, 1, 1, f);
    const auto k = assemble_stiffness(*mesh);
    const auto km = Mat(k.matrix);
    const double e = 1e-14;
    // node order: 0 = (0,0), 1 = (1,0), 2 = (0,1), 3 = (1,1); opposite pairs (0,3), (1,2)
    for (int i = 0; i < 4; ++i) CHECK(km(i, i) == doctest::Approx(2.0 / 3.0).epsilon(e));
    CHECK(km(0, 3) == doctest::Approx(-1.0 / 3.0).epsilon(e));
    CHECK(km(1, 2) == doctest::Approx(-1.0 / 3.0).epsilon(e));
    CHECK(km(0, 1) == doctest::Approx(-1.0 / 6.0).epsilon(e));
    CHECK(km(0, 2) == doctest::Approx(-1.0 / 6.0).epsilon(e));
    CHECK(km(1, 3) == doctest::Approx(-1.0 / 6.0).epsilon(e));
    CHECK(km(2, 3) == doctest::Approx(-1.0 / 6.0).epsilon(e));

    const auto m = assemble_weighted_mass(*mesh, [](int) { return 1.0; });
    const auto mm = Mat(m.matrix);
    for (int i = 0; i < 4; ++i) CHECK(mm(i, i) == doctest::Approx(1.0 / 9.0).epsilon(e));
    CHECK(mm(0, 3) == doctest::Approx(1.0 / 36.0).epsilon(e));
    CHECK(mm(1, 2) == doctest::Approx(1.0 / 36.0).epsilon(e));
    CHECK(mm(0, 1) == doctest::Approx(1.0 / 18.0).epsilon(e));
    CHECK(mm(2, 3) == doctest::Approx(1.0 / 18.0).epsilon(e));
}

TEST_CASE("mesh construction and hole masking") {
    SUBCASE("one element on the unit square") {
        const auto f = identity_field();
        const auto mesh = build_mesh(kUnit, 1, 1, f);
        CHECK(mesh->node_count() == 4);
        CHECK(mesh->elem_count() == 1);
    }
    SUBCASE("2x2 with one hole cell leaves 3 active elements") {
        std::vector<SymMat2> cells(4, SymMat2::identity());
        std::vector<std::uint8_t> holes = {0, 0, 0, 1};
        const CoefficientField f(kUnit, 2, 2, cells, holes);
        const auto mesh = build_mesh(kUnit, 2, 2, f);
        CHECK(mesh->active_elem_count() == 3);
    }
    SUBCASE("rectangular mesh node count") {
        const auto f = constant_field(SymMat2::identity(), Rect{0, 0, 2, 1}, 2, 2);
        const auto mesh = build_mesh(Rect{0, 0, 2, 1}, 4, 2, f);
        CHECK(mesh->node_count() == 15);
    }
    SUBCASE("misaligned mesh rejected") {
        const auto f = constant_field(SymMat2::identity(), kUnit, 4, 4);
        CHECK_THROWS_AS(build_mesh(kUnit, 3, 3, f), ValidationError);
        CHECK_NOTHROW(build_mesh(kUnit, 8, 8, f)); // refinement inside cells is fine
    }
}

TEST_CASE("stiffness invariants") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.5, 4.0);
    std::vector<SymMat2> cells;
    for (int i = 0; i < 16; ++i) cells.push_back(SymMat2::rotated(u(rng), u(rng), u(rng)));
    const CoefficientField f(kUnit, 4, 4, cells);
    const auto mesh = build_mesh(kUnit, 4, 4, f);
    const auto k = assemble_stiffness(*mesh);
    const double kmax = Mat(k.matrix).cwiseAbs().maxCoeff();

    SUBCASE("symmetry to 1e-12") {
        const Mat km(k.matrix);
        CHECK((km - km.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * kmax);
    }
    SUBCASE("constants in the nullspace") {
        const Vec ones = Vec::Ones(mesh->node_count());
        CHECK((k.matrix * ones).cwiseAbs().maxCoeff() <= 1e-12 * kmax);
    }
    SUBCASE("linearity in the coefficient") {
        std::vector<SymMat2> scaled;
        for (const auto& c : cells) scaled.push_back(c * 7.0);
        const CoefficientField f7(kUnit, 4, 4, scaled);
        const auto k7 = assemble_stiffness(*build_mesh(kUnit, 4, 4, f7));
        CHECK((Mat(k7.matrix) - 7.0 * Mat(k.matrix)).cwiseAbs().maxCoeff() <= 1e-12 * kmax);
    }
    SUBCASE("energy-norm identity") {
        const auto u_field = NodalField::sample(mesh, [](double x, double y) {
            return std::sin(3 * x) + y * y - 0.3 * x * y;
        });
        const double via_norm = norm(u_field, NormKind::Energy);
        const double via_matrix = std::sqrt(u_field.values.dot(k.matrix * u_field.values));
        CHECK(via_norm == doctest::Approx(via_matrix).epsilon(1e-12));
    }
}

TEST_CASE("mass matrix properties") {
    const auto f = identity_field(4);
    const auto mesh = build_mesh(kUnit, 4, 4, f);
    SUBCASE("total mass equals weighted area") {
        const auto m = assemble_weighted_mass(*mesh, [](int) { return 3.0; });
        const Vec ones = Vec::Ones(mesh->node_count());
        CHECK(ones.dot(m.matrix * ones) == doctest::Approx(3.0).epsilon(1e-13));
    }
    SUBCASE("zero weight gives zero matrix") {
        const auto m = assemble_weighted_mass(*mesh, [](int) { return 0.0; });
        CHECK(Mat(m.matrix).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("negative weight rejected") {
        CHECK_THROWS_AS(assemble_weighted_mass(*mesh, [](int) { return -1.0; }), ValidationError);
    }
}

TEST_CASE("norms") {
    const auto f = identity_field(4);
    const auto mesh = build_mesh(kUnit, 4, 4, f);
    SUBCASE("constant field has zero energy") {
        const auto u = NodalField::sample(mesh, [](double, double) { return 5.0; });
        CHECK(norm(u, NormKind::Energy) == doctest::Approx(0.0));
    }
    SUBCASE("u = x has unit energy") {
        const auto u = NodalField::sample(mesh, [](double x, double) { return x; });
        CHECK(norm(u, NormKind::Energy) == doctest::Approx(1.0).epsilon(1e-13));
    }
    SUBCASE("half region") {
        const auto u = NodalField::sample(mesh, [](double x, double) { return x; });
        CHECK(norm(u, NormKind::Energy, Region::rect(Rect{0, 0, 0.5, 1})) ==
              doctest::Approx(std::sqrt(0.5)).epsilon(1e-13));
    }
    SUBCASE("region outside mesh rejected") {
        const auto u = NodalField::zeros(mesh);
        CHECK_THROWS_AS(norm(u, NormKind::L2, Region::rect(Rect{0, 0, 2, 2})), ValidationError);
    }
    SUBCASE("l2star uses the cellwise upper eigenvalue") {
        const auto f2 = constant_field(SymMat2::diagonal(1.0, 9.0), kUnit, 4, 4);
        const auto mesh2 = build_mesh(kUnit, 4, 4, f2);
        const auto u = NodalField::sample(mesh2, [](double, double) { return 2.0; });
        CHECK(norm(u, NormKind::L2Star) == doctest::Approx(6.0).epsilon(1e-13)); // sqrt(9*4)
    }
}

TEST_CASE("neumann solve") {
    SUBCASE("zero data gives zero") {
        const auto f = identity_field(8);
        const auto mesh = build_mesh(kUnit, 8, 8, f);
        const auto k = assemble_stiffness(*mesh);
        const auto u = solve_neumann(mesh, k, Vec::Zero(mesh->node_count()));
        CHECK(u.values.cwiseAbs().maxCoeff() <= 1e-14);
    }
    SUBCASE("harmonic reference with O(h) energy error, halving per refinement") {
        std::vector<double> errs;
        for (int n : {16, 32, 64}) {
            const auto f = identity_field(n);
            const auto mesh = build_mesh(kUnit, n, n, f);
            const auto k = assemble_stiffness(*mesh);
            const Vec load = assemble_boundary_load(*mesh, EdgeSet::all_outer(), flux_saddle);
            NeumannSolver solver(mesh, k);
            solver.project_load = true; // quadrature leaves an O(h) defect
            const auto u = solver.solve(load);
            errs.push_back(energy_error_vs(u, grad_saddle));
        }
        const double exact = std::sqrt(8.0 / 3.0); // ||x^2-y^2||_E on the unit square
        CHECK(errs.back() / exact < 0.05);
        for (std::size_t i = 0; i + 1 < errs.size(); ++i) {
            const double ratio = errs[i] / errs[i + 1];
            CHECK(ratio > 1.6); // halves up to +-20%
            CHECK(ratio < 2.4);
        }
    }
    SUBCASE("inconsistent data rejected with the measured defect") {
        const auto f = identity_field(8);
        const auto mesh = build_mesh(kUnit, 8, 8, f);
        const auto k = assemble_stiffness(*mesh);
        Vec load = Vec::Zero(mesh->node_count());
        load[0] = 1.0; // net source without sink
        CHECK_THROWS_AS(solve_neumann(mesh, k, load), SolverError);
    }
    SUBCASE("adding a constant leaves K u unchanged") {
        const auto f = identity_field(8);
        const auto mesh = build_mesh(kUnit, 8, 8, f);
        const auto k = assemble_stiffness(*mesh);
        const Vec load = assemble_boundary_load(*mesh, EdgeSet::all_outer(), flux_saddle);
        NeumannSolver solver(mesh, k);
        solver.project_load = true;
        const auto u = solver.solve(load);
        const Vec shifted = u.values + Vec::Ones(mesh->node_count());
        CHECK((k.matrix * shifted - k.matrix * u.values).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("dirichlet solve") {
    const auto f = identity_field(16);
    const auto mesh = build_mesh(kUnit, 16, 16, f);
    const auto k = assemble_stiffness(*mesh);
    const auto bnodes = mesh->outer_boundary_nodes();

    SUBCASE("constant boundary data gives the constant") {
        const Vec bvals = Vec::Constant(static_cast<int>(bnodes.size()), 4.2);
        const auto u = solve_dirichlet(mesh, k, bnodes, bvals, Vec::Zero(mesh->node_count()));
        for (int id : mesh->active_nodes()) CHECK(u.values[id] == doctest::Approx(4.2));
    }
    SUBCASE("harmonic trace reproduces the analytic interior to O(h^2) in L2") {
        std::vector<double> errs;
        for (int n : {8, 16, 32}) {
            const auto fr = identity_field(n);
            const auto m = build_mesh(kUnit, n, n, fr);
            const auto kr = assemble_stiffness(*m);
            const auto bn = m->outer_boundary_nodes();
            Vec bvals(static_cast<int>(bn.size()));
            for (std::size_t i = 0; i < bn.size(); ++i) {
                const double x = m->node_x(bn[i]), y = m->node_y(bn[i]);
                bvals[static_cast<int>(i)] = x * x - y * y;
            }
            const auto u = solve_dirichlet(m, kr, bn, bvals, Vec::Zero(m->node_count()));
            const NodalField err(m, u.values - saddle(m).values);
            errs.push_back(norm(err, NormKind::L2));
        }
        for (std::size_t i = 0; i + 1 < errs.size(); ++i)
            CHECK(errs[i] / errs[i + 1] > 3.0); // ~4x per refinement
    }
    SUBCASE("empty boundary set rejected") {
        CHECK_THROWS_AS(solve_dirichlet(mesh, k, {}, Vec(), Vec::Zero(mesh->node_count())),
                        ValidationError);
    }
    SUBCASE("re-imposing a Neumann solution's trace reproduces it") {
        const Vec load = assemble_boundary_load(*mesh, EdgeSet::all_outer(), flux_saddle);
        NeumannSolver ns(mesh, k);
        ns.project_load = true;
        const auto un = ns.solve(load);
        Vec bvals(static_cast<int>(bnodes.size()));
        for (std::size_t i = 0; i < bnodes.size(); ++i)
            bvals[static_cast<int>(i)] = un.values[bnodes[i]];
        const auto ud = solve_dirichlet(mesh, k, bnodes, bvals, Vec::Zero(mesh->node_count()));
        CHECK((ud.values - un.values).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("harmonic extension") {
    SUBCASE("dirichlet trace of a constant is constant (mean-zeroed)") {
        const auto f = identity_field(8);
        const auto mesh = build_mesh(kUnit, 8, 8, f);
        const auto k = assemble_stiffness(*mesh);
        HarmonicBC bc;
        bc.kind = HarmonicBC::Kind::DirichletTrace;
        bc.trace = [](double, double) { return 3.0; };
        const auto u = harmonic_extension(mesh, k, bc);
        CHECK(u.values.cwiseAbs().maxCoeff() < 1e-12);
    }
    SUBCASE("neumann flux of Re z^2 gives the mean-zero saddle") {
        const auto f = identity_field(32);
        const auto mesh = build_mesh(kUnit, 32, 32, f);
        const auto k = assemble_stiffness(*mesh);
        HarmonicBC bc;
        bc.flux = flux_saddle;
        const auto u = harmonic_extension(mesh, k, bc);
        auto ref = saddle(mesh);
        const double mean = field_mean(ref);
        for (int id : mesh->active_nodes()) ref.values[id] -= mean;
        const NodalField err(mesh, ref.values - u.values);
        CHECK(norm(err, NormKind::Energy) / std::sqrt(8.0 / 3.0) < 0.1);
        CHECK(std::abs(field_mean(u)) < 1e-12);
    }
    SUBCASE("hole-masked mesh keeps zero interior residual at hole rows") {
        const auto f = inclusion_field(kUnit, 32, 32, {Disk{0.5, 0.5, 0.15}},
                                       SymMat2::identity(), InclusionValue::hole());
        const auto mesh = build_mesh(kUnit, 32, 32, f);
        const auto k = assemble_stiffness(*mesh);
        HarmonicBC bc;
        bc.flux = flux_saddle;
        const auto u = harmonic_extension(mesh, k, bc);
        CHECK(interior_residual(*mesh, k, u) < 1e-10);
    }
}

TEST_CASE("galerkin orthogonality of the discrete solves") {
    const auto f = identity_field(16);
    const auto mesh = build_mesh(kUnit, 16, 16, f);
    const auto k = assemble_stiffness(*mesh);
    const Vec load = assemble_boundary_load(*mesh, EdgeSet::all_outer(), flux_saddle);
    NeumannSolver ns(mesh, k);
    ns.project_load = true;
    const auto u = ns.solve(load);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    const Vec projected_load = [&] {
        Vec l = load;
        l.array() -= l.sum() / l.size();
        return l;
    }();
    for (int trial = 0; trial < 10; ++trial) {
        Vec v(mesh->node_count());
        for (int i = 0; i < v.size(); ++i) v[i] = g(rng);
        v.array() -= v.mean();
        const double b = v.dot(k.matrix * u.values);
        const double fv = v.dot(projected_load);
        const double scale = norm(u, NormKind::Energy) * norm(NodalField(mesh, v), NormKind::Energy);
        CHECK(std::abs(b - fv) <= 1e-9 * std::max(scale, 1.0));
    }
}

TEST_CASE("caccioppoli inequality") {
    SUBCASE("constant is trivially fine") {
        const auto f = identity_field(16);
        const auto mesh = build_mesh(kUnit, 16, 16, f);
        const auto k = assemble_stiffness(*mesh);
        const auto u = NodalField::sample(mesh, [](double, double) { return 1.0; });
        const auto r = caccioppoli_check(u, k, Region::rect(Rect{0.25, 0.25, 0.5, 0.5}), 1.0, 0.25);
        CHECK(r.ok);
        CHECK(r.lhs == doctest::Approx(0.0));
    }
    SUBCASE("saddle on the centered half-square") {
        const auto f = identity_field(64);
        const auto mesh = build_mesh(kUnit, 64, 64, f);
        const auto k = assemble_stiffness(*mesh);
        HarmonicBC bc;
        bc.flux = flux_saddle;
        const auto u = harmonic_extension(mesh, k, bc);
        const auto r = caccioppoli_check(u, k, Region::rect(Rect{0.25, 0.25, 0.5, 0.5}), 1.0, 0.25);
        CHECK(r.ok);
        CHECK(r.lhs > 0.0);
        CHECK(r.lhs < r.rhs);
    }
    SUBCASE("non-harmonic input rejected") {
        const auto f = identity_field(16);
        const auto mesh = build_mesh(kUnit, 16, 16, f);
        const auto k = assemble_stiffness(*mesh);
        const auto u = NodalField::sample(mesh, [](double x, double) { return x * x; });
        CHECK_THROWS_AS(caccioppoli_check(u, k, Region::rect(Rect{0.25, 0.25, 0.5, 0.5}), 1.0, 0.25),
                        ValidationError);
    }
}
