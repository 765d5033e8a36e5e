#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <random>

#include "msgfem/coefficient_field.hpp"

using namespace msgfem;

namespace {
const Rect kUnit{0.0, 0.0, 1.0, 1.0};
}

TEST_CASE("constant_field coercivity bounds") {
    SUBCASE("identity") {
        const auto f = constant_field(SymMat2::identity(), kUnit, 8, 8);
        const auto [a, b] = coercivity_bounds(f);
        CHECK(a == doctest::Approx(1.0));
        CHECK(b == doctest::Approx(1.0));
    }
    SUBCASE("diagonal eigenvalues") {
        const auto f = constant_field(SymMat2::diagonal(2.0, 0.5), kUnit, 4, 4);
        CHECK(f.alpha() == doctest::Approx(0.5));
        CHECK(f.beta() == doctest::Approx(2.0));
    }
    SUBCASE("rotated anisotropic matrix keeps its eigenvalues") {
        const SymMat2 a = SymMat2::rotated(4.0, 1.0, M_PI / 6.0);
        // independent oracle: dense eigensolver on the same matrix
        Eigen::Matrix2d m;
        m << a.a11, a.a12, a.a12, a.a22;
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(m);
        const auto f = constant_field(a, kUnit, 4, 4);
        CHECK(f.alpha() == doctest::Approx(es.eigenvalues()[0]).epsilon(1e-12));
        CHECK(f.beta() == doctest::Approx(es.eigenvalues()[1]).epsilon(1e-12));
        CHECK(f.alpha() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(f.beta() == doctest::Approx(4.0).epsilon(1e-12));
    }
    SUBCASE("non-SPD rejected") {
        CHECK_THROWS_AS(constant_field(SymMat2{1.0, 2.0, 1.0}, kUnit, 2, 2), ValidationError);
        CHECK_THROWS_AS(constant_field(SymMat2{-1.0, 0.0, 1.0}, kUnit, 2, 2), ValidationError);
    }
}

TEST_CASE("periodic_field tiling") {
    // 2x2 checkerboard unit cell, phases 1 and 9
    std::vector<SymMat2> cells = {SymMat2::isotropic(1), SymMat2::isotropic(9),
                                  SymMat2::isotropic(9), SymMat2::isotropic(1)};
    const CoefficientField cell(kUnit, 2, 2, cells);

    SUBCASE("constant unit cell stays constant") {
        const auto cst = constant_field(SymMat2::isotropic(3.0), kUnit, 2, 2);
        const auto f = periodic_field(cst, 1.0 / 4.0, kUnit, 8, 8);
        for (int j = 0; j < 8; ++j)
            for (int i = 0; i < 8; ++i) CHECK(f.cell(i, j).a11 == doctest::Approx(3.0));
    }
    SUBCASE("checkerboard at epsilon one-half tiles 4x4") {
        const auto f = periodic_field(cell, 0.5, kUnit, 4, 4);
        REQUIRE(f.cells_x() == 4);
        for (int j = 0; j < 4; ++j)
            for (int i = 0; i < 4; ++i) {
                const double expect = ((i + j) % 2 == 0) ? 1.0 : 9.0;
                CHECK(f.cell(i, j).a11 == doctest::Approx(expect));
            }
    }
    SUBCASE("vertical laminate, epsilon one-quarter gives 8 strips") {
        std::vector<SymMat2> lam = {SymMat2::isotropic(1), SymMat2::isotropic(10)};
        const CoefficientField lcell(kUnit, 2, 1, lam);
        const auto f = periodic_field(lcell, 0.25, kUnit, 8, 8);
        for (int j = 0; j < 8; ++j)
            for (int i = 0; i < 8; ++i) CHECK(f.cell(i, j).a11 == doctest::Approx(i % 2 ? 10 : 1));
        CHECK(f.alpha() == doctest::Approx(1.0));
        CHECK(f.beta() == doctest::Approx(10.0));
    }
    SUBCASE("exact epsilon-periodicity cellwise") {
        const auto f = periodic_field(cell, 0.25, kUnit, 16, 16);
        const int period = 4; // cells per period
        for (int j = 0; j < 16; ++j)
            for (int i = 0; i + period < 16; ++i)
                CHECK(f.cell(i, j) == f.cell(i + period, j));
        for (int j = 0; j + period < 16; ++j)
            for (int i = 0; i < 16; ++i) CHECK(f.cell(i, j) == f.cell(i, j + period));
    }
    SUBCASE("misaligned resolution rejected") {
        CHECK_THROWS_AS(periodic_field(cell, 0.25, kUnit, 6, 6), ValidationError);
        CHECK_THROWS_AS(periodic_field(cell, 0.3, kUnit, 8, 8), ValidationError);
    }
}

TEST_CASE("inclusion_field") {
    SUBCASE("zero disks equals constant field") {
        const auto f = inclusion_field(kUnit, 8, 8, {}, SymMat2::isotropic(2.0),
                                       InclusionValue::hole());
        for (int j = 0; j < 8; ++j)
            for (int i = 0; i < 8; ++i) {
                CHECK(!f.is_hole(i, j));
                CHECK(f.cell(i, j).a11 == doctest::Approx(2.0));
            }
    }
    SUBCASE("radius-zero disk is measure zero") {
        const auto f = inclusion_field(kUnit, 8, 8, {Disk{0.5, 0.5, 0.0}},
                                       SymMat2::identity(), InclusionValue::hole());
        CHECK(!f.has_holes());
    }
    SUBCASE("area fraction of a centered disk within 2 percent") {
        const Disk d{0.5, 0.5, std::sqrt(0.25 / M_PI)}; // 25% of the unit square
        const auto f = inclusion_field(kUnit, 256, 256, {d}, SymMat2::identity(),
                                       InclusionValue::hole());
        int holes = 0;
        for (int j = 0; j < 256; ++j)
            for (int i = 0; i < 256; ++i) holes += f.is_hole(i, j);
        const double frac = holes / (256.0 * 256.0);
        CHECK(frac == doctest::Approx(0.25).epsilon(0.02));
    }
    SUBCASE("finite-contrast inclusions carry the inclusion matrix") {
        const auto f = inclusion_field(kUnit, 64, 64, {Disk{0.5, 0.5, 0.2}},
                                       SymMat2::isotropic(1.0),
                                       InclusionValue::material(SymMat2::isotropic(100.0)));
        CHECK(!f.has_holes());
        CHECK(f.beta() == doctest::Approx(100.0));
        CHECK(f.cell(32, 32).a11 == doctest::Approx(100.0));
        CHECK(f.cell(1, 1).a11 == doctest::Approx(1.0));
    }
    SUBCASE("overlapping hole disks rejected, finite-contrast overlap allowed") {
        const std::vector<Disk> disks = {Disk{0.4, 0.5, 0.1}, Disk{0.45, 0.5, 0.1}};
        CHECK_THROWS_AS(inclusion_field(kUnit, 32, 32, disks, SymMat2::identity(),
                                        InclusionValue::hole()),
                        ValidationError);
        CHECK_NOTHROW(inclusion_field(kUnit, 32, 32, disks, SymMat2::identity(),
                                      InclusionValue::material(SymMat2::isotropic(2.0))));
    }
    SUBCASE("disk outside the domain rejected") {
        CHECK_THROWS_AS(inclusion_field(kUnit, 32, 32, {Disk{0.99, 0.5, 0.1}},
                                        SymMat2::identity(), InclusionValue::hole()),
                        ValidationError);
    }
}

TEST_CASE("clip_inclusions") {
    std::mt19937_64 rng(314);
    std::uniform_real_distribution<double> pos(0.1, 0.9), rad(0.01, 0.04);
    std::vector<Disk> disks;
    while (disks.size() < 20) {
        Disk d{pos(rng), pos(rng), rad(rng)};
        bool ok = d.inside(kUnit);
        for (const auto& o : disks) ok = ok && !d.overlaps(o);
        if (ok) disks.push_back(d);
    }
    const auto f = inclusion_field(kUnit, 128, 128, disks, SymMat2::identity(),
                                   InclusionValue::hole());
    const Rect patch{0.25, 0.25, 0.5, 0.5};

    SUBCASE("geometric oracle per disk") {
        const auto clipped = clip_inclusions(f, patch);
        // independent oracle: a disk survives iff it is entirely inside or
        // entirely outside the closed patch rectangle
        std::vector<Disk> expect;
        for (const auto& d : disks) {
            const bool strictly_inside = d.cx - d.r > patch.x0 && d.cx + d.r < patch.x1() &&
                                         d.cy - d.r > patch.y0 && d.cy + d.r < patch.y1();
            const bool outside = patch.distance(d.cx, d.cy) >= d.r;
            if (strictly_inside || outside) expect.push_back(d);
        }
        REQUIRE(clipped.layout().has_value());
        CHECK(clipped.layout()->disks.size() == expect.size());
        // hole cells must match the rebuilt field
        const auto rebuilt = inclusion_field(kUnit, 128, 128, expect, SymMat2::identity(),
                                             InclusionValue::hole());
        for (int j = 0; j < 128; ++j)
            for (int i = 0; i < 128; ++i) CHECK(clipped.is_hole(i, j) == rebuilt.is_hole(i, j));
    }
    SUBCASE("no disks near the boundary leaves the field identical") {
        const auto g = inclusion_field(kUnit, 64, 64, {Disk{0.5, 0.5, 0.05}},
                                       SymMat2::identity(), InclusionValue::hole());
        const auto clipped = clip_inclusions(g, Rect{0.0, 0.0, 0.25, 0.25});
        CHECK(clipped.layout()->disks.size() == 1);
    }
    SUBCASE("straddling disk leaves zero hole cells") {
        const auto g = inclusion_field(kUnit, 64, 64, {Disk{0.25, 0.5, 0.05}},
                                       SymMat2::identity(), InclusionValue::hole());
        const auto clipped = clip_inclusions(g, patch);
        CHECK(!clipped.has_holes());
    }
    SUBCASE("idempotent") {
        const auto once = clip_inclusions(f, patch);
        const auto twice = clip_inclusions(once, patch);
        CHECK(once.layout()->disks.size() == twice.layout()->disks.size());
        for (int j = 0; j < 128; ++j)
            for (int i = 0; i < 128; ++i) CHECK(once.is_hole(i, j) == twice.is_hole(i, j));
    }
}

TEST_CASE("bounds bracket every non-hole cell, mixed anisotropic field") {
    std::mt19937_64 rng(55);
    std::uniform_real_distribution<double> u(0.2, 5.0), ang(0.0, M_PI);
    std::vector<SymMat2> cells;
    for (int i = 0; i < 64; ++i) cells.push_back(SymMat2::rotated(u(rng), u(rng), ang(rng)));
    const CoefficientField f(kUnit, 8, 8, cells);
    // brute-force min/max via the closed-form 2x2 eigenvalues
    double lo = 1e300, hi = -1e300;
    for (const auto& c : cells) {
        const auto [a, b] = c.eigenvalues();
        lo = std::min(lo, a);
        hi = std::max(hi, b);
    }
    CHECK(f.alpha() == doctest::Approx(lo).epsilon(1e-12));
    CHECK(f.beta() == doctest::Approx(hi).epsilon(1e-12));
    for (const auto& c : cells) {
        const auto [a, b] = c.eigenvalues();
        CHECK(a >= f.alpha() - 1e-12);
        CHECK(b <= f.beta() + 1e-12);
    }
}

TEST_CASE("all-hole field rejected") {
    std::vector<SymMat2> cells(4, SymMat2::identity());
    std::vector<std::uint8_t> holes(4, 1);
    CHECK_THROWS_AS(CoefficientField(kUnit, 2, 2, cells, holes), ValidationError);
}
