#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "msgfem/spectral.hpp"
#include "pencil_oracle.hpp"

using namespace msgfem;

namespace {

Mat random_spd(int m, std::mt19937_64& rng, double lo = 0.5, double hi = 2.0) {
    std::uniform_real_distribution<double> ang(0.0, 1.0);
    Mat q = Mat::Random(m, m);
    // Orthonormalize columns (Gram-Schmidt is fine at this size).
    for (int j = 0; j < m; ++j) {
        for (int k = 0; k < j; ++k) q.col(j) -= q.col(k).dot(q.col(j)) * q.col(k);
        q.col(j).normalize();
    }
    Mat d = Mat::Zero(m, m);
    for (int i = 0; i < m; ++i) d(i, i) = lo + (hi - lo) * ang(rng);
    return q * d * q.transpose();
}

Mat random_sym(int m, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Mat s(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = i; j < m; ++j) s(i, j) = s(j, i) = u(rng);
    return s;
}

} // namespace

TEST_CASE("jacobi matches the determinant-search oracle on random pencils") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 40; ++trial) {
        const int m = 2 + static_cast<int>(rng() % 5); // 2..6
        ReducedPencil p;
        p.t = random_spd(m, rng);
        p.s = random_sym(m, rng);
        const auto oracle = test_oracle::pencil_eigenvalues_bruteforce(p.s, p.t);
        REQUIRE(static_cast<int>(oracle.size()) == m);
        const EigenPairs got = solve_pencil(p);
        REQUIRE(got.retained_rank == m);
        for (int i = 0; i < m; ++i) {
            // oracle ascending, solver descending
            CHECK(got.values[i] == doctest::Approx(oracle[m - 1 - i]).epsilon(1e-8));
        }
    }
}

TEST_CASE("filter_rank basics") {
    SUBCASE("identity Gram keeps full rank with identity transform") {
        const auto f = filter_rank(Mat::Identity(3, 3));
        CHECK(f.rank == 3);
        CHECK((f.transform - Mat::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-14);
    }
    SUBCASE("zero row and column drop rank") {
        Mat t = Mat::Identity(4, 4);
        t(2, 2) = 0.0;
        CHECK(filter_rank(t).rank == 3);
    }
    SUBCASE("duplicated snapshot drops rank") {
        std::mt19937_64 rng(7);
        Mat u = Mat::Random(5, 4);
        u.col(3) = u.col(1); // identical snapshot
        Mat t = u.transpose() * u;
        CHECK(filter_rank(t).rank == 3);
    }
    SUBCASE("negative eigenvalue is an assembly-bug signal") {
        Mat t = Mat::Identity(2, 2);
        t(1, 1) = -0.5;
        CHECK_THROWS_AS(filter_rank(t), SpectralError);
    }
}

TEST_CASE("solve_pencil on closed-form pencils") {
    SUBCASE("S equal to T gives all eigenvalues one") {
        std::mt19937_64 rng(11);
        ReducedPencil p;
        p.t = random_spd(4, rng);
        p.s = p.t;
        const auto e = solve_pencil(p);
        for (int i = 0; i < e.retained_rank; ++i)
            CHECK(e.values[i] == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("diagonal pencil") {
        ReducedPencil p;
        p.s = Mat::Zero(2, 2);
        p.s(0, 0) = 4.0;
        p.s(1, 1) = 1.0;
        p.t = Mat::Identity(2, 2);
        const auto e = solve_pencil(p);
        CHECK(e.values[0] == doctest::Approx(4.0));
        CHECK(e.values[1] == doctest::Approx(1.0));
        CHECK(std::abs(e.vectors(0, 0)) == doctest::Approx(1.0));
        CHECK(std::abs(e.vectors(1, 1)) == doctest::Approx(1.0));
    }
    SUBCASE("degenerate snapshot set is rejected") {
        ReducedPencil p;
        p.s = Mat::Identity(2, 2);
        p.t = Mat::Zero(2, 2);
        CHECK_THROWS_AS(solve_pencil(p), SpectralError);
    }
}

TEST_CASE("pencil invariants") {
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 20; ++trial) {
        const int m = 3 + static_cast<int>(rng() % 4);
        ReducedPencil p;
        p.t = random_spd(m, rng);
        p.s = random_spd(m, rng, 0.1, 1.0);
        const auto e = solve_pencil(p);

        SUBCASE("") {}
        // generalized residual
        const double scale = p.s.norm() + p.t.norm();
        for (int i = 0; i < e.retained_rank; ++i) {
            const Eigen::VectorXd r = p.s * e.vectors.col(i) - e.values[i] * (p.t * e.vectors.col(i));
            CHECK(r.norm() <= 1e-8 * scale);
        }
        // T-orthonormality
        const Mat g = e.vectors.transpose() * p.t * e.vectors;
        CHECK((g - Mat::Identity(e.retained_rank, e.retained_rank)).cwiseAbs().maxCoeff() < 1e-8);
        // descending order
        for (int i = 0; i + 1 < e.retained_rank; ++i) CHECK(e.values[i] >= e.values[i + 1] - 1e-12);
        // scale invariance
        ReducedPencil ps;
        ps.s = 7.5 * p.s;
        ps.t = 7.5 * p.t;
        const auto es = solve_pencil(ps);
        for (int i = 0; i < e.retained_rank; ++i)
            CHECK(es.values[i] == doctest::Approx(e.values[i]).epsilon(1e-12));
    }
}

TEST_CASE("eigenvalues grow monotonically with the snapshot set (Courant-Fischer)") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 10; ++trial) {
        const int m = 6;
        const Mat t_full = random_spd(m, rng);
        const Mat s_full = random_spd(m, rng, 0.05, 0.9);
        for (int sub = 3; sub < m; ++sub) {
            ReducedPencil small{s_full.topLeftCorner(sub, sub), t_full.topLeftCorner(sub, sub), {}};
            ReducedPencil big{s_full.topLeftCorner(sub + 1, sub + 1),
                              t_full.topLeftCorner(sub + 1, sub + 1),
                              {}};
            const auto es = solve_pencil(small);
            const auto eb = solve_pencil(big);
            for (int i = 0; i < es.retained_rank; ++i)
                CHECK(eb.values[i] >= es.values[i] - 1e-10);
        }
    }
}
