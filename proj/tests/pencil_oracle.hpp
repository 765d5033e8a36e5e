#pragma once

// Brute-force generalized-eigenvalue oracle for small pencils, independent of
// the Jacobi solver: expand det(S - lambda T) exactly by cofactors over
// polynomial entries, then locate the real roots by sign-change bisection.

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace test_oracle {

using Poly = std::vector<double>; // coefficients, ascending degree

inline Poly poly_add(const Poly& a, const Poly& b) {
    Poly out(std::max(a.size(), b.size()), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) out[i] += a[i];
    for (std::size_t i = 0; i < b.size(); ++i) out[i] += b[i];
    return out;
}

inline Poly poly_mul(const Poly& a, const Poly& b) {
    Poly out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    return out;
}

inline Poly poly_scale(const Poly& a, double s) {
    Poly out = a;
    for (double& c : out) c *= s;
    return out;
}

inline double poly_eval(const Poly& p, double x) {
    double acc = 0.0;
    for (std::size_t i = p.size(); i-- > 0;) acc = acc * x + p[i];
    return acc;
}

// det by cofactor expansion along the first remaining row.
inline Poly poly_det(const std::vector<std::vector<Poly>>& m, std::vector<int> cols) {
    const int row = static_cast<int>(m.size() - cols.size());
    if (cols.size() == 1) return m[row][cols[0]];
    Poly acc{0.0};
    for (std::size_t k = 0; k < cols.size(); ++k) {
        std::vector<int> rest;
        for (std::size_t j = 0; j < cols.size(); ++j)
            if (j != k) rest.push_back(cols[j]);
        Poly term = poly_mul(m[row][cols[k]], poly_det(m, rest));
        if (k % 2 == 1) term = poly_scale(term, -1.0);
        acc = poly_add(acc, term);
    }
    return acc;
}

/// All real generalized eigenvalues of (S, T) with T SPD, ascending.
inline std::vector<double> pencil_eigenvalues_bruteforce(const Eigen::MatrixXd& s,
                                                         const Eigen::MatrixXd& t,
                                                         double bound = 64.0) {
    const int n = static_cast<int>(s.rows());
    std::vector<std::vector<Poly>> m(n, std::vector<Poly>(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m[i][j] = Poly{s(i, j), -t(i, j)};
    std::vector<int> cols(n);
    for (int i = 0; i < n; ++i) cols[i] = i;
    const Poly p = poly_det(m, cols);

    for (int grid = 4096; grid <= 4096 * 64; grid *= 4) {
        std::vector<double> roots;
        double x_prev = -bound, f_prev = poly_eval(p, x_prev);
        for (int k = 1; k <= grid; ++k) {
            const double x = -bound + 2.0 * bound * k / grid;
            const double f = poly_eval(p, x);
            if (f == 0.0) {
                roots.push_back(x);
            } else if (f_prev * f < 0.0) {
                double lo = x_prev, hi = x;
                for (int it = 0; it < 200; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    const double fm = poly_eval(p, mid);
                    if (fm == 0.0) {
                        lo = hi = mid;
                        break;
                    }
                    (f_prev * fm < 0.0 ? hi : lo) = mid;
                }
                roots.push_back(0.5 * (lo + hi));
            }
            x_prev = x;
            f_prev = f;
        }
        if (static_cast<int>(roots.size()) == n) return roots;
    }
    throw std::runtime_error("pencil oracle: failed to isolate all roots (clustered spectrum?)");
}

} // namespace test_oracle
