#include "msgfem/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace msgfem {

SymEig jacobi_eigensolve(const Mat& a_in, int max_sweeps) {
    if (a_in.rows() != a_in.cols()) throw SpectralError("jacobi: matrix not square");
    const int n = static_cast<int>(a_in.rows());
    Mat a = 0.5 * (a_in + a_in.transpose());
    Mat v = Mat::Identity(n, n);
    if (n == 1) return {a.diagonal(), v};

    const double anorm = std::max(a.cwiseAbs().maxCoeff(), 1e-300);
    const double stop = 1e-15 * anorm;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n - 1; ++p)
            for (int q = p + 1; q < n; ++q) off = std::max(off, std::abs(a(p, q)));
        if (off <= stop) break;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) <= stop * 1e-2) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int i, int j) { return a(i, i) < a(j, j); });
    SymEig out;
    out.values.resize(n);
    out.vectors.resize(n, n);
    for (int i = 0; i < n; ++i) {
        out.values[i] = a(order[i], order[i]);
        out.vectors.col(i) = v.col(order[i]);
    }
    return out;
}

RankFilter filter_rank(const Mat& t, double rel_threshold) {
    const SymEig eig = jacobi_eigensolve(t);
    const int m = static_cast<int>(t.rows());
    const double lmax = m > 0 ? eig.values[m - 1] : 0.0;
    if (lmax <= 0.0) return {Mat(m, 0), 0, std::max(lmax, 0.0)};
    if (eig.values[0] < -1e-8 * lmax)
        throw SpectralError("filter_rank: Gram matrix has a negative eigenvalue (" +
                            std::to_string(eig.values[0]) + "), assembly bug");
    std::vector<int> keep;
    for (int i = 0; i < m; ++i)
        if (eig.values[i] >= rel_threshold * lmax) keep.push_back(i);
    // descending T-eigenvalue order, ties keeping the ascending Jacobi order
    std::stable_sort(keep.begin(), keep.end(),
                     [&](int a, int b) { return eig.values[a] > eig.values[b]; });
    RankFilter out;
    out.rank = static_cast<int>(keep.size());
    out.max_eigenvalue = lmax;
    out.transform.resize(m, out.rank);
    for (int k = 0; k < out.rank; ++k) {
        const int i = keep[k];
        out.transform.col(k) = eig.vectors.col(i) / std::sqrt(eig.values[i]);
    }
    return out;
}

EigenPairs solve_pencil(const ReducedPencil& pencil, double rel_threshold) {
    if (pencil.s.rows() != pencil.t.rows() || pencil.s.cols() != pencil.t.cols() ||
        pencil.s.rows() != pencil.s.cols())
        throw SpectralError("solve_pencil: Gram dimension mismatch");
    const RankFilter f = filter_rank(pencil.t, rel_threshold);
    if (f.rank == 0) throw SpectralError("solve_pencil: snapshot set is degenerate (rank 0)");

    const Mat b = f.transform.transpose() * (0.5 * (pencil.s + pencil.s.transpose())) * f.transform;
    const SymEig eig = jacobi_eigensolve(b);

    EigenPairs out;
    out.retained_rank = f.rank;
    out.values.resize(f.rank);
    out.vectors.resize(pencil.s.rows(), f.rank);
    for (int k = 0; k < f.rank; ++k) {
        const int i = f.rank - 1 - k; // descending
        out.values[k] = eig.values[i];
        out.vectors.col(k) = f.transform * eig.vectors.col(i);
    }
    return out;
}

} // namespace msgfem
