#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

namespace msgfem {

using Mat = Eigen::MatrixXd;

struct SpectralError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Full symmetric eigendecomposition by cyclic Jacobi sweeps. Returns
/// eigenvalues ascending with orthonormal columns in `vectors`.
struct SymEig {
    Eigen::VectorXd values;
    Mat vectors;
};
SymEig jacobi_eigensolve(const Mat& a, int max_sweeps = 60);

/// Whitening transform onto the numerically well-conditioned range of a
/// PSD Gram matrix: W^T T W = I on the retained rank.
struct RankFilter {
    Mat transform; // m x rank
    int rank = 0;
    double max_eigenvalue = 0.0;
};
RankFilter filter_rank(const Mat& t, double rel_threshold = 1e-12);

/// Snapshot Grams of the restriction pencil: S over the inner region, T over
/// the oversampled region, in the energy inner product.
struct ReducedPencil {
    Mat s;
    Mat t;
    std::vector<std::string> labels;
};

struct EigenPairs {
    Eigen::VectorXd values; // descending
    Mat vectors;            // snapshot coefficients, T-orthonormal columns
    int retained_rank = 0;
};

/// Rayleigh-Ritz pencil solve: whiten by filter_rank(T), diagonalize the
/// reduced S, sort descending. Eigenvalue range is the caller's contract
/// (restriction Grams give [0, 1]).
EigenPairs solve_pencil(const ReducedPencil& pencil, double rel_threshold = 1e-12);

} // namespace msgfem
