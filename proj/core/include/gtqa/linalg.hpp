// Dense complex linear algebra: SVD with a deterministic phase convention,
// Hermitian matrix functions, trace norm, random density matrices.
#pragma once

#include <random>

#include <Eigen/Dense>

namespace gtqa {

struct MatrixSvd {
  Eigen::MatrixXcd u;    // m x r, orthonormal columns
  Eigen::VectorXd s;     // r = min(m, n), descending
  Eigen::MatrixXcd vh;   // r x n, orthonormal rows
};

// Thin SVD. Each singular pair is rotated so the largest-magnitude entry of
// the U column is real positive. Numerical error on LAPACK failure.
MatrixSvd svd(const Eigen::MatrixXcd& m);

// Singular values only.
Eigen::VectorXd singular_values(const Eigen::MatrixXcd& m);

bool is_hermitian(const Eigen::MatrixXcd& m, double rel_tol = 1e-10);

// Principal square root of a Hermitian PSD matrix; negative eigenvalues from
// roundoff are clamped to zero. Domain error if m is not Hermitian.
Eigen::MatrixXcd matrix_sqrt(const Eigen::MatrixXcd& m);

// Pseudo-inverse square root: eigenvalues <= rcond * lambda_max map to zero,
// the rest to lambda^{-1/2}. Degenerate error when everything is cut off.
Eigen::MatrixXcd matrix_inv_sqrt(const Eigen::MatrixXcd& m, double rcond = 1e-12);

// A A^dag / tr(A A^dag) with A complex standard Gaussian.
Eigen::MatrixXcd random_density_matrix(int dim, std::mt19937_64& rng);

// Sum of singular values; uses eigenvalues for Hermitian input.
double trace_norm(const Eigen::MatrixXcd& m);

}  // namespace gtqa
