#include "gtqa/linalg.hpp"

#include <complex>

#include <lapacke.h>

#include "gtqa/errors.hpp"

namespace gtqa {

namespace {

void fix_phases(Eigen::MatrixXcd& u, Eigen::MatrixXcd& vh) {
  for (int k = 0; k < u.cols(); ++k) {
    int pivot = 0;
    double best = -1.0;
    for (int i = 0; i < u.rows(); ++i) {
      double a = std::abs(u(i, k));
      if (a > best) {
        best = a;
        pivot = i;
      }
    }
    if (best <= 0) continue;
    std::complex<double> z = u(pivot, k);
    std::complex<double> phase = std::conj(z) / std::abs(z);
    u.col(k) *= phase;
    if (k < vh.rows()) vh.row(k) *= std::conj(phase);
  }
}

}  // namespace

MatrixSvd svd(const Eigen::MatrixXcd& m) {
  const int rows = static_cast<int>(m.rows());
  const int cols = static_cast<int>(m.cols());
  const int r = std::min(rows, cols);
  Eigen::MatrixXcd a = m;  // zgesdd destroys its input
  MatrixSvd out;
  out.u.resize(rows, r);
  out.s.resize(r);
  out.vh.resize(r, cols);
  int info = LAPACKE_zgesdd(LAPACK_COL_MAJOR, 'S', rows, cols,
                            reinterpret_cast<lapack_complex_double*>(a.data()), rows,
                            out.s.data(),
                            reinterpret_cast<lapack_complex_double*>(out.u.data()), rows,
                            reinterpret_cast<lapack_complex_double*>(out.vh.data()), r);
  if (info != 0) {
    // zgesdd occasionally fails to converge; zgesvd is slower but sturdier.
    a = m;
    Eigen::VectorXd superb(std::max(1, r - 1));
    info = LAPACKE_zgesvd(LAPACK_COL_MAJOR, 'S', 'S', rows, cols,
                          reinterpret_cast<lapack_complex_double*>(a.data()), rows,
                          out.s.data(),
                          reinterpret_cast<lapack_complex_double*>(out.u.data()), rows,
                          reinterpret_cast<lapack_complex_double*>(out.vh.data()), r,
                          superb.data());
    if (info != 0) throw Error(ErrorKind::Numerical, "SVD failed to converge");
  }
  fix_phases(out.u, out.vh);
  return out;
}

Eigen::VectorXd singular_values(const Eigen::MatrixXcd& m) {
  const int rows = static_cast<int>(m.rows());
  const int cols = static_cast<int>(m.cols());
  const int r = std::min(rows, cols);
  Eigen::MatrixXcd a = m;
  Eigen::VectorXd s(r);
  int info = LAPACKE_zgesdd(LAPACK_COL_MAJOR, 'N', rows, cols,
                            reinterpret_cast<lapack_complex_double*>(a.data()), rows,
                            s.data(), nullptr, rows, nullptr, r);
  if (info != 0) throw Error(ErrorKind::Numerical, "SVD (values only) failed to converge");
  return s;
}

bool is_hermitian(const Eigen::MatrixXcd& m, double rel_tol) {
  if (m.rows() != m.cols()) return false;
  double scale = m.norm();
  if (scale == 0.0) return true;
  return (m - m.adjoint()).norm() <= rel_tol * scale;
}

namespace {

// Eigendecomposition with a Hermiticity check shared by the matrix functions.
Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> hermitian_eigs(const Eigen::MatrixXcd& m,
                                                               const char* caller) {
  if (!is_hermitian(m))
    throw Error(ErrorKind::Domain, std::string(caller) + ": matrix is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m);
  if (solver.info() != Eigen::Success)
    throw Error(ErrorKind::Numerical, std::string(caller) + ": eigensolver failed");
  return solver;
}

}  // namespace

Eigen::MatrixXcd matrix_sqrt(const Eigen::MatrixXcd& m) {
  auto solver = hermitian_eigs(m, "matrix_sqrt");
  Eigen::VectorXd ev = solver.eigenvalues();
  for (int i = 0; i < ev.size(); ++i) ev(i) = ev(i) > 0 ? std::sqrt(ev(i)) : 0.0;
  return solver.eigenvectors() * ev.asDiagonal() * solver.eigenvectors().adjoint();
}

Eigen::MatrixXcd matrix_inv_sqrt(const Eigen::MatrixXcd& m, double rcond) {
  auto solver = hermitian_eigs(m, "matrix_inv_sqrt");
  Eigen::VectorXd ev = solver.eigenvalues();
  const double cutoff = rcond * std::max(0.0, ev(ev.size() - 1));
  int kept = 0;
  for (int i = 0; i < ev.size(); ++i) {
    if (ev(i) > cutoff && ev(i) > 0) {
      ev(i) = 1.0 / std::sqrt(ev(i));
      ++kept;
    } else {
      ev(i) = 0.0;
    }
  }
  if (kept == 0)
    throw Error(ErrorKind::Degenerate, "matrix_inv_sqrt: all eigenvalues below cutoff");
  return solver.eigenvectors() * ev.asDiagonal() * solver.eigenvectors().adjoint();
}

Eigen::MatrixXcd random_density_matrix(int dim, std::mt19937_64& rng) {
  if (dim < 1) throw Error(ErrorKind::Parameter, "dimension must be >= 1");
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXcd a(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) a(i, j) = std::complex<double>(gauss(rng), gauss(rng));
  Eigen::MatrixXcd rho = a * a.adjoint();
  return rho / rho.trace().real();
}

double trace_norm(const Eigen::MatrixXcd& m) {
  if (m.rows() == m.cols() && is_hermitian(m, 1e-9)) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m);
    if (solver.info() == Eigen::Success) return solver.eigenvalues().cwiseAbs().sum();
  }
  return singular_values(m).sum();
}

}  // namespace gtqa
