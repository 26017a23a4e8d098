#include "ssid/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "ssid/errors.hpp"

namespace ssid {

namespace {

Matrix matrix_polynomial(const Matrix& A, const Vector& coeffs) {
  const Eigen::Index n = A.rows();
  Matrix sum = Matrix::Zero(n, n);
  Matrix power = Matrix::Identity(n, n);
  for (Eigen::Index i = 0; i < coeffs.size(); ++i) {
    sum += coeffs[i] * power;
    power = power * A;
  }
  return sum;
}

void require_row(const Matrix& m, Eigen::Index n, const char* name) {
  if (m.rows() != 1 || m.cols() != n) {
    throw DimensionError(std::string(name) + " must be a 1 x n row vector");
  }
}

}  // namespace

CommutatorError::CommutatorError(double norm)
    : NumericalError("matrix does not commute with A (|AB - BA| = " +
                     std::to_string(norm) + ")"),
      norm_(norm) {}

UnobservableModeError::UnobservableModeError(int mode)
    : NumericalError("C P vanishes at mode " + std::to_string(mode) +
                     "; that mode is unobservable"),
      mode_(mode) {}

CommutingTransform construct_T(const Matrix& A, const Matrix& C,
                               const Matrix& C0) {
  const Eigen::Index n = A.rows();
  if (A.cols() != n) throw DimensionError("construct_T: A must be square");
  require_row(C, n, "C");
  require_row(C0, n, "C0");
  const Matrix O = observability_matrix(A, C0);
  const int rank = numerical_rank(O, 1e-12);
  if (rank < n) {
    throw RankDeficiencyError("(A, C0) is not observable", rank,
                              static_cast<int>(n));
  }
  // Rows of O are C0 A^i, so C = t^T O.
  CommutingTransform out;
  out.t = O.transpose().colPivHouseholderQr().solve(C.transpose());
  out.T = matrix_polynomial(A, out.t);
  out.condition = condition_number(O);
  return out;
}

std::pair<Matrix, Matrix> equivalent_realization(const Matrix& A,
                                                 const Matrix& B,
                                                 const Matrix& C,
                                                 const Matrix& D,
                                                 const Matrix& C0) {
  if (C.rows() != 1) {
    throw DimensionError("equivalent_realization needs a single-output system");
  }
  const auto tr = construct_T(A, C, C0);
  return {tr.T * B, D};
}

std::pair<Matrix, Matrix> equivalent_realization_simo(const Matrix& A,
                                                      const Matrix& B,
                                                      const Matrix& C,
                                                      const Matrix& D,
                                                      const Matrix& B0) {
  if (B.cols() != 1 || B0.cols() != 1 || B0.rows() != A.rows()) {
    throw DimensionError(
        "equivalent_realization_simo needs single-input B and B0 columns");
  }
  // MISO construction on (A^T, C^T, B^T, D^T) with B0^T as the fixed row.
  const auto tr = construct_T(A.transpose(), B.transpose(), B0.transpose());
  return {C * tr.T.transpose(), D};
}

CommutantCoefficients commutant_coefficients(const Matrix& A, const Matrix& B,
                                             const Vector& v, double tol) {
  const Eigen::Index n = A.rows();
  if (A.cols() != n || B.rows() != n || B.cols() != n || v.size() != n) {
    throw DimensionError("commutant_coefficients: shape mismatch");
  }
  Matrix K(n, n);
  K.col(0) = v;
  for (Eigen::Index i = 1; i < n; ++i) K.col(i) = A * K.col(i - 1);
  const int rank = numerical_rank(K, 1e-12);
  if (rank < n) {
    throw RankDeficiencyError("Krylov basis {A^i v} does not span R^n", rank,
                              static_cast<int>(n));
  }
  CommutantCoefficients out;
  out.commutator = (A * B - B * A).norm();
  if (out.commutator > tol * A.norm() * B.norm()) {
    throw CommutatorError(out.commutator);
  }
  out.b = K.colPivHouseholderQr().solve(B * v);
  const double bnorm = B.norm();
  const double diff = (B - matrix_polynomial(A, out.b)).norm();
  out.residual = bnorm > 0.0 ? diff / bnorm : diff;
  return out;
}

namespace {

// Eigen-decomposition with conjugate pairs stored adjacently (positive
// imaginary part first) and exactly conjugate eigenvectors.
void paired_eigensystem(const Matrix& A, Eigen::VectorXcd& lambda,
                        ComplexMatrix& P) {
  const Eigen::Index n = A.rows();
  Eigen::EigenSolver<Matrix> es(A);
  if (es.info() != Eigen::Success) {
    throw NumericalError("eigen-decomposition of A failed");
  }
  const auto ev = es.eigenvalues();
  const auto vecs = es.eigenvectors();
  const double scale = std::max(A.norm(), 1e-300);
  lambda.resize(n);
  P.resize(n, n);
  Eigen::Index col = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double im = ev[i].imag();
    if (std::abs(im) <= 1e-14 * scale) {
      lambda[col] = ev[i].real();
      P.col(col) = vecs.col(i).real().cast<std::complex<double>>();
      ++col;
    } else if (im > 0.0) {
      if (col + 2 > n) break;
      lambda[col] = ev[i];
      lambda[col + 1] = std::conj(ev[i]);
      P.col(col) = vecs.col(i);
      P.col(col + 1) = vecs.col(i).conjugate();
      col += 2;
    }
  }
  if (col != n) throw NumericalError("could not pair the eigenvalues of A");

  double min_gap = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      min_gap = std::min(min_gap, std::abs(lambda[i] - lambda[j]));
    }
  }
  if (n > 1 && !(min_gap > 1e-8 * scale)) {
    throw NumericalError("A has (nearly) repeated eigenvalues; gap " +
                         std::to_string(min_gap));
  }
  Eigen::JacobiSVD<ComplexMatrix> svd(P);
  const auto& s = svd.singularValues();
  if (!(s[n - 1] > 1e-12 * s[0])) {
    throw NumericalError("eigenvector matrix of A is ill-conditioned");
  }
}

// Modal responses phi_ij(t) = sum_{k<t} lambda_i^{t-1-k} u_j(k).
std::vector<Eigen::MatrixXcd> modal_responses(const Eigen::VectorXcd& lambda,
                                              const Matrix& u) {
  const Eigen::Index n = lambda.size(), N = u.rows(), nu = u.cols();
  std::vector<Eigen::MatrixXcd> phi(nu, Eigen::MatrixXcd(N, n));
  for (Eigen::Index j = 0; j < nu; ++j) {
    Eigen::VectorXcd state = Eigen::VectorXcd::Zero(n);
    for (Eigen::Index t = 0; t < N; ++t) {
      phi[j].row(t) = state.transpose();
      state = lambda.cwiseProduct(state);
      state.array() += u(t, j);
    }
  }
  return phi;
}

}  // namespace

EigenRegressionProblem eigen_regression(const Matrix& A,
                                        const TimeSeriesData& data) {
  const Eigen::Index n = A.rows(), nu = data.nu(), N = data.N();
  if (A.cols() != n) throw DimensionError("eigen_regression: A must be square");
  if (data.ny() != 1) {
    throw DimensionError("eigen_regression handles single-output data");
  }
  if (N < n * nu + nu) throw DimensionError("eigen_regression: too few samples");

  EigenRegressionProblem prob;
  prob.ts = data.ts;
  paired_eigensystem(A, prob.lambda, prob.P);
  const auto phi = modal_responses(prob.lambda, data.u);

  // Real unknowns: X_ij for real modes, (Re, Im) X_ij for the leading member
  // of each conjugate pair, then D.
  Matrix design(N, n * nu + nu);
  for (Eigen::Index j = 0; j < nu; ++j) {
    for (Eigen::Index i = 0; i < n;) {
      const Eigen::Index c = j * n + i;
      if (prob.lambda[i].imag() == 0.0) {
        design.col(c) = phi[j].col(i).real();
        i += 1;
      } else {
        design.col(c) = 2.0 * phi[j].col(i).real();
        design.col(c + 1) = -2.0 * phi[j].col(i).imag();
        i += 2;
      }
    }
    design.col(n * nu + j) = data.u.col(j);
  }
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod;
  cod.setThreshold(1e-12);
  cod.compute(design);
  const Vector theta = cod.solve(data.y.col(0));
  prob.rank = static_cast<int>(cod.rank());
  prob.cost = (data.y.col(0) - design * theta).squaredNorm();

  prob.X.resize(n, nu);
  for (Eigen::Index j = 0; j < nu; ++j) {
    for (Eigen::Index i = 0; i < n;) {
      const Eigen::Index c = j * n + i;
      if (prob.lambda[i].imag() == 0.0) {
        prob.X(i, j) = theta[c];
        i += 1;
      } else {
        prob.X(i, j) = {theta[c], theta[c + 1]};
        prob.X(i + 1, j) = {theta[c], -theta[c + 1]};
        i += 2;
      }
    }
  }
  prob.D = theta.tail(nu).transpose();
  return prob;
}

Matrix extract_B(const EigenRegressionProblem& problem, const Matrix& C_fixed) {
  const Eigen::Index n = problem.lambda.size();
  require_row(C_fixed, n, "C_fixed");
  const Eigen::RowVectorXcd Cbar =
      C_fixed.cast<std::complex<double>>() * problem.P;
  const double scale = Cbar.norm();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(std::abs(Cbar[i]) > 1e-12 * scale)) {
      throw UnobservableModeError(static_cast<int>(i));
    }
  }
  const ComplexMatrix Bbar = Cbar.cwiseInverse().asDiagonal() * problem.X;
  const ComplexMatrix Bc = problem.P * Bbar;
  const double re = Bc.real().norm();
  if (Bc.imag().norm() > 1e-9 * std::max(re, 1.0)) {
    throw NumericalError("extracted B is not real (imaginary residual " +
                         std::to_string(Bc.imag().norm()) + ")");
  }
  return Bc.real();
}

Matrix eigen_regression_predict(const EigenRegressionProblem& problem,
                                const Matrix& u) {
  const auto phi = modal_responses(problem.lambda, u);
  Matrix y = u * problem.D.transpose();
  for (Eigen::Index j = 0; j < u.cols(); ++j) {
    y.col(0) += (phi[j] * problem.X.col(j)).real();
  }
  return y;
}

}  // namespace ssid
