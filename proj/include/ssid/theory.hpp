#pragma once

#include <utility>

#include "ssid/errors.hpp"
#include "ssid/model.hpp"

namespace ssid {

/// T = sum t_i A^i with C = C0 T. T commutes with A by construction.
struct CommutingTransform {
  Matrix T;
  Vector t;
  /// Condition estimate of the observability matrix of (A, C0).
  double condition = 1.0;
};

/// Solves C = sum_i t_i C0 A^i for the row vectors C, C0 (1 x n).
/// Throws RankDeficiencyError if (A, C0) is not observable.
CommutingTransform construct_T(const Matrix& A, const Matrix& C,
                               const Matrix& C0);

/// MISO: (B0, D0) such that (A, B0, C0, D0) is input-output equivalent to
/// (A, B, C, D). B0 = T B, D0 = D.
std::pair<Matrix, Matrix> equivalent_realization(const Matrix& A,
                                                 const Matrix& B,
                                                 const Matrix& C,
                                                 const Matrix& D,
                                                 const Matrix& C0);

/// SIMO counterpart through the transposed system: (C0, D0) such that
/// (A, B0, C0, D0) is equivalent to (A, B, C, D) for a column B0 with
/// (A, B0) controllable.
std::pair<Matrix, Matrix> equivalent_realization_simo(const Matrix& A,
                                                      const Matrix& B,
                                                      const Matrix& C,
                                                      const Matrix& D,
                                                      const Matrix& B0);

/// Coefficients b_i with B = sum b_i A^i.
struct CommutantCoefficients {
  Vector b;
  /// |B - sum b_i A^i|_F / |B|_F.
  double residual = 0.0;
  /// |A B - B A|_F.
  double commutator = 0.0;
};

/// Raised when B does not commute with A.
class CommutatorError : public NumericalError {
 public:
  explicit CommutatorError(double norm);
  double norm() const { return norm_; }

 private:
  double norm_;
};

/// Expands B in powers of A through the Krylov basis {A^i v}.
/// Throws RankDeficiencyError if the basis does not span R^n and
/// CommutatorError if |AB - BA| > tol * |A| |B|.
CommutantCoefficients commutant_coefficients(const Matrix& A, const Matrix& B,
                                             const Vector& v,
                                             double tol = 1e-8);

/// Combined regression for X = diag(C P) P^{-1} B and D over the modal basis
/// of A (single-output data).
struct EigenRegressionProblem {
  Eigen::VectorXcd lambda;
  ComplexMatrix P;
  /// n x nu, rows conjugate-paired like the eigenvalues.
  ComplexMatrix X;
  Matrix D;
  double cost = 0.0;
  int rank = 0;
  double ts = 1.0;
};

EigenRegressionProblem eigen_regression(const Matrix& A,
                                        const TimeSeriesData& data);

/// C P vanishes at a mode, so that mode is unobservable through C.
class UnobservableModeError : public NumericalError {
 public:
  explicit UnobservableModeError(int mode);
  int mode() const { return mode_; }

 private:
  int mode_;
};

/// Recovers a real B from X for a fixed C (1 x n). Throws
/// UnobservableModeError when C P has a zero entry.
Matrix extract_B(const EigenRegressionProblem& problem, const Matrix& C_fixed);

/// Predictions of the modal model, for comparing against simulate().
Matrix eigen_regression_predict(const EigenRegressionProblem& problem,
                                const Matrix& u);

}  // namespace ssid
