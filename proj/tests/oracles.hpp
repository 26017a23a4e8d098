#pragma once

// Independent reference computations used by the tests. Each one takes a
// deliberately naive route (explicit powers, closed forms, brute-force
// sums) so it shares no code path with the library.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include <Eigen/Core>

namespace oracle {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using cd = std::complex<double>;

inline Matrix power(const Matrix& A, int k) {
  Matrix P = Matrix::Identity(A.rows(), A.cols());
  for (int i = 0; i < k; ++i) P = P * A;
  return P;
}

// y(t) = D u(t) + sum_{k<t} C A^(t-1-k) B u(k), zero initial state.
inline Matrix convolution_output(const Matrix& A, const Matrix& B,
                                 const Matrix& C, const Matrix& D,
                                 const Matrix& u) {
  const Eigen::Index N = u.rows();
  Matrix y = Matrix::Zero(N, C.rows());
  for (Eigen::Index t = 0; t < N; ++t) {
    Vector acc = D * u.row(t).transpose();
    for (Eigen::Index k = 0; k < t; ++k) {
      acc += C * power(A, static_cast<int>(t - 1 - k)) * B * u.row(k).transpose();
    }
    y.row(t) = acc.transpose();
  }
  return y;
}

inline double squared_error(const Matrix& a, const Matrix& b) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) s += (a(i, j) - b(i, j)) * (a(i, j) - b(i, j));
  }
  return s;
}

// [[a, b], [c, d]]^{-1} by the adjugate formula.
inline Eigen::Matrix2cd inverse_2x2(const Eigen::Matrix2cd& m) {
  const cd det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  Eigen::Matrix2cd inv;
  inv << m(1, 1), -m(0, 1), -m(1, 0), m(0, 0);
  return inv / det;
}

// Least squares with two unknowns via the 2x2 normal equations and Cramer's
// rule.
inline Eigen::Vector2d normal_equations_2(const Matrix& Phi, const Vector& y) {
  double a = 0, b = 0, c = 0, r0 = 0, r1 = 0;
  for (Eigen::Index t = 0; t < Phi.rows(); ++t) {
    a += Phi(t, 0) * Phi(t, 0);
    b += Phi(t, 0) * Phi(t, 1);
    c += Phi(t, 1) * Phi(t, 1);
    r0 += Phi(t, 0) * y[t];
    r1 += Phi(t, 1) * y[t];
  }
  const double det = a * c - b * b;
  return {(c * r0 - b * r1) / det, (a * r1 - b * r0) / det};
}

// Central differences of f around x.
inline Matrix central_difference_jacobian(const std::function<Vector(const Vector&)>& f,
                                          const Vector& x, double h) {
  const Vector f0 = f(x);
  Matrix J(f0.size(), x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vector xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    J.col(i) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return J;
}

inline double sorted_median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

// Largest eigenvalue of a symmetric 2x2 matrix in closed form.
inline double max_eigenvalue_sym2(double a, double b, double c) {
  const double mean = 0.5 * (a + c);
  const double rad = std::sqrt(0.25 * (a - c) * (a - c) + b * b);
  return mean + rad;
}

}  // namespace oracle
