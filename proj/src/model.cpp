#include "ssid/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "ssid/errors.hpp"

namespace ssid {

namespace {

std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_discrete(const StateSpaceModel& model, const char* op) {
  if (!model.domain.is_discrete()) {
    throw DimensionError(std::string(op) + " requires a discrete-time model");
  }
}

}  // namespace

Domain Domain::discrete(double ts) {
  if (!(ts > 0.0) || !std::isfinite(ts)) {
    throw DimensionError("sample time must be positive and finite");
  }
  return Domain(ts);
}

StateSpaceModel::StateSpaceModel(Matrix a, Matrix b, Matrix c, Matrix d,
                                 Domain dom)
    : A(std::move(a)),
      B(std::move(b)),
      C(std::move(c)),
      D(std::move(d)),
      domain(dom) {
  validate();
}

void StateSpaceModel::validate() const {
  const auto n = A.rows();
  if (A.cols() != n || B.rows() != n || C.cols() != n ||
      D.rows() != C.rows() || D.cols() != B.cols()) {
    throw DimensionError("inconsistent state-space dimensions: A " + shape(A) +
                         ", B " + shape(B) + ", C " + shape(C) + ", D " +
                         shape(D));
  }
}

TimeSeriesData::TimeSeriesData(Matrix u_, Matrix y_, double ts_)
    : u(std::move(u_)), y(std::move(y_)), ts(ts_) {
  if (u.rows() != y.rows()) {
    throw DimensionError("u and y must have the same number of samples");
  }
  if (u.rows() < 1) throw DimensionError("time series needs N >= 1");
  if (!(ts > 0.0)) throw DimensionError("sample time must be positive");
}

FrequencyData::FrequencyData(Vector w, std::vector<ComplexMatrix> g, Domain dom)
    : omega(std::move(w)), G(std::move(g)), domain(dom) {
  if (static_cast<std::size_t>(omega.size()) != G.size()) {
    throw DimensionError("frequency grid and response count differ");
  }
  for (std::size_t k = 0; k < G.size(); ++k) {
    if (G[k].rows() != G.front().rows() || G[k].cols() != G.front().cols()) {
      throw DimensionError("response sample " + std::to_string(k) +
                           " has a different shape");
    }
    if (omega[k] < 0.0) throw DimensionError("negative frequency");
    if (k > 0 && !(omega[k] > omega[k - 1])) {
      throw DimensionError("frequencies must be strictly increasing");
    }
  }
}

Matrix simulate(const StateSpaceModel& model, const Matrix& u,
                const Vector& x0) {
  require_discrete(model, "simulate");
  if (u.cols() != model.nu()) {
    throw DimensionError("input has " + std::to_string(u.cols()) +
                         " channels, model expects " +
                         std::to_string(model.nu()));
  }
  if (x0.size() != model.n()) throw DimensionError("initial state size");
  const Eigen::Index N = u.rows();
  Matrix y(N, model.ny());
  Vector x = x0;
  Vector next(model.n());
  for (Eigen::Index t = 0; t < N; ++t) {
    y.row(t).noalias() = (model.C * x + model.D * u.row(t).transpose()).transpose();
    next.noalias() = model.A * x;
    next.noalias() += model.B * u.row(t).transpose();
    x.swap(next);
  }
  return y;
}

Matrix simulate(const StateSpaceModel& model, const Matrix& u) {
  return simulate(model, u, Vector::Zero(model.n()));
}

Matrix simulate_states(const Matrix& A, const Matrix& B, const Matrix& u) {
  if (B.cols() != u.cols() || A.rows() != B.rows()) {
    throw DimensionError("simulate_states: shape mismatch");
  }
  const Eigen::Index N = u.rows();
  const Eigen::Index n = A.rows();
  // Row-wise recursion on the transposed system keeps rows contiguous.
  Matrix X(N, n);
  if (N == 0) return X;
  X.row(0).setZero();
  const Matrix At = A.transpose();
  const Matrix Bt = B.transpose();
  for (Eigen::Index t = 1; t < N; ++t) {
    X.row(t).noalias() = X.row(t - 1) * At;
    X.row(t).noalias() += u.row(t - 1) * Bt;
  }
  return X;
}

double prediction_cost(const StateSpaceModel& model,
                       const TimeSeriesData& data) {
  if (data.nu() != model.nu() || data.ny() != model.ny()) {
    throw DimensionError("data dimensions do not match model");
  }
  return (data.y - simulate(model, data.u)).squaredNorm();
}

std::complex<double> evaluation_point(const Domain& domain, double omega) {
  if (domain.is_discrete()) {
    return std::polar(1.0, domain.ts() * omega);
  }
  return {0.0, omega};
}

std::vector<ComplexMatrix> frequency_response(const StateSpaceModel& model,
                                              const Vector& omega) {
  model.validate();
  const int n = model.n();
  const ComplexMatrix Ac = model.A.cast<std::complex<double>>();
  const ComplexMatrix Bc = model.B.cast<std::complex<double>>();
  const ComplexMatrix Cc = model.C.cast<std::complex<double>>();
  const ComplexMatrix Dc = model.D.cast<std::complex<double>>();
  std::vector<ComplexMatrix> out;
  out.reserve(omega.size());
  for (Eigen::Index k = 0; k < omega.size(); ++k) {
    if (n == 0) {
      out.push_back(Dc);
      continue;
    }
    const auto p = evaluation_point(model.domain, omega[k]);
    ComplexMatrix M = -Ac;
    M.diagonal().array() += p;
    Eigen::PartialPivLU<ComplexMatrix> lu(M);
    if (!(lu.rcond() > 1e-13)) {
      throw SingularResolventError(static_cast<std::size_t>(k), omega[k]);
    }
    out.push_back(Cc * lu.solve(Bc) + Dc);
  }
  return out;
}

double frequency_cost(const StateSpaceModel& model, const FrequencyData& fd) {
  if (fd.ny() != model.ny() || fd.nu() != model.nu()) {
    throw DimensionError("frequency data shape does not match model");
  }
  if (!(fd.domain == model.domain)) {
    throw DimensionError("frequency data domain does not match model domain");
  }
  const auto G = frequency_response(model, fd.omega);
  double cost = 0.0;
  for (std::size_t k = 0; k < G.size(); ++k) {
    cost += (G[k] - fd.G[k]).squaredNorm();
  }
  return cost;
}

MarkovSequence markov_parameters(const StateSpaceModel& model, int L) {
  require_discrete(model, "markov_parameters");
  if (L < 1) throw DimensionError("Markov sequence length must be >= 1");
  model.validate();
  MarkovSequence seq;
  seq.D0 = model.D;
  seq.H.reserve(L);
  Matrix AiB = model.B;
  for (int i = 0; i < L; ++i) {
    seq.H.push_back(model.C * AiB);
    AiB = model.A * AiB;
  }
  return seq;
}

bool io_equivalent(const StateSpaceModel& m1, const StateSpaceModel& m2,
                   int L, double tol) {
  if (m1.nu() != m2.nu() || m1.ny() != m2.ny()) {
    throw DimensionError("io_equivalent: incompatible input/output counts");
  }
  if (!(m1.domain == m2.domain)) {
    throw DimensionError("io_equivalent: models live in different domains");
  }
  if (L <= 0) L = std::max(1, m1.n() + m2.n());
  if ((m1.D - m2.D).norm() > tol) return false;
  // Continuous models share the same algebra for C A^i B.
  StateSpaceModel a = m1, b = m2;
  a.domain = b.domain = Domain::discrete(1.0);
  const auto s1 = markov_parameters(a, L);
  const auto s2 = markov_parameters(b, L);
  for (int i = 0; i < L; ++i) {
    if ((s1.H[i] - s2.H[i]).norm() > tol) return false;
  }
  return true;
}

double condition_number(const Matrix& m) {
  if (m.size() == 0) return 1.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& s = svd.singularValues();
  const double smin = s[s.size() - 1];
  return smin > 0.0 ? s[0] / smin : std::numeric_limits<double>::infinity();
}

int numerical_rank(const Matrix& m, double tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& s = svd.singularValues();
  if (s[0] == 0.0) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s[i] > tol * s[0]) ++r;
  }
  return r;
}

StateSpaceModel similarity_transform(const StateSpaceModel& model,
                                     const Matrix& T) {
  if (T.rows() != model.n() || T.cols() != model.n()) {
    throw DimensionError("similarity transform must be n x n");
  }
  const double kappa = condition_number(T);
  if (!(kappa < 1e12)) {
    throw NumericalError("similarity transform numerically singular (cond " +
                         std::to_string(kappa) + ")");
  }
  Eigen::PartialPivLU<Matrix> lu(T);
  StateSpaceModel out = model;
  out.A = lu.solve(model.A * T);
  out.B = lu.solve(model.B);
  out.C = model.C * T;
  return out;
}

Matrix observability_matrix(const Matrix& A, const Matrix& C) {
  if (A.rows() != A.cols() || C.cols() != A.rows()) {
    throw DimensionError("observability_matrix: shape mismatch");
  }
  const Eigen::Index n = A.rows(), p = C.rows();
  Matrix O(n * p, n);
  if (n == 0) return O;
  O.topRows(p) = C;
  for (Eigen::Index i = 1; i < n; ++i) {
    O.middleRows(i * p, p) = O.middleRows((i - 1) * p, p) * A;
  }
  return O;
}

Matrix controllability_matrix(const Matrix& A, const Matrix& B) {
  return observability_matrix(A.transpose(), B.transpose()).transpose();
}

bool observable(const Matrix& A, const Matrix& C, double tol) {
  return numerical_rank(observability_matrix(A, C), tol) == A.rows();
}

bool controllable(const Matrix& A, const Matrix& B, double tol) {
  return observable(A.transpose(), B.transpose(), tol);
}

double stability_margin_value(const Matrix& A, const Domain& domain) {
  if (A.size() == 0) return domain.is_discrete() ? 0.0 : -1.0;
  Eigen::EigenSolver<Matrix> es(A, false);
  if (es.info() != Eigen::Success) {
    return std::numeric_limits<double>::infinity();
  }
  const auto& ev = es.eigenvalues();
  if (domain.is_discrete()) return ev.cwiseAbs().maxCoeff();
  return ev.real().maxCoeff();
}

bool is_stable(const Matrix& A, const Domain& domain) {
  const double v = stability_margin_value(A, domain);
  return domain.is_discrete() ? v < 1.0 : v < 0.0;
}

double error_norm(const TimeSeriesData& reference,
                  const StateSpaceModel& model) {
  if (reference.nu() != model.nu() || reference.ny() != model.ny()) {
    throw DimensionError("error_norm: data dimensions do not match model");
  }
  const Matrix E = reference.y - simulate(model, reference.u);
  const Matrix S = E.transpose() * E / static_cast<double>(reference.N());
  Eigen::SelfAdjointEigenSolver<Matrix> es(S, Eigen::EigenvaluesOnly);
  return std::max(0.0, es.eigenvalues().maxCoeff());
}

}  // namespace ssid
