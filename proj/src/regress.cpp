#include "ssid/regress.hpp"

#include <string>

#include <Eigen/LU>
#include <Eigen/QR>

#include "sensitivity.hpp"
#include "ssid/errors.hpp"

namespace ssid {

namespace detail {

void fill_sensitivity_columns(const Matrix& A, const Matrix& C, const Matrix& W,
                              Matrix& out, Eigen::Index offset) {
  const Eigen::Index n = A.rows(), ny = C.rows(), N = W.rows();
  Matrix S(n, n), next(n, n), O(ny, n);
  for (Eigen::Index j = 0; j < W.cols(); ++j) {
    S.setZero();
    for (Eigen::Index t = 0; t < N; ++t) {
      O.noalias() = C * S;
      for (Eigen::Index i = 0; i < n; ++i) {
        out.block(t * ny, offset + j * n + i, ny, 1) = O.col(i);
      }
      next.noalias() = A * S;
      next.diagonal().array() += W(t, j);
      S.swap(next);
    }
  }
}

namespace {

Eigen::PartialPivLU<ComplexMatrix> resolvent_lu(const ComplexMatrix& Ac,
                                                const Domain& domain,
                                                double omega, std::size_t k) {
  ComplexMatrix M = -Ac;
  M.diagonal().array() += evaluation_point(domain, omega);
  Eigen::PartialPivLU<ComplexMatrix> lu(M);
  if (!(lu.rcond() > 1e-13)) throw SingularResolventError(k, omega);
  return lu;
}

}  // namespace

std::vector<ResolventTerms> resolvent_terms(const StateSpaceModel& model,
                                            const Vector& omega) {
  const ComplexMatrix Ac = model.A.cast<std::complex<double>>();
  const ComplexMatrix Bc = model.B.cast<std::complex<double>>();
  const ComplexMatrix CcT = model.C.transpose().cast<std::complex<double>>();
  std::vector<ResolventTerms> out(omega.size());
  for (Eigen::Index k = 0; k < omega.size(); ++k) {
    const ComplexMatrix R = resolvent_lu(Ac, model.domain, omega[k], k).inverse();
    out[k].RB = R * Bc;
    out[k].CR = CcT.transpose() * R;
  }
  return out;
}

std::vector<ComplexMatrix> left_resolvent(const Matrix& A, const Matrix& C,
                                          const Domain& domain,
                                          const Vector& omega) {
  const ComplexMatrix Ac = A.cast<std::complex<double>>();
  const ComplexMatrix CcT = C.transpose().cast<std::complex<double>>();
  std::vector<ComplexMatrix> out(omega.size());
  for (Eigen::Index k = 0; k < omega.size(); ++k) {
    out[k] = CcT.transpose() * resolvent_lu(Ac, domain, omega[k], k).inverse();
  }
  return out;
}

std::vector<ComplexMatrix> right_resolvent(const Matrix& A, const Matrix& B,
                                           const Domain& domain,
                                           const Vector& omega) {
  const ComplexMatrix Ac = A.cast<std::complex<double>>();
  const ComplexMatrix Bc = B.cast<std::complex<double>>();
  std::vector<ComplexMatrix> out(omega.size());
  for (Eigen::Index k = 0; k < omega.size(); ++k) {
    out[k] = resolvent_lu(Ac, domain, omega[k], k).solve(Bc);
  }
  return out;
}

}  // namespace detail

namespace {

struct LeastSquares {
  Matrix solution;
  int rank;
};

LeastSquares solve_min_norm(const Matrix& design, const Matrix& rhs,
                            double rank_tol) {
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod;
  cod.setThreshold(rank_tol);
  cod.compute(design);
  return {cod.solve(rhs), static_cast<int>(cod.rank())};
}

void check_fixed_d(const RegressionOptions& opts, Eigen::Index ny,
                   Eigen::Index nu) {
  if (opts.fixed_d && (opts.fixed_d->rows() != ny || opts.fixed_d->cols() != nu)) {
    throw DimensionError("fixed D has the wrong shape");
  }
}

void require_rows(Eigen::Index rows, Eigen::Index unknowns, const char* op) {
  if (rows < unknowns) {
    throw DimensionError(std::string(op) + ": " + std::to_string(rows) +
                         " equations for " + std::to_string(unknowns) +
                         " unknowns");
  }
}

// Design for the frequency-domain (B,D) problem. The columns of G separate:
// G(:, j) = (C R_k) B(:, j) + D(:, j). Rows are (k, r, re/im).
Matrix bd_freq_design(const std::vector<ComplexMatrix>& CR, Eigen::Index n,
                      Eigen::Index ny, bool with_d) {
  const Eigen::Index K = static_cast<Eigen::Index>(CR.size());
  Matrix M = Matrix::Zero(2 * K * ny, n + (with_d ? ny : 0));
  for (Eigen::Index k = 0; k < K; ++k) {
    for (Eigen::Index r = 0; r < ny; ++r) {
      const Eigen::Index row = 2 * (k * ny + r);
      M.block(row, 0, 1, n) = CR[k].row(r).real();
      M.block(row + 1, 0, 1, n) = CR[k].row(r).imag();
      if (with_d) M(row, n + r) = 1.0;
    }
  }
  return M;
}

Matrix bd_freq_rhs(const FrequencyData& fd, const std::optional<Matrix>& fixed_d) {
  const Eigen::Index K = fd.K(), ny = fd.ny(), nu = fd.nu();
  Matrix R(2 * K * ny, nu);
  for (Eigen::Index k = 0; k < K; ++k) {
    ComplexMatrix g = fd.G[k];
    if (fixed_d) g -= fixed_d->cast<std::complex<double>>();
    for (Eigen::Index r = 0; r < ny; ++r) {
      const Eigen::Index row = 2 * (k * ny + r);
      R.row(row) = g.row(r).real();
      R.row(row + 1) = g.row(r).imag();
    }
  }
  return R;
}

// Design for the (C,D) problem: G(r, :) = C(r, :) (R_k B) + D(r, :).
// Rows are (k, j, re/im).
Matrix cd_freq_design(const std::vector<ComplexMatrix>& RB, Eigen::Index n,
                      Eigen::Index nu, bool with_d) {
  const Eigen::Index K = static_cast<Eigen::Index>(RB.size());
  Matrix M = Matrix::Zero(2 * K * nu, n + (with_d ? nu : 0));
  for (Eigen::Index k = 0; k < K; ++k) {
    for (Eigen::Index j = 0; j < nu; ++j) {
      const Eigen::Index row = 2 * (k * nu + j);
      M.block(row, 0, 1, n) = RB[k].col(j).real().transpose();
      M.block(row + 1, 0, 1, n) = RB[k].col(j).imag().transpose();
      if (with_d) M(row, n + j) = 1.0;
    }
  }
  return M;
}

Matrix cd_freq_rhs(const FrequencyData& fd, const std::optional<Matrix>& fixed_d) {
  const Eigen::Index K = fd.K(), ny = fd.ny(), nu = fd.nu();
  Matrix R(2 * K * nu, ny);
  for (Eigen::Index k = 0; k < K; ++k) {
    ComplexMatrix g = fd.G[k];
    if (fixed_d) g -= fixed_d->cast<std::complex<double>>();
    for (Eigen::Index j = 0; j < nu; ++j) {
      const Eigen::Index row = 2 * (k * nu + j);
      R.row(row) = g.col(j).real().transpose();
      R.row(row + 1) = g.col(j).imag().transpose();
    }
  }
  return R;
}

void check_freq_shapes(const FrequencyData& fd, Eigen::Index n,
                       const Matrix& A, Eigen::Index other_rows,
                       Eigen::Index other_cols, const char* op) {
  if (A.rows() != n || A.cols() != n || other_rows < 0 || other_cols < 0) {
    throw DimensionError(std::string(op) + ": A must be square");
  }
  if (fd.K() < 1) throw DimensionError(std::string(op) + ": no frequencies");
}

}  // namespace

RegressionResult estimate_bd_time(const Matrix& A, const Matrix& C,
                                  const TimeSeriesData& data,
                                  const RegressionOptions& opts) {
  const Eigen::Index n = A.rows(), ny = C.rows(), nu = data.nu(), N = data.N();
  if (A.cols() != n || C.cols() != n || data.ny() != ny) {
    throw DimensionError("estimate_bd_time: A, C and data disagree");
  }
  check_fixed_d(opts, ny, nu);
  const bool with_d = !opts.fixed_d.has_value();
  const Eigen::Index unknowns = n * nu + (with_d ? ny * nu : 0);
  require_rows(N * ny, unknowns, "estimate_bd_time");

  Matrix design = Matrix::Zero(N * ny, unknowns);
  detail::fill_sensitivity_columns(A, C, data.u, design, 0);
  if (with_d) {
    for (Eigen::Index t = 0; t < N; ++t) {
      for (Eigen::Index j = 0; j < nu; ++j) {
        for (Eigen::Index r = 0; r < ny; ++r) {
          design(t * ny + r, n * nu + j * ny + r) = data.u(t, j);
        }
      }
    }
  }
  Matrix target = data.y;
  if (!with_d) target -= data.u * opts.fixed_d->transpose();
  // Row-major flattening matches the (t, r) row order of the design.
  Matrix targetT = target.transpose();
  const Eigen::Map<const Vector> rhs(targetT.data(), N * ny);

  const auto ls = solve_min_norm(design, rhs, opts.rank_tol);
  const Vector& theta = ls.solution.col(0);

  StateSpaceModel est;
  est.domain = Domain::discrete(data.ts);
  est.A = A;
  est.C = C;
  est.B = Eigen::Map<const Matrix>(theta.data(), n, nu);
  est.D = with_d ? Matrix(Eigen::Map<const Matrix>(theta.data() + n * nu, ny, nu))
                 : *opts.fixed_d;
  RegressionResult res;
  res.cost = prediction_cost(est, data);
  res.estimate = std::move(est);
  res.rank = ls.rank;
  res.unknowns = static_cast<int>(unknowns);
  res.rank_deficient = ls.rank < unknowns;
  return res;
}

RegressionResult estimate_cd_time(const Matrix& A, const Matrix& B,
                                  const TimeSeriesData& data,
                                  const RegressionOptions& opts) {
  const Eigen::Index n = A.rows(), nu = B.cols(), ny = data.ny(), N = data.N();
  if (A.cols() != n || B.rows() != n || data.nu() != nu) {
    throw DimensionError("estimate_cd_time: A, B and data disagree");
  }
  check_fixed_d(opts, ny, nu);
  const bool with_d = !opts.fixed_d.has_value();
  const Eigen::Index unknowns = n + (with_d ? nu : 0);
  require_rows(N, unknowns, "estimate_cd_time");

  // Each output row is an independent regression on [x(t); u(t)].
  Matrix design(N, unknowns);
  design.leftCols(n) = simulate_states(A, B, data.u);
  if (with_d) design.rightCols(nu) = data.u;
  Matrix target = data.y;
  if (!with_d) target -= data.u * opts.fixed_d->transpose();

  const auto ls = solve_min_norm(design, target, opts.rank_tol);
  StateSpaceModel est;
  est.domain = Domain::discrete(data.ts);
  est.A = A;
  est.B = B;
  est.C = ls.solution.topRows(n).transpose();
  est.D = with_d ? Matrix(ls.solution.bottomRows(nu).transpose()) : *opts.fixed_d;
  RegressionResult res;
  res.cost = prediction_cost(est, data);
  res.estimate = std::move(est);
  res.rank = ls.rank;
  res.unknowns = static_cast<int>(unknowns);
  res.rank_deficient = ls.rank < unknowns;
  return res;
}

RegressionResult estimate_bd_freq(const Matrix& A, const Matrix& C,
                                  const FrequencyData& fd,
                                  const RegressionOptions& opts) {
  const Eigen::Index n = A.rows(), ny = C.rows(), nu = fd.nu();
  check_freq_shapes(fd, n, A, ny, nu, "estimate_bd_freq");
  if (C.cols() != n || fd.ny() != ny) {
    throw DimensionError("estimate_bd_freq: C and data disagree");
  }
  check_fixed_d(opts, ny, nu);
  const bool with_d = !opts.fixed_d.has_value();
  const auto CR = detail::left_resolvent(A, C, fd.domain, fd.omega);
  const Matrix design = bd_freq_design(CR, n, ny, with_d);
  require_rows(design.rows(), design.cols(), "estimate_bd_freq");
  const auto ls = solve_min_norm(design, bd_freq_rhs(fd, opts.fixed_d), opts.rank_tol);

  StateSpaceModel est;
  est.domain = fd.domain;
  est.A = A;
  est.C = C;
  est.B = ls.solution.topRows(n);
  est.D = with_d ? Matrix(ls.solution.bottomRows(ny)) : *opts.fixed_d;
  RegressionResult res;
  res.cost = frequency_cost(est, fd);
  res.estimate = std::move(est);
  res.rank = ls.rank;
  res.unknowns = static_cast<int>(design.cols());
  res.rank_deficient = ls.rank < design.cols();
  return res;
}

RegressionResult estimate_cd_freq(const Matrix& A, const Matrix& B,
                                  const FrequencyData& fd,
                                  const RegressionOptions& opts) {
  const Eigen::Index n = A.rows(), nu = B.cols(), ny = fd.ny();
  check_freq_shapes(fd, n, A, ny, nu, "estimate_cd_freq");
  if (B.rows() != n || fd.nu() != nu) {
    throw DimensionError("estimate_cd_freq: B and data disagree");
  }
  check_fixed_d(opts, ny, nu);
  const bool with_d = !opts.fixed_d.has_value();
  const auto RB = detail::right_resolvent(A, B, fd.domain, fd.omega);
  const Matrix design = cd_freq_design(RB, n, nu, with_d);
  require_rows(design.rows(), design.cols(), "estimate_cd_freq");
  const auto ls = solve_min_norm(design, cd_freq_rhs(fd, opts.fixed_d), opts.rank_tol);

  StateSpaceModel est;
  est.domain = fd.domain;
  est.A = A;
  est.B = B;
  est.C = ls.solution.topRows(n).transpose();
  est.D = with_d ? Matrix(ls.solution.bottomRows(nu).transpose()) : *opts.fixed_d;
  RegressionResult res;
  res.cost = frequency_cost(est, fd);
  res.estimate = std::move(est);
  res.rank = ls.rank;
  res.unknowns = static_cast<int>(design.cols());
  res.rank_deficient = ls.rank < design.cols();
  return res;
}

double normal_equation_residual(const StateSpaceModel& model,
                                const FrequencyData& fd, MatrixPair which) {
  if (fd.ny() != model.ny() || fd.nu() != model.nu()) {
    throw DimensionError("normal_equation_residual: shape mismatch");
  }
  const Eigen::Index n = model.n();
  Matrix design, rhs, theta;
  if (which == MatrixPair::BD) {
    design = bd_freq_design(
        detail::left_resolvent(model.A, model.C, fd.domain, fd.omega), n,
        model.ny(), true);
    rhs = bd_freq_rhs(fd, std::nullopt);
    theta.resize(n + model.ny(), model.nu());
    theta << model.B, model.D;
  } else {
    design = cd_freq_design(
        detail::right_resolvent(model.A, model.B, fd.domain, fd.omega), n,
        model.nu(), true);
    rhs = cd_freq_rhs(fd, std::nullopt);
    theta.resize(n + model.nu(), model.ny());
    theta << model.C.transpose(), model.D.transpose();
  }
  return (design.transpose() * (design * theta - rhs)).norm();
}

}  // namespace ssid
