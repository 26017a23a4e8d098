#include "ssid/subspace.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/LU>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "ssid/errors.hpp"
#include "ssid/regress.hpp"

namespace ssid {

namespace {

void check_order(const SubspaceOptions& opts, int ny) {
  if (opts.order < 1) throw DimensionError("subspace order must be >= 1");
  const int r = opts.effective_horizon();
  if (r <= opts.order || r * ny < opts.order) {
    throw DimensionError("horizon " + std::to_string(r) +
                         " too short for order " + std::to_string(opts.order));
  }
}

// Block Hankel matrix with `rows` block rows built from the rows of `signal`
// (each sample a row); column c holds samples c .. c + rows - 1 stacked.
Matrix block_hankel(const Matrix& signal, int rows, Eigen::Index cols) {
  const Eigen::Index m = signal.cols();
  Matrix H(rows * m, cols);
  for (int i = 0; i < rows; ++i) {
    H.middleRows(i * m, m) = signal.middleRows(i, cols).transpose();
  }
  return H;
}

// Lower-right block of the LQ factor of [top; bottom], i.e. the part of
// `bottom` orthogonal to the row space of `top`, compressed.
Matrix projected_block(const Matrix& top, const Matrix& bottom) {
  Matrix stacked(top.cols(), top.rows() + bottom.rows());
  stacked << top.transpose(), bottom.transpose();
  Eigen::HouseholderQR<Matrix> qr(stacked);
  const Eigen::Index p = top.rows(), q = bottom.rows();
  const Eigen::Index k = std::min<Eigen::Index>(stacked.rows(), p + q);
  Matrix R = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  // L = R^T; L22 = (R22)^T.
  if (k <= p) return Matrix::Zero(q, 1);
  return R.block(p, p, k - p, q).transpose();
}

struct ShiftEstimate {
  Matrix A, C;
  Vector singular_values;
};

// (A, C) from the column space of M: Gamma = U_n S_n^{1/2}, C its first ny
// rows and A from the shift-invariance least squares. Singular values below
// 1e-11 * reference_norm are zero regardless of sv_tol.
ShiftEstimate shift_invariance(const Matrix& M, int n, Eigen::Index ny,
                               double sv_tol, double reference_norm,
                               const char* what) {
  Eigen::BDCSVD<Matrix> svd(M, Eigen::ComputeThinU);
  const Vector s = svd.singularValues();
  const double floor = std::max(sv_tol * s[0], 1e-11 * reference_norm);
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s[i] > floor) ++rank;
  }
  if (rank < n) {
    throw RankDeficiencyError(std::string(what) + ": order exceeds numerical rank",
                              rank, n);
  }
  const Matrix gamma = svd.matrixU().leftCols(n) *
                       s.head(n).cwiseSqrt().asDiagonal();
  const Eigen::Index rows = gamma.rows();
  ShiftEstimate est;
  est.C = gamma.topRows(ny);
  est.A = gamma.topRows(rows - ny).completeOrthogonalDecomposition().solve(
      gamma.bottomRows(rows - ny));
  est.singular_values = s;
  return est;
}

double max_response_norm(const FrequencyData& fd) {
  double m = 0.0;
  for (const auto& g : fd.G) m = std::max(m, g.norm());
  return m;
}

bool uniform_half_circle(const FrequencyData& fd) {
  const Eigen::Index K = fd.K();
  if (K < 3) return false;
  const double top = std::numbers::pi / fd.domain.ts();
  const double step = top / static_cast<double>(K - 1);
  for (Eigen::Index k = 0; k < K; ++k) {
    if (std::abs(fd.omega[k] - step * static_cast<double>(k)) > 1e-9 * top) {
      return false;
    }
  }
  return true;
}

SubspaceFit subspace_freq_discrete(const FrequencyData& fd,
                                   const SubspaceOptions& opts) {
  if (!uniform_half_circle(fd)) {
    throw DimensionError(
        "discrete FRF estimator needs a uniform grid covering [0, pi/Ts]");
  }
  const Eigen::Index K = fd.K(), ny = fd.ny(), nu = fd.nu();
  const Eigen::Index M = 2 * (K - 1);
  const int r = opts.effective_horizon();
  if (2 * r + 1 > M) {
    throw DimensionError("too few frequencies for horizon " + std::to_string(r));
  }
  // Inverse DFT over the full circle; the lower half is the conjugate mirror.
  auto sample = [&](Eigen::Index l) -> ComplexMatrix {
    return l < K ? fd.G[l] : ComplexMatrix(fd.G[M - l].conjugate());
  };
  std::vector<Matrix> h(2 * r + 1, Matrix::Zero(ny, nu));
  for (Eigen::Index l = 0; l < M; ++l) {
    const ComplexMatrix g = sample(l);
    for (int m = 0; m <= 2 * r; ++m) {
      const auto w = std::polar(1.0, 2.0 * std::numbers::pi *
                                         static_cast<double>((l * m) % M) /
                                         static_cast<double>(M));
      h[m] += (g * w).real();
    }
  }
  for (auto& hm : h) hm /= static_cast<double>(M);

  // Ho-Kalman: Hankel of h(1), h(2), ... with r block rows and columns.
  Matrix hankel(r * ny, r * nu);
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < r; ++j) {
      hankel.block(i * ny, j * nu, ny, nu) = h[1 + i + j];
    }
  }
  const auto est = shift_invariance(hankel, opts.order, ny, opts.sv_tol,
                                    max_response_norm(fd) * r, "Hankel of Markov parameters");
  const auto polish = estimate_bd_freq(est.A, est.C, fd);
  return {polish.estimate, est.singular_values, true};
}

SubspaceFit subspace_freq_continuous(const FrequencyData& fd,
                                     const SubspaceOptions& opts) {
  const Eigen::Index K = fd.K(), ny = fd.ny(), nu = fd.nu();
  const int q = opts.effective_horizon();
  double alpha = opts.bilinear_alpha;
  if (!(alpha > 0.0)) alpha = fd.omega.mean();
  if (!(alpha > 0.0)) throw DimensionError("cannot choose a bilinear map scale");
  if (2 * K * nu < q * (nu + ny)) {
    throw DimensionError("too few frequencies for horizon " + std::to_string(q));
  }
  // z_k^p G_k stacked over p, and the matching input blocks z_k^p I,
  // with real and imaginary parts as separate columns.
  Matrix Y(q * ny, 2 * K * nu), U(q * nu, 2 * K * nu);
  for (Eigen::Index k = 0; k < K; ++k) {
    const std::complex<double> s(0.0, fd.omega[k]);
    const std::complex<double> z = (alpha + s) / (alpha - s);
    std::complex<double> zp = 1.0;
    for (int p = 0; p < q; ++p) {
      const ComplexMatrix yb = zp * fd.G[k];
      Y.block(p * ny, k * nu, ny, nu) = yb.real();
      Y.block(p * ny, (K + k) * nu, ny, nu) = yb.imag();
      U.block(p * nu, k * nu, nu, nu) = zp.real() * Matrix::Identity(nu, nu);
      U.block(p * nu, (K + k) * nu, nu, nu) = zp.imag() * Matrix::Identity(nu, nu);
      zp *= z;
    }
  }
  const auto est = shift_invariance(projected_block(U, Y), opts.order, ny,
                                    opts.sv_tol, Y.norm(), "projected FRF matrix");
  StateSpaceModel disc(est.A, Matrix::Zero(opts.order, nu), est.C,
                       Matrix::Zero(ny, nu), Domain::discrete(1.0));
  StateSpaceModel cont = bilinear_to_continuous(disc, alpha);
  const auto polish = estimate_bd_freq(cont.A, cont.C, fd);
  return {polish.estimate, est.singular_values, true};
}

}  // namespace

SubspaceFit subspace_time_fit(const TimeSeriesData& data,
                              const SubspaceOptions& opts) {
  check_order(opts, data.ny());
  const int r = opts.effective_horizon();
  const Eigen::Index N = data.N(), ny = data.ny();
  if (N < 4 * r) {
    throw DimensionError("subspace_time needs N >= 4 * horizon (" +
                         std::to_string(4 * r) + ")");
  }
  const Eigen::Index cols = N - r + 1;
  const Matrix Uh = block_hankel(data.u, r, cols);
  const Matrix Yh = block_hankel(data.y, r, cols);

  SubspaceFit fit;
  fit.persistently_exciting = numerical_rank(Uh, 1e-10) == Uh.rows();
  const auto est = shift_invariance(projected_block(Uh, Yh), opts.order,
                                    ny, opts.sv_tol, Yh.norm(),
                                    "projected output Hankel");
  fit.singular_values = est.singular_values;
  fit.model = estimate_bd_time(est.A, est.C, data).estimate;
  return fit;
}

StateSpaceModel subspace_time(const TimeSeriesData& data,
                              const SubspaceOptions& opts) {
  return subspace_time_fit(data, opts).model;
}

SubspaceFit subspace_freq_fit(const FrequencyData& fd,
                              const SubspaceOptions& opts) {
  check_order(opts, fd.ny());
  if (fd.K() < 1) throw DimensionError("no frequency data");
  return fd.domain.is_discrete() ? subspace_freq_discrete(fd, opts)
                                 : subspace_freq_continuous(fd, opts);
}

StateSpaceModel subspace_freq(const FrequencyData& fd,
                              const SubspaceOptions& opts) {
  return subspace_freq_fit(fd, opts).model;
}

StateSpaceModel bilinear_to_discrete(const StateSpaceModel& m, double alpha) {
  if (!m.domain.is_continuous()) throw DimensionError("expected a continuous model");
  const Eigen::Index n = m.n();
  const Matrix I = Matrix::Identity(n, n);
  Eigen::PartialPivLU<Matrix> lu(alpha * I - m.A);
  const double g = std::sqrt(2.0 * alpha);
  StateSpaceModel out = m;
  out.domain = Domain::discrete(1.0);
  out.A = lu.solve(alpha * I + m.A);
  out.B = g * lu.solve(m.B);
  out.C = g * m.C * lu.inverse();
  out.D = m.D + m.C * lu.solve(m.B);
  return out;
}

StateSpaceModel bilinear_to_continuous(const StateSpaceModel& m, double alpha) {
  const Eigen::Index n = m.n();
  const Matrix I = Matrix::Identity(n, n);
  Eigen::PartialPivLU<Matrix> lu(m.A + I);
  if (!(lu.rcond() > 1e-13)) {
    throw NumericalError("discrete model has a pole at z = -1");
  }
  const double g = std::sqrt(2.0 * alpha);
  StateSpaceModel out = m;
  out.domain = Domain::continuous();
  out.A = alpha * lu.solve(m.A - I);
  out.B = g * lu.solve(m.B);
  out.C = g * m.C * lu.inverse();
  out.D = m.D - m.C * lu.solve(m.B);
  return out;
}

}  // namespace ssid
