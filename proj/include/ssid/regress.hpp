#pragma once

#include <optional>

#include "ssid/model.hpp"

namespace ssid {

/// Outcome of a closed-form (B,D) or (C,D) least-squares fit.
struct RegressionResult {
  StateSpaceModel estimate;
  /// prediction_cost or frequency_cost of `estimate`.
  double cost = 0.0;
  int rank = 0;
  int unknowns = 0;
  /// The design matrix lost rank; `estimate` holds the minimum-norm solution.
  bool rank_deficient = false;
};

struct RegressionOptions {
  /// Keep D at this value instead of estimating it.
  std::optional<Matrix> fixed_d;
  /// Relative pivot threshold of the complete orthogonal decomposition.
  double rank_tol = 1e-12;
};

/// (B,D) minimizing the output-error cost with (A,C) held fixed.
RegressionResult estimate_bd_time(const Matrix& A, const Matrix& C,
                                  const TimeSeriesData& data,
                                  const RegressionOptions& opts = {});

/// (C,D) minimizing the output-error cost with (A,B) held fixed.
RegressionResult estimate_cd_time(const Matrix& A, const Matrix& B,
                                  const TimeSeriesData& data,
                                  const RegressionOptions& opts = {});

/// Frequency-domain counterparts. Real and imaginary parts are stacked so the
/// unknowns stay real.
RegressionResult estimate_bd_freq(const Matrix& A, const Matrix& C,
                                  const FrequencyData& fd,
                                  const RegressionOptions& opts = {});
RegressionResult estimate_cd_freq(const Matrix& A, const Matrix& B,
                                  const FrequencyData& fd,
                                  const RegressionOptions& opts = {});

enum class MatrixPair { BD, CD };

/// Norm of the stacked normal-equation left-hand sides of the frequency cost
/// with respect to the chosen pair. Zero at a least-squares solution.
double normal_equation_residual(const StateSpaceModel& model,
                                const FrequencyData& fd, MatrixPair which);

}  // namespace ssid
