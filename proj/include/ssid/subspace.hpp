#pragma once

#include "ssid/model.hpp"

namespace ssid {

struct SubspaceOptions {
  int order = 0;
  /// Block rows of the Hankel matrices; 0 selects 2 * order + 2.
  int horizon = 0;
  /// Singular values below sv_tol * sigma_max count as zero.
  double sv_tol = 1e-10;
  /// Bilinear map parameter for continuous FRF data; 0 picks the mean
  /// of the frequency grid.
  double bilinear_alpha = 0.0;

  int effective_horizon() const { return horizon > 0 ? horizon : 2 * order + 2; }
};

struct SubspaceFit {
  StateSpaceModel model;
  /// Singular values that fixed the state basis.
  Vector singular_values;
  /// Input Hankel matrix had full row rank (time domain only).
  bool persistently_exciting = true;
};

/// MOESP-style estimate: (A, C) from the input-projected output Hankel
/// matrix, then (B, D) by estimate_bd_time.
SubspaceFit subspace_time_fit(const TimeSeriesData& data,
                              const SubspaceOptions& opts);
StateSpaceModel subspace_time(const TimeSeriesData& data,
                              const SubspaceOptions& opts);

/// Discrete FRF on a uniform grid over [0, pi/Ts]: inverse DFT to Markov
/// parameters, Ho-Kalman realization, then a (B, D) polish.
/// Continuous FRF: bilinear map to the unit circle, projection estimate of
/// (A, C) on the mapped grid, map back, then the (B, D) polish.
SubspaceFit subspace_freq_fit(const FrequencyData& fd,
                              const SubspaceOptions& opts);
StateSpaceModel subspace_freq(const FrequencyData& fd,
                              const SubspaceOptions& opts);

/// Bilinear (Tustin-type) map between a continuous model and a discrete one
/// on the unit circle: z = (alpha + s) / (alpha - s).
StateSpaceModel bilinear_to_discrete(const StateSpaceModel& continuous,
                                     double alpha);
StateSpaceModel bilinear_to_continuous(const StateSpaceModel& discrete,
                                       double alpha);

}  // namespace ssid
