#pragma once

#include <string>
#include <vector>

#include "ssid/model.hpp"
#include "ssid/regress.hpp"

namespace ssid {

/// Which of A, B, C, D are held constant.
struct FixedMatrices {
  bool A = false;
  bool B = false;
  bool C = false;
  bool D = false;

  static FixedMatrices only_a() { return {true, false, false, false}; }
};

struct RefineOptions {
  int max_sweeps = 50;
  /// Stop once a sweep lowers the cost by at most rel_tol * cost; 0 stops
  /// only when a sweep makes no progress.
  double rel_tol = 1e-9;
  /// Initial Levenberg-Marquardt damping. Zero gives plain Gauss-Newton
  /// until the first rejected step.
  double damping_init = 1e-3;
  /// Reject steps that turn a stable A unstable.
  bool enforce_stability = true;
  FixedMatrices fixed;

  void validate() const;
};

enum class Method { BCD, GN_BCD, GN_FULL };

std::string to_string(Method m);
Method method_from_string(const std::string& s);

struct RefinementReport {
  Method method = Method::BCD;
  /// Initial cost, then the cost after every half-step (BCD) or iteration (GN).
  std::vector<double> cost_trajectory;
  /// Initial cost, then the cost after every full sweep.
  std::vector<double> sweep_costs;
  int sweeps = 0;
  bool converged = false;
  /// Regression steps whose design matrix was rank deficient (BCD only).
  int rank_deficient_steps = 0;
  double wall_time_s = 0.0;
};

struct RefineResult {
  StateSpaceModel model;
  RefinementReport report;
};

/// Alternating (B,D) and (C,D) regressions with A fixed, starting with (B,D).
RefineResult bcd_iterate(const StateSpaceModel& model, const TimeSeriesData& data,
                         const RefineOptions& opts = {});
RefineResult bcd_iterate(const StateSpaceModel& model, const FrequencyData& fd,
                         const RefineOptions& opts = {});

/// Damped Gauss-Newton over (B,C,D) with A fixed.
RefineResult gauss_newton_bcd(const StateSpaceModel& model,
                              const TimeSeriesData& data,
                              const RefineOptions& opts = {});
RefineResult gauss_newton_bcd(const StateSpaceModel& model,
                              const FrequencyData& fd,
                              const RefineOptions& opts = {});

/// Levenberg-Marquardt over every non-fixed matrix (all four by default).
RefineResult gauss_newton_full(const StateSpaceModel& model,
                               const TimeSeriesData& data,
                               const RefineOptions& opts = {});
RefineResult gauss_newton_full(const StateSpaceModel& model,
                               const FrequencyData& fd,
                               const RefineOptions& opts = {});

struct OptimizerComparison {
  RefineResult bcd;
  RefineResult gn_bcd;
  RefineResult gn_full;
  double initial_cost = 0.0;

  /// Row s holds the sweep-s costs of the three methods divided by the
  /// initial cost; methods that stopped early repeat their last value.
  std::vector<std::vector<double>> normalized(int steps) const;
};

OptimizerComparison compare_optimizers(const StateSpaceModel& model0,
                                       const TimeSeriesData& data,
                                       const RefineOptions& opts = {});
OptimizerComparison compare_optimizers(const StateSpaceModel& model0,
                                       const FrequencyData& fd,
                                       const RefineOptions& opts = {});

/// Parameter vector [vec A, vec B, vec C, vec D] (column-major) over the
/// matrices that are not fixed.
Vector pack_parameters(const StateSpaceModel& model, const FixedMatrices& fixed);
StateSpaceModel unpack_parameters(const StateSpaceModel& base,
                                  const Vector& theta,
                                  const FixedMatrices& fixed);

/// Residuals yhat - y, flattened time-major; their squared norm is the cost.
Vector residual_vector(const StateSpaceModel& model, const TimeSeriesData& data);
/// Residuals G(model) - G_k as [re, im] pairs per entry, k-major then
/// column-major within G_k.
Vector residual_vector(const StateSpaceModel& model, const FrequencyData& fd);

/// Analytic Jacobians of residual_vector w.r.t. pack_parameters.
Matrix residual_jacobian(const StateSpaceModel& model,
                         const TimeSeriesData& data, const FixedMatrices& fixed);
Matrix residual_jacobian(const StateSpaceModel& model, const FrequencyData& fd,
                         const FixedMatrices& fixed);

}  // namespace ssid
