#pragma once

// Uniform view of the time- and frequency-domain costs for the refiners.

#include "ssid/model.hpp"
#include "ssid/refine.hpp"
#include "ssid/regress.hpp"

namespace ssid::detail {

class Objective {
 public:
  virtual ~Objective() = default;
  virtual double cost(const StateSpaceModel& model) const = 0;
  virtual Vector residuals(const StateSpaceModel& model) const = 0;
  virtual Matrix jacobian(const StateSpaceModel& model,
                          const FixedMatrices& fixed) const = 0;
  virtual RegressionResult estimate_bd(const StateSpaceModel& model,
                                       const RegressionOptions& opts) const = 0;
  virtual RegressionResult estimate_cd(const StateSpaceModel& model,
                                       const RegressionOptions& opts) const = 0;
};

class TimeObjective final : public Objective {
 public:
  explicit TimeObjective(const TimeSeriesData& data) : data_(data) {}
  double cost(const StateSpaceModel& model) const override;
  Vector residuals(const StateSpaceModel& model) const override;
  Matrix jacobian(const StateSpaceModel& model,
                  const FixedMatrices& fixed) const override;
  RegressionResult estimate_bd(const StateSpaceModel& model,
                               const RegressionOptions& opts) const override;
  RegressionResult estimate_cd(const StateSpaceModel& model,
                               const RegressionOptions& opts) const override;

 private:
  const TimeSeriesData& data_;
};

class FrequencyObjective final : public Objective {
 public:
  explicit FrequencyObjective(const FrequencyData& fd) : fd_(fd) {}
  double cost(const StateSpaceModel& model) const override;
  Vector residuals(const StateSpaceModel& model) const override;
  Matrix jacobian(const StateSpaceModel& model,
                  const FixedMatrices& fixed) const override;
  RegressionResult estimate_bd(const StateSpaceModel& model,
                               const RegressionOptions& opts) const override;
  RegressionResult estimate_cd(const StateSpaceModel& model,
                               const RegressionOptions& opts) const override;

 private:
  const FrequencyData& fd_;
};

/// Column offsets of each matrix block in the packed parameter vector;
/// -1 for fixed blocks.
struct ParameterLayout {
  Eigen::Index a = -1, b = -1, c = -1, d = -1, size = 0;
};
ParameterLayout parameter_layout(const StateSpaceModel& model,
                                 const FixedMatrices& fixed);

}  // namespace ssid::detail
