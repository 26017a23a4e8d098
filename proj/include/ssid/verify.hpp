#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace ssid {

/// Outcome of a randomized property check.
struct PropertyReport {
  std::string property;
  bool pass = false;
  int trials = 0;
  int failures = 0;
  /// Largest residual relative to its tolerance, with the raw residual and
  /// tolerance behind it. Passing needs worst_ratio < 1 in every trial.
  double worst_ratio = 0.0;
  double worst_residual = 0.0;
  double tolerance = 0.0;
  std::string note;
};

/// lemma1, thm-fixed-a, simo-two-step, commutant, eigen-regression,
/// simo-similarity.
const std::vector<std::string>& property_names();

/// Throws std::invalid_argument for an unknown name or trials < 1.
PropertyReport verify_property(const std::string& name, int trials,
                               std::uint64_t seed);

nlohmann::json property_report_to_json(const PropertyReport& r);

}  // namespace ssid
