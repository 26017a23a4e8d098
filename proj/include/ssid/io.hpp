#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>

#include "json.hpp"

#include "ssid/model.hpp"
#include "ssid/refine.hpp"

namespace ssid {

/// Malformed input file; the message names the offending field or line.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// {"n", "nu", "ny", "ts" (0 = continuous), "A", "B", "C", "D"} with
/// row-major matrix entries.
nlohmann::json model_to_json(const StateSpaceModel& model);
StateSpaceModel model_from_json(const nlohmann::json& j);
StateSpaceModel read_model(const std::string& path);
void write_model(const std::string& path, const StateSpaceModel& model);

/// Header `t,u1..u<nu>,y1..y<ny>`. The sample time comes from `ts` when
/// given, else from a sidecar `<path>.json` holding {"ts": ...}, else from
/// the spacing of the t column.
TimeSeriesData read_time_series_csv(const std::string& path,
                                    std::optional<double> ts = std::nullopt);
TimeSeriesData parse_time_series_csv(std::istream& in,
                                     std::optional<double> ts);
void write_time_series_csv(std::ostream& out, const TimeSeriesData& data);
void write_time_series_csv(const std::string& path, const TimeSeriesData& data);

/// Header `omega` then `reG_i_j,imG_i_j` for i = 1..ny, j = 1..nu. The
/// domain comes from `ts` (0 = continuous) or a sidecar `<path>.json`;
/// continuous when neither is present.
FrequencyData read_frf_csv(const std::string& path,
                           std::optional<double> ts = std::nullopt);
FrequencyData parse_frf_csv(std::istream& in, const Domain& domain);
void write_frf_csv(std::ostream& out, const FrequencyData& fd);
void write_frf_csv(const std::string& path, const FrequencyData& fd);

/// {method, converged, sweeps, wall_time_s, cost_trajectory}.
nlohmann::json report_to_json(const RefinementReport& report);

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

}  // namespace ssid
