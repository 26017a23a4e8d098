#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

namespace ssid {

enum class BenchDomain { TimeDiscrete, FreqContinuous };

struct BenchConfig {
  BenchDomain domain = BenchDomain::TimeDiscrete;
  int trials = 50;
  int order = 7;
  int nu = 4;
  int ny = 4;
  /// Samples per record (time domain).
  int n_samples = 1000;
  /// Frequencies on the linear grid [0, freq_max] (frequency domain).
  int n_freq = 410;
  double freq_max = 10.0;
  /// Standard deviation of the additive output noise (time domain) or the
  /// multiplicative noise fraction (frequency domain).
  double noise = 1.0;
  std::uint64_t seed = 42;
  /// Frequency-domain systems get a random D.
  bool feedthrough = true;
  int max_sweeps = 50;
  double rel_tol = 1e-9;
  /// Worker threads; 0 uses the hardware concurrency.
  int threads = 0;

  /// Defaults for the frequency-domain experiment.
  static BenchConfig frequency_defaults();
  void validate() const;
};

struct TrialRecord {
  int trial = 0;
  bool ok = false;
  /// "ok" or "failed:<stage>".
  std::string status;
  std::string message;
  double e_mn = 0.0;
  double e_mpBC = 0.0;
  double e_mp = 0.0;
  /// Costs on the noisy training data.
  double train_mn = 0.0;
  double train_mpBC = 0.0;
  double train_mp = 0.0;
  /// Draws used, 1 when the first system worked.
  int attempts = 0;
};

std::vector<TrialRecord> run_time_domain_bench(const BenchConfig& cfg);
std::vector<TrialRecord> run_freq_domain_bench(const BenchConfig& cfg);
std::vector<TrialRecord> run_bench(const BenchConfig& cfg);

struct BenchSummary {
  double median_mn = 0.0;
  double median_mpBC = 0.0;
  double median_mp = 0.0;
  /// Percentages of successful trials where the first model has the
  /// strictly smaller error.
  double mpBC_vs_mn = 0.0;
  double mp_vs_mpBC = 0.0;
  double mp_vs_mn = 0.0;
  int successes = 0;
  int failures = 0;
};

/// Throws std::invalid_argument when no record succeeded.
BenchSummary summarize(const std::vector<TrialRecord>& records);

/// Header `trial,e_mn,e_mpBC,e_mp,status`, rows sorted by trial; failed
/// trials leave the error fields empty.
void write_records_csv(std::ostream& out, const std::vector<TrialRecord>& records);
nlohmann::json summary_to_json(const BenchSummary& s);

}  // namespace ssid
