#include "ssid/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "ssid/errors.hpp"
#include "ssid/io.hpp"
#include "ssid/random.hpp"
#include "ssid/refine.hpp"
#include "ssid/subspace.hpp"

namespace ssid {

namespace {

constexpr int kMaxRetries = 5;

// Thrown inside a trial to tag the failing stage.
struct StageFailure {
  std::string stage;
  std::string message;
};

template <class F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const std::exception& e) {
    throw StageFailure{name, e.what()};
  }
}

void require_finite(const char* name, double v) {
  if (!std::isfinite(v) || v < 0.0) {
    throw StageFailure{name, "non-finite error value"};
  }
}

RefineOptions refine_options(const BenchConfig& cfg) {
  RefineOptions o;
  o.max_sweeps = cfg.max_sweeps;
  o.rel_tol = cfg.rel_tol;
  return o;
}

// One draw of the time-domain pipeline.
TrialRecord time_trial(const BenchConfig& cfg, int trial, int attempt) {
  Rng rng = make_rng({cfg.seed, static_cast<std::uint64_t>(trial),
                      static_cast<std::uint64_t>(attempt)});
  const auto sys = stage("generate", [&] {
    return random_stable_discrete(cfg.order, cfg.nu, cfg.ny, rng());
  });
  const Matrix u = randn(rng, cfg.n_samples, cfg.nu);
  const TimeSeriesData clean(u, simulate(sys, u), 1.0);
  const TimeSeriesData noisy(
      u, clean.y + cfg.noise * randn(rng, cfg.n_samples, cfg.ny), 1.0);

  SubspaceOptions sopts;
  sopts.order = cfg.order;
  const auto mn = stage("mn", [&] { return subspace_time(noisy, sopts); });
  auto ropts = refine_options(cfg);
  ropts.fixed = FixedMatrices::only_a();
  const auto mpBC = stage("mpBC", [&] { return bcd_iterate(mn, noisy, ropts).model; });
  const auto mp = stage("mp", [&] {
    return gauss_newton_full(mn, noisy, refine_options(cfg)).model;
  });

  TrialRecord r;
  r.trial = trial;
  r.e_mn = stage("mn", [&] { return error_norm(clean, mn); });
  r.e_mpBC = stage("mpBC", [&] { return error_norm(clean, mpBC); });
  r.e_mp = stage("mp", [&] { return error_norm(clean, mp); });
  require_finite("mn", r.e_mn);
  require_finite("mpBC", r.e_mpBC);
  require_finite("mp", r.e_mp);
  r.train_mn = prediction_cost(mn, noisy);
  r.train_mpBC = prediction_cost(mpBC, noisy);
  r.train_mp = prediction_cost(mp, noisy);
  return r;
}

Vector frequency_grid(const BenchConfig& cfg) {
  return Vector::LinSpaced(cfg.n_freq, 0.0, cfg.freq_max);
}

TrialRecord freq_trial(const BenchConfig& cfg, int trial, int attempt) {
  Rng rng = make_rng({cfg.seed, static_cast<std::uint64_t>(trial),
                      static_cast<std::uint64_t>(attempt)});
  RandomSystemOptions gopts;
  gopts.with_feedthrough = cfg.feedthrough;
  const auto sys = stage("generate", [&] {
    return random_stable_continuous(cfg.order, cfg.nu, cfg.ny, rng(), gopts);
  });
  const Vector omega = frequency_grid(cfg);
  const auto G = stage("generate", [&] { return frequency_response(sys, omega); });
  std::vector<ComplexMatrix> Gn(G.size());
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (std::size_t k = 0; k < G.size(); ++k) {
    const Matrix a = randn(rng, cfg.ny, cfg.nu);
    const Matrix b = randn(rng, cfg.ny, cfg.nu);
    ComplexMatrix eps(cfg.ny, cfg.nu);
    eps.real() = a * inv_sqrt2;
    eps.imag() = b * inv_sqrt2;
    Gn[k] = G[k].array() * (1.0 + cfg.noise * eps.array());
  }
  const FrequencyData clean(omega, G, Domain::continuous());
  const FrequencyData noisy(omega, Gn, Domain::continuous());

  SubspaceOptions sopts;
  sopts.order = cfg.order;
  const auto mn = stage("mn", [&] { return subspace_freq(noisy, sopts); });
  auto ropts = refine_options(cfg);
  ropts.fixed = FixedMatrices::only_a();
  const auto mpBC = stage("mpBC", [&] { return bcd_iterate(mn, noisy, ropts).model; });
  const auto mp = stage("mp", [&] {
    return gauss_newton_full(mn, noisy, refine_options(cfg)).model;
  });

  TrialRecord r;
  r.trial = trial;
  r.e_mn = stage("mn", [&] { return frequency_cost(mn, clean); });
  r.e_mpBC = stage("mpBC", [&] { return frequency_cost(mpBC, clean); });
  r.e_mp = stage("mp", [&] { return frequency_cost(mp, clean); });
  require_finite("mn", r.e_mn);
  require_finite("mpBC", r.e_mpBC);
  require_finite("mp", r.e_mp);
  r.train_mn = frequency_cost(mn, noisy);
  r.train_mpBC = frequency_cost(mpBC, noisy);
  r.train_mp = frequency_cost(mp, noisy);
  return r;
}

template <class Trial>
TrialRecord run_with_retries(const BenchConfig& cfg, int trial, Trial&& one) {
  TrialRecord failed;
  failed.trial = trial;
  for (int attempt = 0; attempt <= kMaxRetries; ++attempt) {
    try {
      TrialRecord r = one(cfg, trial, attempt);
      r.ok = true;
      r.status = "ok";
      r.attempts = attempt + 1;
      return r;
    } catch (const StageFailure& f) {
      failed.status = "failed:" + f.stage;
      failed.message = f.message;
    } catch (const std::exception& e) {
      failed.status = "failed:other";
      failed.message = e.what();
    }
  }
  failed.ok = false;
  failed.attempts = kMaxRetries + 1;
  return failed;
}

template <class Trial>
std::vector<TrialRecord> run_all(const BenchConfig& cfg, Trial one) {
  cfg.validate();
  std::vector<TrialRecord> records(static_cast<std::size_t>(cfg.trials));
  int threads = cfg.threads > 0 ? cfg.threads
                                : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, cfg.trials);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < cfg.trials; i = next++) {
      records[static_cast<std::size_t>(i)] = run_with_retries(cfg, i, one);
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return records;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

BenchConfig BenchConfig::frequency_defaults() {
  BenchConfig c;
  c.domain = BenchDomain::FreqContinuous;
  c.noise = 0.2;
  c.seed = 7;
  return c;
}

void BenchConfig::validate() const {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  if (order < 1 || nu < 1 || ny < 1) {
    throw std::invalid_argument("order, nu and ny must be >= 1");
  }
  if (max_sweeps < 1) throw std::invalid_argument("max_sweeps must be >= 1");
  if (domain == BenchDomain::TimeDiscrete) {
    if (n_samples < 1) throw std::invalid_argument("n_samples must be >= 1");
    if (!(noise >= 0.0)) throw std::invalid_argument("noise must be >= 0");
  } else {
    if (n_freq < 2) throw std::invalid_argument("n_freq must be >= 2");
    if (!(freq_max > 0.0)) throw std::invalid_argument("freq_max must be > 0");
    if (!(noise >= 0.0 && noise <= 1.0)) {
      throw std::invalid_argument("noise fraction must lie in [0, 1]");
    }
  }
}

std::vector<TrialRecord> run_time_domain_bench(const BenchConfig& cfg) {
  if (cfg.domain != BenchDomain::TimeDiscrete) {
    throw std::invalid_argument("run_time_domain_bench needs a time-domain config");
  }
  return run_all(cfg, time_trial);
}

std::vector<TrialRecord> run_freq_domain_bench(const BenchConfig& cfg) {
  if (cfg.domain != BenchDomain::FreqContinuous) {
    throw std::invalid_argument("run_freq_domain_bench needs a frequency-domain config");
  }
  return run_all(cfg, freq_trial);
}

std::vector<TrialRecord> run_bench(const BenchConfig& cfg) {
  return cfg.domain == BenchDomain::TimeDiscrete ? run_time_domain_bench(cfg)
                                                 : run_freq_domain_bench(cfg);
}

BenchSummary summarize(const std::vector<TrialRecord>& records) {
  BenchSummary s;
  std::vector<double> mn, mpBC, mp;
  int w_bc_mn = 0, w_mp_bc = 0, w_mp_mn = 0;
  for (const auto& r : records) {
    if (!r.ok) {
      ++s.failures;
      continue;
    }
    mn.push_back(r.e_mn);
    mpBC.push_back(r.e_mpBC);
    mp.push_back(r.e_mp);
    w_bc_mn += r.e_mpBC < r.e_mn;
    w_mp_bc += r.e_mp < r.e_mpBC;
    w_mp_mn += r.e_mp < r.e_mn;
  }
  s.successes = static_cast<int>(mn.size());
  if (s.successes == 0) throw std::invalid_argument("summarize: no successful trials");
  s.median_mn = median(mn);
  s.median_mpBC = median(mpBC);
  s.median_mp = median(mp);
  const double pct = 100.0 / s.successes;
  s.mpBC_vs_mn = w_bc_mn * pct;
  s.mp_vs_mpBC = w_mp_bc * pct;
  s.mp_vs_mn = w_mp_mn * pct;
  return s;
}

void write_records_csv(std::ostream& out, const std::vector<TrialRecord>& records) {
  std::vector<const TrialRecord*> sorted;
  for (const auto& r : records) sorted.push_back(&r);
  std::sort(sorted.begin(), sorted.end(),
            [](const TrialRecord* a, const TrialRecord* b) { return a->trial < b->trial; });
  out << "trial,e_mn,e_mpBC,e_mp,status\n";
  for (const auto* r : sorted) {
    out << r->trial << ',';
    if (r->ok) {
      out << format_double(r->e_mn) << ',' << format_double(r->e_mpBC) << ','
          << format_double(r->e_mp);
    } else {
      out << ",,";
    }
    out << ',' << r->status << '\n';
  }
}

nlohmann::json summary_to_json(const BenchSummary& s) {
  nlohmann::json j;
  j["medians"] = {{"mn", s.median_mn}, {"mpBC", s.median_mpBC}, {"mp", s.median_mp}};
  j["win_pct"] = {{"mpBC_vs_mn", s.mpBC_vs_mn},
                  {"mp_vs_mpBC", s.mp_vs_mpBC},
                  {"mp_vs_mn", s.mp_vs_mn}};
  j["failures"] = s.failures;
  j["successes"] = s.successes;
  return j;
}

}  // namespace ssid
