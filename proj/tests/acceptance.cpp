// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
// failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include <Eigen/LU>

#include "oracles.hpp"
#include "ssid/bench.hpp"
#include "ssid/cli.hpp"
#include "ssid/errors.hpp"
#include "ssid/random.hpp"
#include "ssid/refine.hpp"
#include "ssid/regress.hpp"
#include "ssid/theory.hpp"

using namespace ssid;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

int uniform_int(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

Matrix observable_row(Rng& rng, const Matrix& A) {
  for (;;) {
    Matrix c = randn(rng, 1, A.rows());
    if (observable(A, c, 1e-8)) return c;
  }
}

TimeSeriesData noisy_record(Rng& rng, const StateSpaceModel& m, int N) {
  const Matrix u = randn(rng, N, m.nu());
  return {u, simulate(m, u) + 0.1 * randn(rng, N, m.ny()), 1.0};
}

// Alternates between a discrete half-circle grid and a continuous grid.
FrequencyData noisy_frf(Rng& rng, const StateSpaceModel& m, int K) {
  const double top = m.domain.is_discrete() ? std::numbers::pi : 10.0;
  const Vector w = Vector::LinSpaced(K, 0.0, top);
  auto G = frequency_response(m, w);
  for (auto& g : G) {
    ComplexMatrix e(g.rows(), g.cols());
    e.real() = randn(rng, g.rows(), g.cols());
    e.imag() = randn(rng, g.rows(), g.cols());
    g += 0.1 * e;
  }
  return {w, G, m.domain};
}

StateSpaceModel random_system(Rng& rng, int n, int nu, int ny, bool continuous) {
  return continuous ? random_stable_continuous(n, nu, ny, rng(), {true})
                    : random_stable_discrete(n, nu, ny, rng(), {true});
}

StateSpaceModel random_start(Rng& rng, const StateSpaceModel& m) {
  return {m.A, randn(rng, m.n(), m.nu()), randn(rng, m.ny(), m.n()),
          randn(rng, m.ny(), m.nu()), m.domain};
}

// Runs GN_BCD to convergence; near-repeated eigenvalues can need several
// hundred sweeps.
template <class Data>
double fixed_a_gap(Rng& rng, const StateSpaceModel& sys, const Data& data, int& sweeps) {
  const Matrix C0 = observable_row(rng, sys.A);
  double reg = 0.0;
  if constexpr (std::is_same_v<Data, TimeSeriesData>) {
    reg = estimate_bd_time(sys.A, C0, data).cost;
  } else {
    reg = estimate_bd_freq(sys.A, C0, data).cost;
  }
  RefineOptions o;
  o.max_sweeps = 5000;
  o.rel_tol = 1e-15;
  const auto rep = gauss_newton_bcd(random_start(rng, sys), data, o).report;
  sweeps = std::max(sweeps, rep.sweeps);
  const double gn = rep.cost_trajectory.back();
  return std::abs(gn - reg) / (1.0 + reg);
}

// Largest relative deviation of trajectory entries after `from`.
double flatness(const std::vector<double>& v, std::size_t from) {
  double worst = 0.0;
  for (std::size_t i = from + 1; i < v.size(); ++i) {
    worst = std::max(worst, std::abs(v[i] - v[from]) / v[from]);
  }
  return worst;
}

template <class Data>
double sweep2_change(Rng& rng, const StateSpaceModel& sys, const Data& data) {
  RefineOptions o;
  o.max_sweeps = 3;
  o.rel_tol = 0.0;
  const auto s = bcd_iterate(random_start(rng, sys), data, o).report.sweep_costs;
  if (s.size() < 3) return 0.0;
  return (s[1] - s[2]) / s[1];
}

// ---------------------------------------------------------------------------

Outcome fixed_a_optimality(bool frequency, int instances, std::uint64_t key) {
  double worst = 0.0;
  int sweeps = 0;
  for (int i = 0; i < instances; ++i) {
    Rng rng = make_rng({key, static_cast<std::uint64_t>(i)});
    const int n = uniform_int(rng, 1, 5), nu = uniform_int(rng, 1, 3);
    const auto sys = random_system(rng, n, nu, 1, frequency && i % 2 == 1);
    const double gap = frequency ? fixed_a_gap(rng, sys, noisy_frf(rng, sys, 64), sweeps)
                                 : fixed_a_gap(rng, sys, noisy_record(rng, sys, 300), sweeps);
    worst = std::max(worst, gap);
  }
  return {worst < 1e-7, "worst relative gap " + sci(worst) + " (< 1e-7), slowest run " +
                            std::to_string(sweeps) + " sweeps"};
}

Outcome miso_flatness(bool frequency, int instances, std::uint64_t key) {
  double worst = 0.0;
  for (int i = 0; i < instances; ++i) {
    Rng rng = make_rng({key, static_cast<std::uint64_t>(i)});
    const int n = uniform_int(rng, 1, 5), nu = uniform_int(rng, 1, 3);
    const auto sys = random_system(rng, n, nu, 1, frequency && i % 2 == 1);
    const auto start = random_start(rng, sys);
    const auto rep = frequency ? bcd_iterate(start, noisy_frf(rng, sys, 64)).report
                               : bcd_iterate(start, noisy_record(rng, sys, 300)).report;
    worst = std::max(worst, flatness(rep.cost_trajectory, 1));
  }
  return {worst < 1e-9, "worst drift after first (B,D) step " + sci(worst) + " (< 1e-9)"};
}

Outcome simo_two_step(bool frequency, int instances, std::uint64_t key) {
  double worst = 0.0;
  for (int i = 0; i < instances; ++i) {
    Rng rng = make_rng({key, static_cast<std::uint64_t>(i)});
    const int n = uniform_int(rng, 1, 5), ny = uniform_int(rng, 2, 3);
    const auto sys = random_system(rng, n, 1, ny, frequency && i % 2 == 1);
    const double c = frequency ? sweep2_change(rng, sys, noisy_frf(rng, sys, 64))
                               : sweep2_change(rng, sys, noisy_record(rng, sys, 300));
    worst = std::max(worst, std::abs(c));
  }
  // A 2x2 MIMO instance where the second sweep still matters.
  double best_mimo = 0.0;
  for (int i = 0; i < 20 && best_mimo <= 1e-6; ++i) {
    Rng rng = make_rng({key, 1000u + static_cast<std::uint64_t>(i)});
    const auto sys = random_system(rng, 3, 2, 2, false);
    const double c = frequency ? sweep2_change(rng, sys, noisy_frf(rng, sys, 64))
                               : sweep2_change(rng, sys, noisy_record(rng, sys, 300));
    best_mimo = std::max(best_mimo, c);
  }
  return {worst < 1e-10 && best_mimo > 1e-6,
          "SIMO worst sweep-2 change " + sci(worst) + " (< 1e-10); MIMO sweep-2 gain " +
              sci(best_mimo) + " (> 1e-6)"};
}

Outcome commuting_transform() {
  double worst_comm = 0.0, worst_markov = 0.0;
  for (int i = 0; i < 100; ++i) {
    Rng rng = make_rng({4, static_cast<std::uint64_t>(i)});
    const int n = uniform_int(rng, 1, 5), nu = uniform_int(rng, 1, 3);
    const auto sys = random_stable_discrete(n, nu, 1, rng());
    const Matrix C0 = observable_row(rng, sys.A);
    const auto tr = construct_T(sys.A, sys.C, C0);
    worst_comm = std::max(worst_comm, (tr.T * sys.A - sys.A * tr.T).norm() /
                                          (sys.A.norm() * tr.T.norm()));
    const Matrix B0 = tr.T * sys.B;
    double diff = 0.0, scale = 1.0;
    for (int k = 0; k < 2 * n; ++k) {
      const Matrix Ak = oracle::power(sys.A, k);
      const Matrix h = sys.C * Ak * sys.B;
      diff = std::max(diff, (h - C0 * Ak * B0).norm());
      scale = std::max(scale, h.norm());
    }
    worst_markov = std::max(worst_markov, diff / scale);
  }
  return {worst_comm < 1e-10 && worst_markov < 1e-9,
          "|TA-AT| " + sci(worst_comm) + " (< 1e-10), Markov mismatch " + sci(worst_markov) +
              " (< 1e-9)"};
}

Outcome commutant_reconstruction() {
  double worst = 0.0;
  int rejected = 0;
  for (int i = 0; i < 100; ++i) {
    Rng rng = make_rng({5, static_cast<std::uint64_t>(i)});
    const int n = uniform_int(rng, 1, 6);
    const Matrix A = randn(rng, n, n) / std::sqrt(static_cast<double>(n));
    const Vector v = randn(rng, n, 1);
    const Vector c = randn(rng, n, 1);
    Matrix B = Matrix::Zero(n, n);
    for (int k = 0; k < n; ++k) B += c[k] * oracle::power(A, k);
    const auto cc = commutant_coefficients(A, B, v);
    Matrix rebuilt = Matrix::Zero(n, n);
    for (int k = 0; k < n; ++k) rebuilt += cc.b[k] * oracle::power(A, k);
    worst = std::max(worst, (rebuilt - B).norm() / B.norm());
  }
  for (int i = 0; i < 100; ++i) {
    Rng rng = make_rng({55, static_cast<std::uint64_t>(i)});
    const int n = uniform_int(rng, 2, 6);
    const Matrix A = randn(rng, n, n) / std::sqrt(static_cast<double>(n));
    try {
      commutant_coefficients(A, randn(rng, n, n), randn(rng, n, 1));
    } catch (const CommutatorError&) {
      ++rejected;
    }
  }
  return {worst < 1e-8 && rejected == 100,
          "reconstruction error " + sci(worst) + " (< 1e-8); rejected " +
              std::to_string(rejected) + "/100 non-commuting"};
}

Outcome eigen_regression_equivalence() {
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    Rng rng = make_rng({6, static_cast<std::uint64_t>(i)});
    const int n = uniform_int(rng, 1, 5), nu = uniform_int(rng, 1, 3);
    const auto sys = random_stable_discrete(n, nu, 1, rng());
    const auto data = noisy_record(rng, sys, 300);
    const double eig = eigen_regression(sys.A, data).cost;
    const double reg = estimate_bd_time(sys.A, observable_row(rng, sys.A), data).cost;
    worst = std::max(worst, std::abs(eig - reg) / (1.0 + reg));
  }
  return {worst < 1e-8, "worst relative gap " + sci(worst) + " (< 1e-8)"};
}

template <class Data>
double jacobian_error(const StateSpaceModel& m, const Data& data, const FixedMatrices& fixed) {
  const Matrix J = residual_jacobian(m, data, fixed);
  const Matrix Jfd = oracle::central_difference_jacobian(
      [&](const Vector& t) { return residual_vector(unpack_parameters(m, t, fixed), data); },
      pack_parameters(m, fixed), 1e-6);
  return (J - Jfd).cwiseAbs().maxCoeff() / std::max(1.0, Jfd.cwiseAbs().maxCoeff());
}

Outcome gradient_checks() {
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    Rng rng = make_rng({7, static_cast<std::uint64_t>(i)});
    const int n = uniform_int(rng, 1, 4), nu = uniform_int(rng, 1, 3), ny = uniform_int(rng, 1, 3);
    const auto sys = random_system(rng, n, nu, ny, i % 2 == 1);
    const auto fd = noisy_frf(rng, sys, 12);
    worst = std::max(worst, jacobian_error(sys, fd, FixedMatrices::only_a()));
    worst = std::max(worst, jacobian_error(sys, fd, FixedMatrices{}));
    if (sys.domain.is_discrete()) {
      const auto data = noisy_record(rng, sys, 40);
      worst = std::max(worst, jacobian_error(sys, data, FixedMatrices::only_a()));
      worst = std::max(worst, jacobian_error(sys, data, FixedMatrices{}));
    }
  }
  return {worst < 1e-5, "max relative Jacobian error " + sci(worst) + " (< 1e-5)"};
}

Outcome monte_carlo(const BenchConfig& cfg, double budget_s) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto recs = run_bench(cfg);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto s = summarize(recs);
  const bool ordering = s.median_mp < s.median_mpBC && s.median_mpBC < s.median_mn;
  const bool time_domain = cfg.domain == BenchDomain::TimeDiscrete;
  const double win = time_domain ? s.mp_vs_mn : s.mpBC_vs_mn;
  std::ostringstream d;
  d << "medians mn " << sci(s.median_mn) << ", mpBC " << sci(s.median_mpBC) << ", mp "
    << sci(s.median_mp) << "; " << (time_domain ? "mp<mn" : "mpBC<mn") << " in " << win
    << "% of " << s.successes << " (failures " << s.failures << "); " << secs << " s";
  return {ordering && win >= 70.0 && secs < budget_s, d.str()};
}

Outcome simo_similarity() {
  double worst = 0.0;
  bool all = true;
  for (int i = 0; i < 50; ++i) {
    Rng rng = make_rng({10, static_cast<std::uint64_t>(i)});
    const int n = uniform_int(rng, 1, 5), ny = uniform_int(rng, 2, 3);
    const auto sys = random_system(rng, n, 1, ny, i % 2 == 1);
    Vector scale(n);
    for (int k = 0; k < n; ++k) scale[k] = std::exp(std::uniform_real_distribution<double>(-1, 1)(rng));
    const Matrix T = random_orthogonal(rng, n) * scale.asDiagonal() * random_orthogonal(rng, n);
    const Matrix Ti = T.inverse();
    const auto fd = noisy_frf(rng, sys, 64);
    const auto a = estimate_cd_freq(sys.A, sys.B, fd).estimate;
    const auto b = estimate_cd_freq(Ti * sys.A * T, Ti * sys.B, fd).estimate;
    all = all && io_equivalent(a, b, 0, 1e-7);
    if (sys.domain.is_discrete()) {
      const auto data = noisy_record(rng, sys, 300);
      const auto c = estimate_cd_time(sys.A, sys.B, data).estimate;
      const auto d = estimate_cd_time(Ti * sys.A * T, Ti * sys.B, data).estimate;
      all = all && io_equivalent(c, d, 0, 1e-7);
    }
    const auto ma = markov_parameters(StateSpaceModel(a.A, a.B, a.C, a.D, Domain::discrete(1)), 2 * n);
    const auto mb = markov_parameters(StateSpaceModel(b.A, b.B, b.C, b.D, Domain::discrete(1)), 2 * n);
    for (int k = 0; k < 2 * n; ++k) worst = std::max(worst, (ma.H[k] - mb.H[k]).norm());
  }
  return {all, "all 50 io_equivalent at tol 1e-7; worst Markov gap " + sci(worst)};
}

Outcome frequency_mirror() {
  const auto a = fixed_a_optimality(true, 50, 111);
  const auto b = miso_flatness(true, 50, 112);
  const auto c = simo_two_step(true, 50, 113);
  return {a.pass && b.pass && c.pass,
          "fixed-A: " + a.detail + "; flatness: " + b.detail + "; two-step: " + c.detail};
}

Outcome reproducibility() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "ssid_acceptance_repro";
  fs::create_directories(dir);
  auto run = [&](const std::string& name) {
    const std::string path = (dir / name).string();
    std::ostringstream out, err;
    const int code = cli_main({"bench", "td", "--trials", "12", "--order", "4", "--nu", "2", "--ny",
                               "2", "--n-samples", "500", "--seed", "42", "--threads", "3",
                               "--out", path},
                              out, err);
    std::ifstream f(path, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return std::make_pair(code, ss.str());
  };
  const auto first = run("a.csv");
  const auto second = run("b.csv");
  fs::remove_all(dir);
  const bool same = first.first == 0 && second.first == 0 && first.second == second.second &&
                    !first.second.empty();
  return {same, same ? "two runs produced identical " + std::to_string(first.second.size()) + "-byte CSVs"
                     : "CSV outputs differ or a run failed"};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
    double budget_s;
  };
  BenchConfig td;
  td.trials = 50;
  td.order = 7;
  td.nu = td.ny = 4;
  td.n_samples = 1000;
  td.seed = 42;
  BenchConfig fd = BenchConfig::frequency_defaults();
  fd.trials = 50;
  fd.order = 7;
  fd.nu = fd.ny = 4;
  fd.n_freq = 410;
  fd.noise = 0.2;
  fd.seed = 7;

  const std::vector<Criterion> criteria = {
      {1, "fixed-A optimality", [] { return fixed_a_optimality(false, 100, 1); }, 60},
      {2, "SISO/MISO flatness", [] { return miso_flatness(false, 100, 2); }, 0},
      {3, "SIMO two-step", [] { return simo_two_step(false, 100, 3); }, 0},
      {4, "commuting transform construction", commuting_transform, 0},
      {5, "commutant reconstruction", commutant_reconstruction, 0},
      {6, "eigen-regression equivalence", eigen_regression_equivalence, 0},
      {7, "Jacobian gradient checks", gradient_checks, 0},
      {8, "time-domain Monte Carlo", [&] { return monte_carlo(td, 300); }, 300},
      {9, "frequency-domain Monte Carlo", [&] { return monte_carlo(fd, 600); }, 600},
      {10, "SIMO similarity invariance", simo_similarity, 0},
      {11, "frequency-domain mirror of 1-3", frequency_mirror, 0},
      {12, "bench reproducibility", reproducibility, 0},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.budget_s > 0 && secs >= c.budget_s) {
      o.pass = false;
      o.detail += "; over the " + std::to_string(static_cast<int>(c.budget_s)) + " s budget";
    }
    std::printf("[%s] %2d %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
