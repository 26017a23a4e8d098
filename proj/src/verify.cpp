#include "ssid/verify.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "ssid/errors.hpp"
#include "ssid/random.hpp"
#include "ssid/refine.hpp"
#include "ssid/regress.hpp"
#include "ssid/theory.hpp"

namespace ssid {

namespace {

int uniform_int(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

Matrix observable_row(Rng& rng, const Matrix& A) {
  for (int i = 0; i < 100; ++i) {
    Matrix c = randn(rng, 1, A.rows());
    if (observable(A, c, 1e-8)) return c;
  }
  throw NumericalError("no observable row found");
}

TimeSeriesData noisy_record(Rng& rng, const StateSpaceModel& sys, int N) {
  const Matrix u = randn(rng, N, sys.nu());
  return {u, simulate(sys, u) + 0.1 * randn(rng, N, sys.ny()), 1.0};
}

FrequencyData noisy_frf(Rng& rng, const StateSpaceModel& sys, int K) {
  const Vector omega = Vector::LinSpaced(K, 0.0, std::numbers::pi);
  auto G = frequency_response(sys, omega);
  for (auto& g : G) {
    ComplexMatrix e(g.rows(), g.cols());
    e.real() = randn(rng, g.rows(), g.cols());
    e.imag() = randn(rng, g.rows(), g.cols());
    g += 0.1 * e;
  }
  return {omega, G, sys.domain};
}

// Largest difference of the first L Markov parameters relative to their size.
double markov_gap(const StateSpaceModel& a, const StateSpaceModel& b, int L) {
  const auto ma = markov_parameters(a, L);
  const auto mb = markov_parameters(b, L);
  double diff = (ma.D0 - mb.D0).norm();
  double scale = std::max(1.0, ma.D0.norm());
  for (std::size_t i = 0; i < ma.H.size(); ++i) {
    diff = std::max(diff, (ma.H[i] - mb.H[i]).norm());
    scale = std::max(scale, ma.H[i].norm());
  }
  return diff / scale;
}

Matrix polynomial(const Matrix& A, const Vector& c) {
  Matrix sum = Matrix::Zero(A.rows(), A.cols());
  Matrix power = Matrix::Identity(A.rows(), A.cols());
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    sum += c[i] * power;
    power = power * A;
  }
  return sum;
}

// A residual and the tolerance it must stay below.
struct Check {
  double residual;
  double tolerance;
};

// A throw counts as a failure.
using Trial = std::function<std::vector<Check>(Rng&)>;

struct Property {
  const char* name;
  Trial trial;
};

std::vector<Check> commuting_transform_trial(Rng& rng) {
  const int n = uniform_int(rng, 1, 5), nu = uniform_int(rng, 1, 3);
  const auto sys = random_stable_discrete(n, nu, 1, rng());
  const Matrix C0 = observable_row(rng, sys.A);
  const auto tr = construct_T(sys.A, sys.C, C0);
  const double comm = (tr.T * sys.A - sys.A * tr.T).norm() /
                      std::max(1.0, tr.T.norm() * sys.A.norm());
  const StateSpaceModel alt(sys.A, tr.T * sys.B, C0, sys.D, sys.domain);
  return {{comm, 1e-10}, {markov_gap(sys, alt, 2 * n), 1e-9}};
}

std::vector<Check> fixed_a_trial(Rng& rng) {
  const int n = uniform_int(rng, 1, 5), nu = uniform_int(rng, 1, 3);
  const auto sys = random_stable_discrete(n, nu, 1, rng());
  const auto data = noisy_record(rng, sys, 300);
  const Matrix C0 = observable_row(rng, sys.A);
  const double reg = estimate_bd_time(sys.A, C0, data).cost;
  const StateSpaceModel start(sys.A, randn(rng, n, nu), randn(rng, 1, n),
                              randn(rng, 1, nu), sys.domain);
  RefineOptions o;
  o.max_sweeps = 5000;
  o.rel_tol = 1e-15;
  const double gn = gauss_newton_bcd(start, data, o).report.cost_trajectory.back();
  return {{std::abs(gn - reg) / (1.0 + reg), 1e-7}};
}

std::vector<Check> simo_two_step_trial(Rng& rng) {
  const int n = uniform_int(rng, 1, 5), ny = uniform_int(rng, 2, 3);
  const auto sys = random_stable_discrete(n, 1, ny, rng());
  const auto data = noisy_record(rng, sys, 300);
  const StateSpaceModel start(sys.A, randn(rng, n, 1), randn(rng, ny, n),
                              randn(rng, ny, 1), sys.domain);
  RefineOptions o;
  o.max_sweeps = 3;
  o.rel_tol = 0.0;
  const auto rep = bcd_iterate(start, data, o).report;
  const auto& s = rep.sweep_costs;
  if (s.size() < 3) return {{0.0, 1e-10}};
  return {{std::abs(s[1] - s[2]) / std::max(s[1], std::numeric_limits<double>::min()),
           1e-10}};
}

std::vector<Check> commutant_trial(Rng& rng) {
  const int n = uniform_int(rng, 2, 6);
  const Matrix A = randn(rng, n, n) / std::sqrt(static_cast<double>(n));
  const Vector v = randn(rng, n, 1);
  const Vector coeffs = randn(rng, n, 1);
  const Matrix B = polynomial(A, coeffs);
  const auto cc = commutant_coefficients(A, B, v);
  // A generic B must be rejected.
  const Matrix R = randn(rng, n, n);
  try {
    commutant_coefficients(A, R, v);
  } catch (const CommutatorError&) {
    return {{cc.residual, 1e-8}};
  }
  throw NumericalError("non-commuting matrix was accepted");
}

std::vector<Check> eigen_regression_trial(Rng& rng) {
  const int n = uniform_int(rng, 1, 5), nu = uniform_int(rng, 1, 3);
  const auto sys = random_stable_discrete(n, nu, 1, rng());
  const auto data = noisy_record(rng, sys, 300);
  const auto prob = eigen_regression(sys.A, data);
  const auto reg = estimate_bd_time(sys.A, sys.C, data);
  const Matrix B = extract_B(prob, sys.C);
  const StateSpaceModel back(sys.A, B, sys.C, prob.D, sys.domain);
  const double via_b = prediction_cost(back, data);
  return {{std::abs(prob.cost - reg.cost) / (1.0 + reg.cost), 1e-8},
          {std::abs(via_b - reg.cost) / (1.0 + reg.cost), 1e-8}};
}

std::vector<Check> simo_similarity_trial(Rng& rng) {
  const int n = uniform_int(rng, 1, 5), ny = uniform_int(rng, 2, 3);
  const auto sys = random_stable_discrete(n, 1, ny, rng());
  // Well-conditioned transform: rotation times a modest diagonal scaling.
  Vector scale(n);
  for (int i = 0; i < n; ++i) scale[i] = std::exp(std::uniform_real_distribution<double>(-1.0, 1.0)(rng));
  const Matrix T = random_orthogonal(rng, n) * scale.asDiagonal();
  const Matrix Tinv = T.inverse();
  const Matrix A2 = Tinv * sys.A * T, B2 = Tinv * sys.B;

  const auto fd = noisy_frf(rng, sys, 64);
  const auto f1 = estimate_cd_freq(sys.A, sys.B, fd).estimate;
  const auto f2 = estimate_cd_freq(A2, B2, fd).estimate;
  const auto data = noisy_record(rng, sys, 300);
  const auto t1 = estimate_cd_time(sys.A, sys.B, data).estimate;
  const auto t2 = estimate_cd_time(A2, B2, data).estimate;
  return {{markov_gap(f1, f2, 2 * n), 1e-7}, {markov_gap(t1, t2, 2 * n), 1e-7}};
}

const std::vector<Property>& registry() {
  static const std::vector<Property> props = {
      {"lemma1", commuting_transform_trial},
      {"thm-fixed-a", fixed_a_trial},
      {"simo-two-step", simo_two_step_trial},
      {"commutant", commutant_trial},
      {"eigen-regression", eigen_regression_trial},
      {"simo-similarity", simo_similarity_trial},
  };
  return props;
}

}  // namespace

const std::vector<std::string>& property_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& p : registry()) out.emplace_back(p.name);
    return out;
  }();
  return names;
}

PropertyReport verify_property(const std::string& name, int trials,
                               std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  const auto& props = registry();
  const auto it = std::find_if(props.begin(), props.end(),
                               [&](const Property& p) { return name == p.name; });
  if (it == props.end()) throw std::invalid_argument("unknown property '" + name + "'");

  PropertyReport rep;
  rep.property = name;
  rep.trials = trials;
  for (int t = 0; t < trials; ++t) {
    Rng rng = make_rng({seed, static_cast<std::uint64_t>(t)});
    try {
      bool ok = true;
      for (const auto& c : it->trial(rng)) {
        const double ratio = c.residual / c.tolerance;
        if (!(ratio < 1.0)) ok = false;
        if (ratio > rep.worst_ratio || std::isnan(ratio)) {
          rep.worst_ratio = ratio;
          rep.worst_residual = c.residual;
          rep.tolerance = c.tolerance;
        }
      }
      if (!ok) ++rep.failures;
    } catch (const std::exception& e) {
      ++rep.failures;
      if (rep.note.empty()) rep.note = "trial " + std::to_string(t) + ": " + e.what();
    }
  }
  rep.pass = rep.failures == 0;
  return rep;
}

nlohmann::json property_report_to_json(const PropertyReport& r) {
  nlohmann::json j;
  j["property"] = r.property;
  j["pass"] = r.pass;
  j["trials"] = r.trials;
  j["failures"] = r.failures;
  j["worst_residual"] = r.worst_residual;
  j["tolerance"] = r.tolerance;
  j["worst_ratio"] = r.worst_ratio;
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

}  // namespace ssid
