#include "ssid/refine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include "objective.hpp"
#include "ssid/errors.hpp"

namespace ssid {

void RefineOptions::validate() const {
  if (max_sweeps < 1) throw std::invalid_argument("max_sweeps must be >= 1");
  if (!(rel_tol >= 0.0)) throw std::invalid_argument("rel_tol must be >= 0");
  if (!(damping_init >= 0.0)) {
    throw std::invalid_argument("damping_init must be >= 0");
  }
}

std::string to_string(Method m) {
  switch (m) {
    case Method::BCD: return "BCD";
    case Method::GN_BCD: return "GN_BCD";
    case Method::GN_FULL: return "GN_FULL";
  }
  return "?";
}

Method method_from_string(const std::string& s) {
  if (s == "bcd" || s == "BCD") return Method::BCD;
  if (s == "gn-bcd" || s == "GN_BCD") return Method::GN_BCD;
  if (s == "gn-full" || s == "GN_FULL") return Method::GN_FULL;
  throw std::invalid_argument("unknown method '" + s + "'");
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

bool small_decrease(double before, double after, double rel_tol) {
  return before - after <= rel_tol * before;
}

RefineResult run_bcd(const StateSpaceModel& model, const detail::Objective& obj,
                     const RefineOptions& opts) {
  opts.validate();
  const auto start = Clock::now();
  RefineResult out{model, {}};
  auto& rep = out.report;
  rep.method = Method::BCD;
  double cost = obj.cost(model);
  rep.cost_trajectory.push_back(cost);
  rep.sweep_costs.push_back(cost);

  RegressionOptions ropts;
  if (opts.fixed.D) ropts.fixed_d = model.D;

  auto half_step = [&](bool bd) {
    const auto res = bd ? obj.estimate_bd(out.model, ropts)
                        : obj.estimate_cd(out.model, ropts);
    if (res.rank_deficient) ++rep.rank_deficient_steps;
    if (res.cost <= cost) {
      out.model = res.estimate;
      cost = res.cost;
    }
    rep.cost_trajectory.push_back(cost);
  };

  for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    const double before = cost;
    if (!opts.fixed.B) half_step(true);
    if (!opts.fixed.C) half_step(false);
    ++rep.sweeps;
    rep.sweep_costs.push_back(cost);
    if (small_decrease(before, cost, opts.rel_tol)) {
      rep.converged = true;
      break;
    }
  }
  rep.wall_time_s = seconds_since(start);
  return out;
}

// Levenberg-Marquardt on the packed parameters. Damping multiplies the mean
// diagonal of J^T J so it is insensitive to the overall data scale.
RefineResult run_gauss_newton(const StateSpaceModel& model,
                              const detail::Objective& obj,
                              const RefineOptions& opts, Method method) {
  opts.validate();
  const auto start = Clock::now();
  FixedMatrices fixed = opts.fixed;
  if (method == Method::GN_BCD) fixed.A = true;

  RefineResult out{model, {}};
  auto& rep = out.report;
  rep.method = method;
  double cost = obj.cost(model);
  rep.cost_trajectory.push_back(cost);
  rep.sweep_costs.push_back(cost);

  Vector theta = pack_parameters(model, fixed);
  if (theta.size() == 0) {
    rep.converged = true;
    rep.wall_time_s = seconds_since(start);
    return out;
  }
  const bool guard = opts.enforce_stability;
  double lambda = opts.damping_init;
  constexpr double kMaxDamping = 1e12;

  for (int it = 0; it < opts.max_sweeps; ++it) {
    const Vector r = obj.residuals(out.model);
    const Matrix J = obj.jacobian(out.model, fixed);
    if (!J.allFinite() || !r.allFinite()) {
      throw NumericalError("non-finite Jacobian or residual in Gauss-Newton");
    }
    const Vector g = J.transpose() * r;
    Matrix H(J.cols(), J.cols());
    H.setZero();
    H.selfadjointView<Eigen::Lower>().rankUpdate(J.transpose());
    H.triangularView<Eigen::StrictlyUpper>() = H.transpose();
    const double mu = std::max(H.diagonal().mean(), 1e-300);
    const bool was_stable = is_stable(out.model.A, out.model.domain);

    bool accepted = false, stalled = false;
    double new_cost = cost;
    StateSpaceModel candidate;
    while (!accepted) {
      Vector delta;
      if (lambda == 0.0) {
        Eigen::CompleteOrthogonalDecomposition<Matrix> cod(J);
        delta = -cod.solve(r);
      } else {
        Matrix M = H;
        M.diagonal().array() += lambda * mu;
        delta = -M.ldlt().solve(g);
      }
      // Decrease of |r + J delta|^2 predicted by the local linear model.
      const double predicted = -2.0 * g.dot(delta) - (J * delta).squaredNorm();
      bool ok = delta.allFinite();
      if (ok) {
        candidate = unpack_parameters(out.model, theta + delta, fixed);
        if (guard && !fixed.A && was_stable &&
            !is_stable(candidate.A, candidate.domain)) {
          ok = false;
        }
      }
      if (ok) {
        try {
          new_cost = obj.cost(candidate);
          ok = std::isfinite(new_cost);
        } catch (const SingularResolventError&) {
          ok = false;
        }
      }
      if (ok && new_cost < cost) {
        accepted = true;
        theta += delta;
        lambda /= 3.0;
        break;
      }
      if (ok && predicted <= 1e-14 * cost) {
        // Already at the numerical floor of this cost.
        stalled = true;
        break;
      }
      lambda = lambda == 0.0 ? std::max(opts.damping_init, 1e-3) : 10.0 * lambda;
      if (lambda > kMaxDamping) break;
    }
    if (stalled) {
      rep.converged = true;
      break;
    }
    if (!accepted) {
      rep.converged = false;
      break;
    }
    const double before = cost;
    out.model = std::move(candidate);
    cost = new_cost;
    ++rep.sweeps;
    rep.cost_trajectory.push_back(cost);
    rep.sweep_costs.push_back(cost);
    if (small_decrease(before, cost, opts.rel_tol)) {
      rep.converged = true;
      break;
    }
  }
  rep.wall_time_s = seconds_since(start);
  return out;
}

OptimizerComparison compare(const StateSpaceModel& model0,
                            const detail::Objective& obj,
                            const RefineOptions& opts) {
  OptimizerComparison cmp;
  cmp.initial_cost = obj.cost(model0);
  cmp.bcd = run_bcd(model0, obj, opts);
  cmp.gn_bcd = run_gauss_newton(model0, obj, opts, Method::GN_BCD);
  cmp.gn_full = run_gauss_newton(model0, obj, opts, Method::GN_FULL);
  return cmp;
}

}  // namespace

RefineResult bcd_iterate(const StateSpaceModel& model, const TimeSeriesData& data,
                         const RefineOptions& opts) {
  return run_bcd(model, detail::TimeObjective(data), opts);
}

RefineResult bcd_iterate(const StateSpaceModel& model, const FrequencyData& fd,
                         const RefineOptions& opts) {
  return run_bcd(model, detail::FrequencyObjective(fd), opts);
}

RefineResult gauss_newton_bcd(const StateSpaceModel& model,
                              const TimeSeriesData& data,
                              const RefineOptions& opts) {
  return run_gauss_newton(model, detail::TimeObjective(data), opts,
                          Method::GN_BCD);
}

RefineResult gauss_newton_bcd(const StateSpaceModel& model,
                              const FrequencyData& fd,
                              const RefineOptions& opts) {
  return run_gauss_newton(model, detail::FrequencyObjective(fd), opts,
                          Method::GN_BCD);
}

RefineResult gauss_newton_full(const StateSpaceModel& model,
                               const TimeSeriesData& data,
                               const RefineOptions& opts) {
  return run_gauss_newton(model, detail::TimeObjective(data), opts,
                          Method::GN_FULL);
}

RefineResult gauss_newton_full(const StateSpaceModel& model,
                               const FrequencyData& fd,
                               const RefineOptions& opts) {
  return run_gauss_newton(model, detail::FrequencyObjective(fd), opts,
                          Method::GN_FULL);
}

OptimizerComparison compare_optimizers(const StateSpaceModel& model0,
                                       const TimeSeriesData& data,
                                       const RefineOptions& opts) {
  return compare(model0, detail::TimeObjective(data), opts);
}

OptimizerComparison compare_optimizers(const StateSpaceModel& model0,
                                       const FrequencyData& fd,
                                       const RefineOptions& opts) {
  return compare(model0, detail::FrequencyObjective(fd), opts);
}

std::vector<std::vector<double>> OptimizerComparison::normalized(int steps) const {
  const double scale = initial_cost > 0.0 ? initial_cost : 1.0;
  auto at = [&](const RefinementReport& rep, int s) {
    const auto& c = rep.sweep_costs;
    return c[std::min<std::size_t>(static_cast<std::size_t>(s), c.size() - 1)] / scale;
  };
  std::vector<std::vector<double>> rows;
  for (int s = 0; s <= steps; ++s) {
    rows.push_back({at(bcd.report, s), at(gn_bcd.report, s), at(gn_full.report, s)});
  }
  return rows;
}

}  // namespace ssid
