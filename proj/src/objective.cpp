#include "objective.hpp"

#include "sensitivity.hpp"
#include "ssid/errors.hpp"

namespace ssid {

namespace detail {

ParameterLayout parameter_layout(const StateSpaceModel& model,
                                 const FixedMatrices& fixed) {
  ParameterLayout l;
  const Eigen::Index n = model.n(), nu = model.nu(), ny = model.ny();
  if (!fixed.A) { l.a = l.size; l.size += n * n; }
  if (!fixed.B) { l.b = l.size; l.size += n * nu; }
  if (!fixed.C) { l.c = l.size; l.size += ny * n; }
  if (!fixed.D) { l.d = l.size; l.size += ny * nu; }
  return l;
}

double TimeObjective::cost(const StateSpaceModel& model) const {
  return prediction_cost(model, data_);
}

Vector TimeObjective::residuals(const StateSpaceModel& model) const {
  return residual_vector(model, data_);
}

Matrix TimeObjective::jacobian(const StateSpaceModel& model,
                               const FixedMatrices& fixed) const {
  return residual_jacobian(model, data_, fixed);
}

RegressionResult TimeObjective::estimate_bd(const StateSpaceModel& model,
                                            const RegressionOptions& opts) const {
  return estimate_bd_time(model.A, model.C, data_, opts);
}

RegressionResult TimeObjective::estimate_cd(const StateSpaceModel& model,
                                            const RegressionOptions& opts) const {
  return estimate_cd_time(model.A, model.B, data_, opts);
}

double FrequencyObjective::cost(const StateSpaceModel& model) const {
  return frequency_cost(model, fd_);
}

Vector FrequencyObjective::residuals(const StateSpaceModel& model) const {
  return residual_vector(model, fd_);
}

Matrix FrequencyObjective::jacobian(const StateSpaceModel& model,
                                    const FixedMatrices& fixed) const {
  return residual_jacobian(model, fd_, fixed);
}

RegressionResult FrequencyObjective::estimate_bd(
    const StateSpaceModel& model, const RegressionOptions& opts) const {
  return estimate_bd_freq(model.A, model.C, fd_, opts);
}

RegressionResult FrequencyObjective::estimate_cd(
    const StateSpaceModel& model, const RegressionOptions& opts) const {
  return estimate_cd_freq(model.A, model.B, fd_, opts);
}

}  // namespace detail

Vector pack_parameters(const StateSpaceModel& model, const FixedMatrices& fixed) {
  const auto l = detail::parameter_layout(model, fixed);
  Vector theta(l.size);
  auto put = [&](Eigen::Index off, const Matrix& m) {
    if (off >= 0) theta.segment(off, m.size()) = m.reshaped();
  };
  put(l.a, model.A);
  put(l.b, model.B);
  put(l.c, model.C);
  put(l.d, model.D);
  return theta;
}

StateSpaceModel unpack_parameters(const StateSpaceModel& base,
                                  const Vector& theta,
                                  const FixedMatrices& fixed) {
  const auto l = detail::parameter_layout(base, fixed);
  if (theta.size() != l.size) {
    throw DimensionError("parameter vector has the wrong length");
  }
  StateSpaceModel m = base;
  auto take = [&](Eigen::Index off, Matrix& dst) {
    if (off >= 0) {
      dst = theta.segment(off, dst.size()).reshaped(dst.rows(), dst.cols());
    }
  };
  take(l.a, m.A);
  take(l.b, m.B);
  take(l.c, m.C);
  take(l.d, m.D);
  return m;
}

Vector residual_vector(const StateSpaceModel& model, const TimeSeriesData& data) {
  if (data.nu() != model.nu() || data.ny() != model.ny()) {
    throw DimensionError("data dimensions do not match model");
  }
  const Matrix E = (simulate(model, data.u) - data.y).transpose();
  return E.reshaped();
}

Vector residual_vector(const StateSpaceModel& model, const FrequencyData& fd) {
  if (fd.ny() != model.ny() || fd.nu() != model.nu() ||
      !(fd.domain == model.domain)) {
    throw DimensionError("frequency data does not match model");
  }
  const auto G = frequency_response(model, fd.omega);
  const Eigen::Index m = model.ny() * model.nu();
  Vector r(2 * fd.K() * m);
  for (Eigen::Index k = 0; k < fd.K(); ++k) {
    const ComplexMatrix E = G[k] - fd.G[k];
    for (Eigen::Index e = 0; e < m; ++e) {
      r(2 * (k * m + e)) = E.reshaped()(e).real();
      r(2 * (k * m + e) + 1) = E.reshaped()(e).imag();
    }
  }
  return r;
}

Matrix residual_jacobian(const StateSpaceModel& model,
                         const TimeSeriesData& data, const FixedMatrices& fixed) {
  if (data.nu() != model.nu() || data.ny() != model.ny()) {
    throw DimensionError("data dimensions do not match model");
  }
  const auto l = detail::parameter_layout(model, fixed);
  const Eigen::Index n = model.n(), ny = model.ny(), nu = model.nu(),
                     N = data.N();
  Matrix J = Matrix::Zero(N * ny, l.size);
  if (l.a >= 0 || l.c >= 0) {
    const Matrix X = simulate_states(model.A, model.B, data.u);
    if (l.a >= 0) detail::fill_sensitivity_columns(model.A, model.C, X, J, l.a);
    if (l.c >= 0) {
      for (Eigen::Index t = 0; t < N; ++t) {
        for (Eigen::Index i = 0; i < n; ++i) {
          for (Eigen::Index r = 0; r < ny; ++r) {
            J(t * ny + r, l.c + i * ny + r) = X(t, i);
          }
        }
      }
    }
  }
  if (l.b >= 0) detail::fill_sensitivity_columns(model.A, model.C, data.u, J, l.b);
  if (l.d >= 0) {
    for (Eigen::Index t = 0; t < N; ++t) {
      for (Eigen::Index j = 0; j < nu; ++j) {
        for (Eigen::Index r = 0; r < ny; ++r) {
          J(t * ny + r, l.d + j * ny + r) = data.u(t, j);
        }
      }
    }
  }
  return J;
}

Matrix residual_jacobian(const StateSpaceModel& model, const FrequencyData& fd,
                         const FixedMatrices& fixed) {
  if (fd.ny() != model.ny() || fd.nu() != model.nu() ||
      !(fd.domain == model.domain)) {
    throw DimensionError("frequency data does not match model");
  }
  const auto l = detail::parameter_layout(model, fixed);
  const Eigen::Index n = model.n(), ny = model.ny(), nu = model.nu(),
                     K = fd.K(), m = ny * nu;
  Matrix J = Matrix::Zero(2 * K * m, l.size);
  const auto terms = detail::resolvent_terms(model, fd.omega);

  auto set = [&](Eigen::Index k, Eigen::Index r, Eigen::Index col_of_g,
                 Eigen::Index param, std::complex<double> v) {
    const Eigen::Index row = 2 * (k * m + col_of_g * ny + r);
    J(row, param) = v.real();
    J(row + 1, param) = v.imag();
  };

  for (Eigen::Index k = 0; k < K; ++k) {
    const auto& CR = terms[k].CR;
    const auto& RB = terms[k].RB;
    if (l.a >= 0) {
      // dG/dA_ij = (C R) e_i e_j^T (R B)
      for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
          for (Eigen::Index q = 0; q < nu; ++q) {
            for (Eigen::Index r = 0; r < ny; ++r) {
              set(k, r, q, l.a + j * n + i, CR(r, i) * RB(j, q));
            }
          }
        }
      }
    }
    if (l.b >= 0) {
      for (Eigen::Index j = 0; j < nu; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
          for (Eigen::Index r = 0; r < ny; ++r) {
            set(k, r, j, l.b + j * n + i, CR(r, i));
          }
        }
      }
    }
    if (l.c >= 0) {
      for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index r = 0; r < ny; ++r) {
          for (Eigen::Index q = 0; q < nu; ++q) {
            set(k, r, q, l.c + i * ny + r, RB(i, q));
          }
        }
      }
    }
    if (l.d >= 0) {
      for (Eigen::Index j = 0; j < nu; ++j) {
        for (Eigen::Index r = 0; r < ny; ++r) {
          set(k, r, j, l.d + j * ny + r, 1.0);
        }
      }
    }
  }
  return J;
}

}  // namespace ssid
