#pragma once

#include <complex>
#include <vector>

#include <Eigen/Core>

namespace ssid {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;

/// Time domain of a model: discrete with a sample time, or continuous.
class Domain {
 public:
  static Domain discrete(double ts);
  static Domain continuous() { return Domain(0.0); }

  bool is_discrete() const { return ts_ > 0.0; }
  bool is_continuous() const { return ts_ == 0.0; }
  /// Sample time in seconds; 0 for continuous models.
  double ts() const { return ts_; }

  bool operator==(const Domain&) const = default;

 private:
  explicit Domain(double ts) : ts_(ts) {}
  double ts_;
};

/// Linear state-space model x' = A x + B u, y = C x + D u.
struct StateSpaceModel {
  Matrix A;
  Matrix B;
  Matrix C;
  Matrix D;
  Domain domain = Domain::discrete(1.0);

  StateSpaceModel() = default;
  /// Checks dimension consistency; throws DimensionError.
  StateSpaceModel(Matrix a, Matrix b, Matrix c, Matrix d, Domain dom);

  int n() const { return static_cast<int>(A.rows()); }
  int nu() const { return static_cast<int>(B.cols()); }
  int ny() const { return static_cast<int>(C.rows()); }

  void validate() const;
};

/// Sampled input/output record. Rows are time samples.
struct TimeSeriesData {
  Matrix u;  // N x nu
  Matrix y;  // N x ny
  double ts = 1.0;

  TimeSeriesData() = default;
  TimeSeriesData(Matrix u_, Matrix y_, double ts_);

  int N() const { return static_cast<int>(u.rows()); }
  int nu() const { return static_cast<int>(u.cols()); }
  int ny() const { return static_cast<int>(y.cols()); }
};

/// Frequency response samples G_k at strictly increasing omega_k (rad/s).
struct FrequencyData {
  Vector omega;
  std::vector<ComplexMatrix> G;
  Domain domain = Domain::discrete(1.0);

  FrequencyData() = default;
  FrequencyData(Vector w, std::vector<ComplexMatrix> g, Domain dom);

  int K() const { return static_cast<int>(omega.size()); }
  int ny() const { return G.empty() ? 0 : static_cast<int>(G.front().rows()); }
  int nu() const { return G.empty() ? 0 : static_cast<int>(G.front().cols()); }
};

/// Feedthrough D0 and impulse-response matrices H_i = C A^i B.
struct MarkovSequence {
  Matrix D0;
  std::vector<Matrix> H;
};

/// Response to u (N x nu) with x(1) = x0. Discrete models only.
Matrix simulate(const StateSpaceModel& model, const Matrix& u,
                const Vector& x0);
Matrix simulate(const StateSpaceModel& model, const Matrix& u);

/// State trajectory X (N x n), row t holding x(t) with x(1) = 0.
Matrix simulate_states(const Matrix& A, const Matrix& B, const Matrix& u);

/// Sum over t of |y(t) - yhat(t)|^2 with zero initial state.
double prediction_cost(const StateSpaceModel& model, const TimeSeriesData& data);

/// Evaluation point exp(j Ts w) for discrete models, j w for continuous.
std::complex<double> evaluation_point(const Domain& domain, double omega);

/// C (p I - A)^{-1} B + D at each frequency. Throws SingularResolventError.
std::vector<ComplexMatrix> frequency_response(const StateSpaceModel& model,
                                              const Vector& omega);

/// Sum over k of |G(model, w_k) - G_k|_F^2. Points are taken from
/// the model's own domain.
double frequency_cost(const StateSpaceModel& model, const FrequencyData& fd);

MarkovSequence markov_parameters(const StateSpaceModel& model, int L);

/// Equal Markov parameters up to tol (Frobenius) for the first L terms.
/// L <= 0 selects n1 + n2.
bool io_equivalent(const StateSpaceModel& m1, const StateSpaceModel& m2,
                   int L = 0, double tol = 1e-9);

/// (T^{-1} A T, T^{-1} B, C T, D). Throws NumericalError if T is singular.
StateSpaceModel similarity_transform(const StateSpaceModel& model,
                                     const Matrix& T);

/// 2-norm condition number via singular values.
double condition_number(const Matrix& m);

/// Numerical rank: count of singular values above tol * sigma_max.
int numerical_rank(const Matrix& m, double tol);

Matrix observability_matrix(const Matrix& A, const Matrix& C);
Matrix controllability_matrix(const Matrix& A, const Matrix& B);

bool observable(const Matrix& A, const Matrix& C, double tol = 1e-10);
bool controllable(const Matrix& A, const Matrix& B, double tol = 1e-10);

/// Spectral radius for discrete, largest real part for continuous.
double stability_margin_value(const Matrix& A, const Domain& domain);
bool is_stable(const Matrix& A, const Domain& domain);

/// Largest singular value of E^T E / N with E = y_ref - yhat(model).
double error_norm(const TimeSeriesData& reference, const StateSpaceModel& model);

}  // namespace ssid
