#include "doctest.h"

#include <Eigen/QR>

#include "oracles.hpp"
#include "ssid/errors.hpp"
#include "ssid/random.hpp"
#include "ssid/regress.hpp"

using namespace ssid;

namespace {

TimeSeriesData clean_record(const StateSpaceModel& m, int N, std::uint64_t seed) {
  Rng rng = make_rng({seed, 1});
  const Matrix u = randn(rng, N, m.nu());
  return {u, simulate(m, u), 1.0};
}

TimeSeriesData noisy_record(const StateSpaceModel& m, int N, std::uint64_t seed) {
  Rng rng = make_rng({seed, 2});
  const Matrix u = randn(rng, N, m.nu());
  return {u, simulate(m, u) + 0.3 * randn(rng, N, m.ny()), 1.0};
}

FrequencyData frf(const StateSpaceModel& m, int K) {
  const Vector w = Vector::LinSpaced(K, 0.0, 3.0);
  return {w, frequency_response(m, w), m.domain};
}

FrequencyData noisy_frf(const StateSpaceModel& m, int K, std::uint64_t seed) {
  Rng rng = make_rng({seed, 3});
  auto fd = frf(m, K);
  for (auto& g : fd.G) {
    ComplexMatrix e(g.rows(), g.cols());
    e.real() = randn(rng, g.rows(), g.cols());
    e.imag() = randn(rng, g.rows(), g.cols());
    g += 0.2 * e;
  }
  return fd;
}

StateSpaceModel with_bd(const StateSpaceModel& m, const Matrix& B, const Matrix& D) {
  return {m.A, B, m.C, D, m.domain};
}

StateSpaceModel with_cd(const StateSpaceModel& m, const Matrix& C, const Matrix& D) {
  return {m.A, m.B, C, D, m.domain};
}

// Central-difference gradient of `cost` over the entries of two matrices.
template <class F>
double gradient_norm(const Matrix& P, const Matrix& Q, F cost) {
  const double h = 1e-6;
  double g2 = 0.0;
  for (int which = 0; which < 2; ++which) {
    const Matrix& base = which == 0 ? P : Q;
    for (Eigen::Index i = 0; i < base.size(); ++i) {
      Matrix p1 = P, q1 = Q, p2 = P, q2 = Q;
      Matrix& a = which == 0 ? p1 : q1;
      Matrix& b = which == 0 ? p2 : q2;
      a.data()[i] += h;
      b.data()[i] -= h;
      const double g = (cost(p1, q1) - cost(p2, q2)) / (2 * h);
      g2 += g * g;
    }
  }
  return std::sqrt(g2);
}

}  // namespace

TEST_SUITE("regress") {

TEST_CASE("estimate_bd_time recovers the generator on clean data") {
  const auto m = random_stable_discrete(4, 2, 2, 1, {true});
  const auto r = estimate_bd_time(m.A, m.C, clean_record(m, 200, 1));
  CHECK((r.estimate.B - m.B).norm() < 1e-8);
  CHECK((r.estimate.D - m.D).norm() < 1e-8);
  CHECK(r.cost < 1e-16);
  CHECK_FALSE(r.rank_deficient);
  CHECK(r.unknowns == 4 * 2 + 2 * 2);
}

TEST_CASE("estimate_bd_time with zero input") {
  const auto m = random_stable_discrete(3, 2, 1, 2);
  Rng rng = make_rng({2});
  const TimeSeriesData d(Matrix::Zero(30, 2), randn(rng, 30, 1), 1.0);
  const auto r = estimate_bd_time(m.A, m.C, d);
  CHECK(r.rank_deficient);
  CHECK(r.rank == 0);
  CHECK(r.estimate.B.norm() == 0.0);
  CHECK(r.estimate.D.norm() == 0.0);
}

TEST_CASE("estimate_bd_time needs enough equations") {
  const auto m = random_stable_discrete(3, 2, 1, 3);
  CHECK_THROWS_AS(estimate_bd_time(m.A, m.C, clean_record(m, 4, 3)), DimensionError);
}

TEST_CASE("estimate_bd_time: scalar case against hand-coded normal equations") {
  const double a = 0.6, c = 1.3;
  Matrix u(4, 1), y(4, 1);
  u << 1.0, -0.5, 2.0, 0.3;
  y << 0.2, 1.1, -0.4, 2.5;
  // Regressors: c * s(t) with s(t+1) = a s(t) + u(t), and u(t).
  Matrix Phi(4, 2);
  double s = 0.0;
  for (int t = 0; t < 4; ++t) {
    Phi(t, 0) = c * s;
    Phi(t, 1) = u(t, 0);
    s = a * s + u(t, 0);
  }
  const auto ref = oracle::normal_equations_2(Phi, y.col(0));
  const auto r = estimate_bd_time(Matrix::Constant(1, 1, a), Matrix::Constant(1, 1, c),
                                  TimeSeriesData(u, y, 1.0));
  CHECK(r.estimate.B(0, 0) == doctest::Approx(ref[0]).epsilon(1e-12));
  CHECK(r.estimate.D(0, 0) == doctest::Approx(ref[1]).epsilon(1e-12));
}

TEST_CASE("estimate_bd_time honours a fixed D") {
  const auto m = random_stable_discrete(3, 2, 2, 4, {true});
  RegressionOptions o;
  o.fixed_d = m.D;
  const auto r = estimate_bd_time(m.A, m.C, clean_record(m, 100, 4), o);
  CHECK(r.estimate.D == m.D);
  CHECK((r.estimate.B - m.B).norm() < 1e-8);
}

TEST_CASE("estimate_cd_time recovers the generator and handles B = 0") {
  const auto m = random_stable_discrete(4, 2, 3, 5, {true});
  const auto d = clean_record(m, 200, 5);
  const auto r = estimate_cd_time(m.A, m.B, d);
  CHECK((r.estimate.C - m.C).norm() < 1e-8);
  CHECK((r.estimate.D - m.D).norm() < 1e-8);

  const auto noisy = noisy_record(m, 100, 5);
  const auto z = estimate_cd_time(m.A, Matrix::Zero(4, 2), noisy);
  CHECK(z.estimate.C.norm() == 0.0);
  CHECK(z.rank_deficient);
  const Matrix Dls = noisy.u.completeOrthogonalDecomposition().solve(noisy.y).transpose();
  CHECK((z.estimate.D - Dls).norm() < 1e-10);
}

TEST_CASE("estimate_cd_time is separable across output rows") {
  const auto m = random_stable_discrete(3, 2, 2, 6);
  const auto d = noisy_record(m, 80, 6);
  const auto joint = estimate_cd_time(m.A, m.B, d);
  for (int r = 0; r < 2; ++r) {
    const TimeSeriesData row(d.u, d.y.col(r), 1.0);
    const auto single = estimate_cd_time(m.A, m.B, row);
    CHECK((single.estimate.C - joint.estimate.C.row(r)).norm() < 1e-10);
    CHECK((single.estimate.D - joint.estimate.D.row(r)).norm() < 1e-10);
  }
}

TEST_CASE("frequency regressions recover the generator") {
  const auto m = random_stable_discrete(4, 2, 3, 7, {true});
  const auto fd = frf(m, 40);
  const auto bd = estimate_bd_freq(m.A, m.C, fd);
  CHECK((bd.estimate.B - m.B).norm() < 1e-8);
  CHECK((bd.estimate.D - m.D).norm() < 1e-8);
  const auto cd = estimate_cd_freq(m.A, m.B, fd);
  CHECK((cd.estimate.C - m.C).norm() < 1e-8);
  CHECK((cd.estimate.D - m.D).norm() < 1e-8);

  const auto c = random_stable_continuous(3, 2, 2, 7, {true});
  const Vector w = Vector::LinSpaced(30, 0.0, 6.0);
  const FrequencyData fc(w, frequency_response(c, w), c.domain);
  CHECK((estimate_bd_freq(c.A, c.C, fc).estimate.B - c.B).norm() < 1e-8);
  CHECK((estimate_cd_freq(c.A, c.B, fc).estimate.C - c.C).norm() < 1e-8);
}

TEST_CASE("estimate_cd_freq on a feedthrough-only response") {
  auto m = random_stable_discrete(3, 2, 2, 8);
  m.B.setZero();
  m.D << 1.0, -2.0, 0.5, 3.0;
  const auto r = estimate_cd_freq(m.A, m.B, frf(m, 10));
  CHECK(r.estimate.C.norm() == 0.0);
  CHECK((r.estimate.D - m.D).norm() < 1e-12);
  CHECK(r.rank_deficient);
}

TEST_CASE("estimate_bd_freq: scalar case against stacked real/imag normal equations") {
  const double a = -0.4, c = 0.9;
  Vector w(3);
  w << 0.2, 1.0, 2.5;
  std::vector<ComplexMatrix> G = {ComplexMatrix::Constant(1, 1, {1.0, 0.3}),
                                  ComplexMatrix::Constant(1, 1, {0.2, -0.8}),
                                  ComplexMatrix::Constant(1, 1, {-0.5, 0.1})};
  Matrix Phi(6, 2);
  Vector g(6);
  for (int k = 0; k < 3; ++k) {
    const std::complex<double> phi = c / (std::polar(1.0, w[k]) - a);
    Phi.row(2 * k) << phi.real(), 1.0;
    Phi.row(2 * k + 1) << phi.imag(), 0.0;
    g[2 * k] = G[k](0, 0).real();
    g[2 * k + 1] = G[k](0, 0).imag();
  }
  const auto ref = oracle::normal_equations_2(Phi, g);
  const auto r = estimate_bd_freq(Matrix::Constant(1, 1, a), Matrix::Constant(1, 1, c),
                                  FrequencyData(w, G, Domain::discrete(1.0)));
  CHECK(r.estimate.B(0, 0) == doctest::Approx(ref[0]).epsilon(1e-12));
  CHECK(r.estimate.D(0, 0) == doctest::Approx(ref[1]).epsilon(1e-12));
}

TEST_CASE("frequency regression reports a singular resolvent") {
  Vector w(2);
  w << 0.0, 1.0;
  std::vector<ComplexMatrix> G(2, ComplexMatrix::Ones(1, 1));
  CHECK_THROWS_AS(estimate_bd_freq(Matrix::Identity(1, 1), Matrix::Ones(1, 1),
                                   FrequencyData(w, G, Domain::discrete(1.0))),
                  SingularResolventError);
}

TEST_CASE("normal_equation_residual") {
  const auto m = random_stable_discrete(3, 2, 2, 9, {true});
  const auto fd = noisy_frf(m, 30, 9);
  const auto cd = estimate_cd_freq(m.A, m.B, fd);
  double scale = 0.0;
  for (const auto& g : fd.G) scale += g.squaredNorm();
  const double at = normal_equation_residual(cd.estimate, fd, MatrixPair::CD);
  CHECK(at < 1e-6 * scale);
  auto moved = cd.estimate;
  moved.C.array() += 0.1;
  CHECK(normal_equation_residual(moved, fd, MatrixPair::CD) > at);

  const auto bd = estimate_bd_freq(m.A, m.C, fd);
  CHECK(normal_equation_residual(bd.estimate, fd, MatrixPair::BD) < 1e-6 * scale);
}

TEST_CASE("SIMO: normal equations stay solved after a similarity transform") {
  const auto m = random_stable_discrete(3, 1, 3, 10);
  const auto fd = noisy_frf(m, 25, 10);
  const auto sol = estimate_cd_freq(m.A, m.B, fd).estimate;
  Rng rng = make_rng({10});
  const Matrix T = random_orthogonal(rng, 3) * Vector::LinSpaced(3, 0.5, 2.0).asDiagonal();
  const auto moved = similarity_transform(sol, T);
  double scale = 0.0;
  for (const auto& g : fd.G) scale += g.squaredNorm();
  CHECK(normal_equation_residual(sol, fd, MatrixPair::CD) < 1e-8 * scale);
  CHECK(normal_equation_residual(moved, fd, MatrixPair::CD) < 1e-8 * scale);
}

TEST_CASE("regression results are stationary and locally optimal") {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto m = random_stable_discrete(3, 2, 2, 20 + s, {true});
    const auto d = noisy_record(m, 60, s);
    const auto fd = noisy_frf(m, 20, s);

    const auto bd = estimate_bd_time(m.A, m.C, d);
    auto tcost_bd = [&](const Matrix& B, const Matrix& D) {
      return prediction_cost(with_bd(m, B, D), d);
    };
    CHECK(gradient_norm(bd.estimate.B, bd.estimate.D, tcost_bd) < 1e-5 * (1 + bd.cost));

    const auto cd = estimate_cd_time(m.A, m.B, d);
    auto tcost_cd = [&](const Matrix& C, const Matrix& D) {
      return prediction_cost(with_cd(m, C, D), d);
    };
    CHECK(gradient_norm(cd.estimate.C, cd.estimate.D, tcost_cd) < 1e-5 * (1 + cd.cost));

    const auto fbd = estimate_bd_freq(m.A, m.C, fd);
    auto fcost_bd = [&](const Matrix& B, const Matrix& D) {
      return frequency_cost(with_bd(m, B, D), fd);
    };
    CHECK(gradient_norm(fbd.estimate.B, fbd.estimate.D, fcost_bd) < 1e-5 * (1 + fbd.cost));

    const auto fcd = estimate_cd_freq(m.A, m.B, fd);
    auto fcost_cd = [&](const Matrix& C, const Matrix& D) {
      return frequency_cost(with_cd(m, C, D), fd);
    };
    CHECK(gradient_norm(fcd.estimate.C, fcd.estimate.D, fcost_cd) < 1e-5 * (1 + fcd.cost));

    Rng rng = make_rng({s, 99});
    for (int k = 0; k < 20; ++k) {
      const Matrix dB = 1e-3 * randn(rng, 3, 2), dD = 1e-3 * randn(rng, 2, 2);
      CHECK(tcost_bd(bd.estimate.B + dB, bd.estimate.D + dD) >= bd.cost);
      CHECK(fcost_bd(fbd.estimate.B + dB, fbd.estimate.D + dD) >= fbd.cost);
      const Matrix dC = 1e-3 * randn(rng, 2, 3);
      CHECK(tcost_cd(cd.estimate.C + dC, cd.estimate.D + dD) >= cd.cost);
      CHECK(fcost_cd(fcd.estimate.C + dC, fcd.estimate.D + dD) >= fcd.cost);
    }

    // Never worse than the generating matrices.
    CHECK(bd.cost <= prediction_cost(m, d) + 1e-12);
    CHECK(fcd.cost <= frequency_cost(m, fd) + 1e-12);
  }
}

}  // TEST_SUITE
