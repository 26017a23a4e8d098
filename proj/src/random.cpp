#include "ssid/random.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/QR>

#include "ssid/errors.hpp"

namespace ssid {

Rng make_rng(std::initializer_list<std::uint64_t> keys) {
  std::vector<std::uint32_t> words;
  words.reserve(2 * keys.size());
  for (auto k : keys) {
    words.push_back(static_cast<std::uint32_t>(k & 0xffffffffu));
    words.push_back(static_cast<std::uint32_t>(k >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  return Rng(seq);
}

Matrix randn(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Matrix m(rows, cols);
  // Fill column by column so the draw order is fixed.
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = nd(rng);
  }
  return m;
}

Matrix random_orthogonal(Rng& rng, Eigen::Index n) {
  Eigen::HouseholderQR<Matrix> qr(randn(rng, n, n));
  Matrix Q = qr.householderQ();
  // Sign fix makes the distribution uniform over O(n).
  const Matrix R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (R(i, i) < 0.0) Q.col(i) = -Q.col(i);
  }
  return Q;
}

namespace {

// Real block-diagonal matrix with the requested spectrum, rotated into a
// random orthogonal basis.
Matrix random_spectrum_matrix(Rng& rng, int n, bool discrete,
                              const RandomSystemOptions& opts) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Matrix Lam = Matrix::Zero(n, n);
  int i = 0;
  while (i < n) {
    const bool pair = (n - i >= 2) && unit(rng) < 0.5;
    if (discrete) {
      if (pair) {
        const double r = opts.max_radius * std::sqrt(unit(rng));
        const double th = std::numbers::pi * unit(rng);
        const double re = r * std::cos(th), im = r * std::sin(th);
        Lam(i, i) = re;
        Lam(i + 1, i + 1) = re;
        Lam(i, i + 1) = im;
        Lam(i + 1, i) = -im;
        i += 2;
      } else {
        Lam(i, i) = opts.max_radius * (2.0 * unit(rng) - 1.0);
        i += 1;
      }
    } else {
      const double re =
          opts.min_real + (opts.max_real - opts.min_real) * unit(rng);
      if (pair) {
        const double im = opts.max_imag * unit(rng);
        Lam(i, i) = re;
        Lam(i + 1, i + 1) = re;
        Lam(i, i + 1) = im;
        Lam(i + 1, i) = -im;
        i += 2;
      } else {
        Lam(i, i) = re;
        i += 1;
      }
    }
  }
  const Matrix Q = random_orthogonal(rng, n);
  return Q * Lam * Q.transpose();
}

StateSpaceModel random_stable(int n, int nu, int ny, std::uint64_t seed,
                              const RandomSystemOptions& opts, bool discrete) {
  if (n < 1 || nu < 1 || ny < 1) {
    throw DimensionError("random system needs n, nu, ny >= 1");
  }
  for (int attempt = 0; attempt < opts.max_retries; ++attempt) {
    Rng rng = make_rng({seed, static_cast<std::uint64_t>(attempt),
                        discrete ? 0x5eedu : 0xc0deu});
    Matrix A = random_spectrum_matrix(rng, n, discrete, opts);
    Matrix B = randn(rng, n, nu);
    Matrix C = randn(rng, ny, n);
    Matrix D = opts.with_feedthrough ? randn(rng, ny, nu) : Matrix::Zero(ny, nu);
    if (observable(A, C, 1e-8) && controllable(A, B, 1e-8)) {
      return StateSpaceModel(std::move(A), std::move(B), std::move(C),
                             std::move(D),
                             discrete ? Domain::discrete(1.0)
                                      : Domain::continuous());
    }
  }
  throw NumericalError("could not draw an observable and controllable system");
}

}  // namespace

StateSpaceModel random_stable_discrete(int n, int nu, int ny,
                                       std::uint64_t seed,
                                       const RandomSystemOptions& opts) {
  return random_stable(n, nu, ny, seed, opts, true);
}

StateSpaceModel random_stable_continuous(int n, int nu, int ny,
                                         std::uint64_t seed,
                                         const RandomSystemOptions& opts) {
  return random_stable(n, nu, ny, seed, opts, false);
}

}  // namespace ssid
