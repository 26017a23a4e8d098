#pragma once

#include <cstdint>
#include <random>

#include "ssid/model.hpp"

namespace ssid {

/// Engine used everywhere randomness appears; always explicitly seeded.
using Rng = std::mt19937_64;

/// Engine seeded from a list of integers (seed, trial id, retry, ...).
Rng make_rng(std::initializer_list<std::uint64_t> keys);

Matrix randn(Rng& rng, Eigen::Index rows, Eigen::Index cols);

/// Haar-ish random orthogonal matrix from the QR of a Gaussian matrix.
Matrix random_orthogonal(Rng& rng, Eigen::Index n);

struct RandomSystemOptions {
  bool with_feedthrough = false;
  /// Discrete: eigenvalues inside the disk of this radius.
  double max_radius = 0.95;
  /// Continuous: real parts drawn from [min_real, max_real].
  double min_real = -2.0;
  double max_real = -0.05;
  /// Continuous: imaginary parts of complex pairs drawn from [0, max_imag].
  double max_imag = 5.0;
  int max_retries = 100;
};

/// Random stable discrete model (Ts = 1) with (A,B) controllable and
/// (A,C) observable. Deterministic in seed.
StateSpaceModel random_stable_discrete(int n, int nu, int ny,
                                       std::uint64_t seed,
                                       const RandomSystemOptions& opts = {});

/// Random stable continuous model, same guarantees.
StateSpaceModel random_stable_continuous(int n, int nu, int ny,
                                         std::uint64_t seed,
                                         const RandomSystemOptions& opts = {});

}  // namespace ssid
