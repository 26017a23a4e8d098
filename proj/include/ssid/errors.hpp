#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ssid {

/// Shapes of matrices or data records do not agree.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical precondition failed (singular matrix, rank defect, ...).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// (p I - A) is singular at some evaluation point.
class SingularResolventError : public NumericalError {
 public:
  SingularResolventError(std::size_t index, double omega)
      : NumericalError("resolvent singular at frequency index " +
                       std::to_string(index) + " (omega = " +
                       std::to_string(omega) + ")"),
        index_(index),
        omega_(omega) {}

  std::size_t index() const { return index_; }
  double omega() const { return omega_; }

 private:
  std::size_t index_;
  double omega_;
};

/// A pair (A, C) or (A, B) lacks full rank where it is required.
class RankDeficiencyError : public NumericalError {
 public:
  RankDeficiencyError(const std::string& what, int rank, int required)
      : NumericalError(what + " (rank " + std::to_string(rank) + " < " +
                       std::to_string(required) + ")"),
        rank_(rank),
        required_(required) {}

  int rank() const { return rank_; }
  int required() const { return required_; }

 private:
  int rank_;
  int required_;
};

}  // namespace ssid
