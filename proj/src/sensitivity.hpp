#pragma once

// Internal helpers shared by the regressions and the Gauss-Newton Jacobians.

#include <complex>
#include <vector>

#include "ssid/model.hpp"

namespace ssid::detail {

/// For every column w_j of W (N x m) runs S(t+1) = A S(t) + w_j(t) I from
/// S(0) = 0 and writes (C S(t))(r, i) into out(t * ny + r, offset + j * n + i).
/// With W = u this gives d yhat / d B_ij; with W = states it gives d yhat / d A_ij.
void fill_sensitivity_columns(const Matrix& A, const Matrix& C, const Matrix& W,
                              Matrix& out, Eigen::Index offset);

/// Resolvent products at one evaluation point: C R and R B, R = (p I - A)^{-1}.
struct ResolventTerms {
  ComplexMatrix CR;  // ny x n
  ComplexMatrix RB;  // n x nu
};

/// Evaluates the terms for every frequency; throws SingularResolventError.
std::vector<ResolventTerms> resolvent_terms(const StateSpaceModel& model,
                                            const Vector& omega);

/// Same, but only C R (for the B,D regression where B is unknown).
std::vector<ComplexMatrix> left_resolvent(const Matrix& A, const Matrix& C,
                                          const Domain& domain,
                                          const Vector& omega);
/// Only R B (for the C,D regression).
std::vector<ComplexMatrix> right_resolvent(const Matrix& A, const Matrix& B,
                                           const Domain& domain,
                                           const Vector& omega);

}  // namespace ssid::detail
