#pragma once

#include <vector>

#include "perfospec/fem.hpp"
#include "perfospec/parallel.hpp"

namespace perfospec {

/// k smallest eigenpairs of (stiffness) v = lambda (mass) v, ascending,
/// eigenvectors mass-orthonormal.
struct Spectrum {
  std::vector<double> eigenvalues;
  std::vector<DiscreteField> eigenvectors;
  std::vector<double> residuals;  // ||A v - lambda B v|| / ||B v||
};

/// Shift-invert Lanczos at sigma = 0: the stiffness is factored once with a
/// sparse Cholesky and the Krylov recurrence runs in the mass inner product
/// with full reorthogonalization. Deterministic: the starting vector is the
/// B-normalized all-ones vector and restarts use a fixed vector family.
/// Throws FactorizationFailure when the stiffness is not SPD (a boundary
/// condition bug) and NoConvergence when the basis budget is exhausted.
Spectrum smallest_eigenpairs(const DiscreteOperator& op, int k, double tol = 1e-9,
                             int max_iter = 400, ExecPolicy policy = ExecPolicy::Parallel);

double residual_norm(const DiscreteOperator& op, double lambda, const DiscreteField& v);

/// Eigenvalues+vectors of a symmetric tridiagonal matrix by implicit QL with
/// Wilkinson shifts (ascending order).
void tridiagonal_eigen(std::vector<double> diag, std::vector<double> off,
                       std::vector<double>& values, std::vector<std::vector<double>>& vectors);

}  // namespace perfospec
