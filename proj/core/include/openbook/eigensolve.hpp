#pragma once

// Lowest eigenpairs of the reduced generalized problem K x = lambda M x.
// The sparse path is shift-invert Arnoldi with full reorthogonalization and a
// direct factorization at the shift; the dense path is the oracle.  The
// reduced matrix may be nonsymmetric (the symmetry defect is a diagnostic),
// so a general Krylov method is used and realness of eigenvalues is a
// verified property, never an assumption.

#include <cstdint>
#include <string>
#include <vector>

#include "openbook/discretize.hpp"

namespace openbook {

struct EigenPair {
  Complex lambda;
  Eigen::VectorXcd vector;
  double residual = 0.0;
  bool converged = true;
  int mode_tag = 0;  // filled by callers merging several mode systems
};

struct SpectrumResult {
  std::vector<EigenPair> pairs;  // sorted by Re(lambda)
  std::vector<int> clusters;     // cluster index per pair
  double cluster_tol = 1e-6;
  double symmetry_defect = 0.0;
  std::string mode_label;
  bool all_converged = true;
};

struct SolveOptions {
  int count = 10;
  double tol = 1e-9;
  double shift = -1.0;
  std::uint64_t seed = 1;
  double cluster_tol = 1e-6;
};

/// `count` eigenpairs nearest above the shift.  Deterministic for a fixed
/// seed.  Throws ShiftCollision when the factorization at the shift fails;
/// non-convergence within the iteration cap (50 * count) returns partial
/// results with the unconverged pairs flagged.
SpectrumResult lowest_eigenpairs(const ReducedSystem& sys, const SolveOptions& opts);

/// Full dense generalized eigensolve, dimension <= 4000.  Ground truth for
/// the sparse path.  The bare overload returns every eigenpair; with options,
/// a positive count truncates to the lowest pairs.
SpectrumResult dense_reference_eig(const ReducedSystem& sys);
SpectrumResult dense_reference_eig(const ReducedSystem& sys, const SolveOptions& opts);

/// ||K x - lambda M x||_2 / (||K||_F ||x||_2).
double residual(const ReducedSystem& sys, Complex lambda, const Eigen::VectorXcd& x);

/// Sequential clustering of sorted eigenvalues:
/// |l_i - l_j| <= tol * (1 + |l_i|) joins a cluster.
std::vector<int> cluster_eigenvalues(const std::vector<EigenPair>& pairs, double tol);

}  // namespace openbook
