#pragma once

// Finite-dimensional calculus of binding conditions A*u + C*du/dnu = 0:
// rank, ellipticity of the pencil (A, C), self-adjointness of A*C^*, the
// canonical unitary form U = sigma(-1), and row-space equivalence of pairs.

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "openbook/errors.hpp"

namespace openbook {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

/// One sample of the condition matrices at a point of the binding.
struct MatrixPair {
  Matrix A;
  Matrix C;
};

/// Per-binding condition matrices, either constant along the binding or
/// sampled at equispaced binding nodes.
class ConditionPair {
 public:
  static ConditionPair constant(Matrix A, Matrix C);
  static ConditionPair per_node(std::vector<MatrixPair> samples);

  int size() const { return k_; }
  bool is_constant() const { return samples_.size() == 1 && constant_; }
  int sample_count() const { return static_cast<int>(samples_.size()); }
  const MatrixPair& sample(int i) const { return samples_.at(i); }
  const std::vector<MatrixPair>& samples() const { return samples_; }

 private:
  ConditionPair(std::vector<MatrixPair> samples, bool constant);
  int k_ = 0;
  bool constant_ = true;
  std::vector<MatrixPair> samples_;
};

struct EllipticityResult {
  bool elliptic = true;
  /// Smallest violating lambda > 0, when one exists.  Unset for an
  /// identically singular pencil, which also fails the check.
  std::optional<double> violating_lambda;
};

/// Canonical unitary of a maximal-rank self-adjoint pair, U = sigma(-1).
struct CanonicalUnitary {
  int k = 0;
  Matrix U;
  double unitarity_defect = 0.0;  // ||U U^* - I||_F, <= 1e-10 * k on construction

  static CanonicalUnitary from(Matrix U);
};

/// Aggregate report printed by the `validate` subcommand.
struct ConditionReport {
  int rank = 0;
  bool elliptic = true;
  std::optional<double> violating_lambda;
  double selfadjoint_defect = 0.0;
  std::optional<CanonicalUnitary> canonical;
  /// Max Frobenius distance between canonical unitaries of adjacent samples;
  /// 0 for constant pairs.  Smoothness in x cannot be verified from samples,
  /// so this is reported as a diagnostic only.
  double sample_variation = 0.0;
};

/// Numerical rank of the k x 2k block (A, C); singular values below
/// 1e-12 * sigma_max are treated as zero.  Min over samples.
int check_rank(const ConditionPair& pair);
int check_rank(const MatrixPair& m);

/// det(A - lambda*C) != 0 for all lambda > 0, checked at every sample via the
/// generalized eigenvalues of the pencil.  A real eigenvalue (within
/// 1e-9 * (1 + |lambda|)) with Re > 1e-12 violates; an identically singular
/// pencil fails with the violating lambda unset.
EllipticityResult check_ellipticity(const ConditionPair& pair);
EllipticityResult check_ellipticity(const MatrixPair& m);

/// ||A C^* - (A C^*)^*||_F; max over samples.
double check_selfadjoint(const ConditionPair& pair);
double check_selfadjoint(const MatrixPair& m);

/// sigma(z) = -(A + izC)^{-1} (A - izC), unitary when (A, C) has maximal rank
/// and A C^* is self-adjoint.  Throws LemmaHypothesesViolated when A + izC is
/// singular.  Requires z != 0.
Matrix sigma(const MatrixPair& m, double z);
Matrix sigma(const ConditionPair& pair, double z);  // constant pairs only

/// U = sigma(-1); also verifies the identity sigma(1) * U = I to 1e-10.
CanonicalUnitary canonical_unitary(const MatrixPair& m);
CanonicalUnitary canonical_unitary(const ConditionPair& pair);

/// The pair (i(U - I), U + I), which encodes the same condition as U.
ConditionPair pair_from_unitary(const CanonicalUnitary& u);

/// True iff the row spaces of the k x 2k blocks coincide (equal numerical
/// rank and largest principal angle <= 1e-9).
bool equivalent(const ConditionPair& p, const ConditionPair& q);
bool equivalent(const MatrixPair& p, const MatrixPair& q);

/// Standard quantum-graph vocabulary.
ConditionPair dirichlet_condition(int k);
ConditionPair neumann_condition(int k);
/// Rows 1..k-1: trace continuity u_i = u_{i+1}; row k: sum of outward normal
/// derivatives = 0.
ConditionPair kirchhoff_condition(int k);
/// Kirchhoff with the flux row replaced by sum(du/dnu) = alpha * u_1.
ConditionPair delta_condition(int k, double alpha);

ConditionReport analyze(const ConditionPair& pair);

/// Hermiticity tolerance used to decide whether the canonical form exists:
/// 1e-10 * (||A|| ||C|| + 1), Frobenius norms.
double hermiticity_tolerance(const MatrixPair& m);

}  // namespace openbook
