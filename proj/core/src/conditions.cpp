#include "openbook/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace openbook {

namespace {

Matrix stacked(const MatrixPair& m) {
  const int k = static_cast<int>(m.A.rows());
  Matrix block(k, 2 * k);
  block << m.A, m.C;
  return block;
}

void require_square_pair(const MatrixPair& m) {
  if (m.A.rows() != m.A.cols() || m.C.rows() != m.C.cols() ||
      m.A.rows() != m.C.rows() || m.A.rows() < 1) {
    throw Error("condition matrices must be square and of equal size");
  }
  if (!m.A.allFinite() || !m.C.allFinite()) {
    throw Error("condition matrices must have finite entries");
  }
}

}  // namespace

ConditionPair::ConditionPair(std::vector<MatrixPair> samples, bool constant)
    : constant_(constant), samples_(std::move(samples)) {
  if (samples_.empty()) throw Error("condition pair needs at least one sample");
  for (const auto& s : samples_) require_square_pair(s);
  k_ = static_cast<int>(samples_.front().A.rows());
  for (const auto& s : samples_) {
    if (s.A.rows() != k_) throw Error("all condition samples must share one size");
  }
}

ConditionPair ConditionPair::constant(Matrix A, Matrix C) {
  std::vector<MatrixPair> s;
  s.push_back({std::move(A), std::move(C)});
  return ConditionPair(std::move(s), true);
}

ConditionPair ConditionPair::per_node(std::vector<MatrixPair> samples) {
  return ConditionPair(std::move(samples), false);
}

int check_rank(const MatrixPair& m) {
  Eigen::JacobiSVD<Matrix> svd(stacked(m));
  const auto& sv = svd.singularValues();
  if (sv.size() == 0) return 0;
  const double thresh = 1e-12 * sv(0);
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i) {
    if (sv(i) > thresh && sv(i) > 0.0) ++rank;
  }
  return rank;
}

int check_rank(const ConditionPair& pair) {
  int r = pair.size();
  for (const auto& s : pair.samples()) r = std::min(r, check_rank(s));
  return r;
}

// Generalized eigenvalues of the pencil (A, C) without a complex QZ: pick a
// probe mu0 off the real axis where A - mu0*C is well conditioned, then the
// eigenvalues theta of (A - mu0*C)^{-1} C give lambda = mu0 + 1/theta.  If the
// pencil is rank deficient at k+1 distinct probes, det(A - lambda*C) is
// identically zero (degree <= k polynomial with k+1 roots).
EllipticityResult check_ellipticity(const MatrixPair& m) {
  require_square_pair(m);
  const int k = static_cast<int>(m.A.rows());
  const double scale = std::max({m.A.norm(), m.C.norm(), 1.0});

  Complex best_probe = 0.0;
  double best_smin = -1.0;
  for (int j = 0; j <= k; ++j) {
    const double r = std::pow(1.7, j - k / 2);
    const double phi = 0.9 + 0.73 * j;
    const Complex mu(r * std::cos(phi), r * std::sin(phi));
    Eigen::JacobiSVD<Matrix> svd(m.A - mu * m.C);
    const double smin = svd.singularValues()(k - 1);
    if (smin > best_smin) {
      best_smin = smin;
      best_probe = mu;
    }
  }
  if (best_smin <= 1e-13 * scale) {
    // Identically singular pencil: every lambda > 0 violates.
    return {false, std::nullopt};
  }

  const Matrix shifted = m.A - best_probe * m.C;
  const Matrix B = shifted.partialPivLu().solve(m.C);
  Eigen::ComplexEigenSolver<Matrix> eig(B, /*computeEigenvectors=*/false);
  if (eig.info() != Eigen::Success) {
    throw Error("pencil eigenvalue computation failed");
  }

  std::optional<double> smallest;
  for (int i = 0; i < k; ++i) {
    const Complex theta = eig.eigenvalues()(i);
    if (std::abs(theta) < 1e3 * std::numeric_limits<double>::min()) continue;  // lambda = infinity
    const Complex lambda = best_probe + 1.0 / theta;
    const double mag = std::abs(lambda);
    if (std::abs(lambda.imag()) <= 1e-9 * (1.0 + mag) && lambda.real() > 1e-12) {
      if (!smallest || lambda.real() < *smallest) smallest = lambda.real();
    }
  }
  if (smallest) return {false, smallest};
  return {true, std::nullopt};
}

EllipticityResult check_ellipticity(const ConditionPair& pair) {
  // The condition quantifies over every point of the binding: one violating
  // sample fails it.
  for (const auto& s : pair.samples()) {
    EllipticityResult r = check_ellipticity(s);
    if (!r.elliptic) return r;
  }
  return {true, std::nullopt};
}

double check_selfadjoint(const MatrixPair& m) {
  require_square_pair(m);
  const Matrix ac = m.A * m.C.adjoint();
  return (ac - ac.adjoint()).norm();
}

double check_selfadjoint(const ConditionPair& pair) {
  double defect = 0.0;
  for (const auto& s : pair.samples()) defect = std::max(defect, check_selfadjoint(s));
  return defect;
}

double hermiticity_tolerance(const MatrixPair& m) {
  return 1e-10 * (m.A.norm() * m.C.norm() + 1.0);
}

Matrix sigma(const MatrixPair& m, double z) {
  require_square_pair(m);
  if (z == 0.0) throw Error("sigma requires z != 0");
  const int k = static_cast<int>(m.A.rows());
  const Matrix plus = m.A + Complex(0, z) * m.C;
  Eigen::FullPivLU<Matrix> lu(plus);
  lu.setThreshold(1e-12);
  if (lu.rank() < k) {
    throw LemmaHypothesesViolated(
        "Lemma hypotheses violated: A + izC is singular at z = " + std::to_string(z));
  }
  return -lu.solve(m.A - Complex(0, z) * m.C);
}

Matrix sigma(const ConditionPair& pair, double z) {
  if (!pair.is_constant()) {
    throw Error("sigma on a per-node pair is ambiguous; evaluate per sample");
  }
  return sigma(pair.sample(0), z);
}

CanonicalUnitary CanonicalUnitary::from(Matrix U) {
  if (U.rows() != U.cols() || U.rows() < 1) throw Error("canonical matrix must be square");
  const int k = static_cast<int>(U.rows());
  const double defect = (U * U.adjoint() - Matrix::Identity(k, k)).norm();
  if (defect > 1e-10 * k) {
    throw Error("matrix is not unitary: defect " + std::to_string(defect));
  }
  return CanonicalUnitary{k, std::move(U), defect};
}

CanonicalUnitary canonical_unitary(const MatrixPair& m) {
  Matrix U = sigma(m, -1.0);
  const int k = static_cast<int>(U.rows());
  const double identity_gap = (sigma(m, 1.0) * U - Matrix::Identity(k, k)).norm();
  if (identity_gap > 1e-10 * k) {
    throw LemmaHypothesesViolated(
        "sigma(1)*sigma(-1) deviates from the identity; pair is not self-adjoint");
  }
  return CanonicalUnitary::from(std::move(U));
}

CanonicalUnitary canonical_unitary(const ConditionPair& pair) {
  if (!pair.is_constant()) {
    throw Error("canonical form of a per-node pair is per sample; use analyze()");
  }
  return canonical_unitary(pair.sample(0));
}

ConditionPair pair_from_unitary(const CanonicalUnitary& u) {
  const Matrix I = Matrix::Identity(u.k, u.k);
  return ConditionPair::constant(Complex(0, 1) * (u.U - I), u.U + I);
}

bool equivalent(const MatrixPair& p, const MatrixPair& q) {
  if (p.A.rows() != q.A.rows()) throw Error("equivalent() requires equal sizes");
  const int rp = check_rank(p);
  const int rq = check_rank(q);
  if (rp != rq) return false;
  if (rp == 0) return true;

  // Orthonormal bases of the row spaces from the right singular vectors.
  const auto basis = [](const MatrixPair& m, int r) {
    Eigen::JacobiSVD<Matrix> svd(stacked(m), Eigen::ComputeFullV);
    return Matrix(svd.matrixV().leftCols(r).conjugate());
  };
  const Matrix bp = basis(p, rp);
  const Matrix bq = basis(q, rq);
  // Largest principal angle: sin(theta_max) = ||(I - Pp) bq||_2.
  const Matrix residual = bq - bp * (bp.adjoint() * bq);
  Eigen::JacobiSVD<Matrix> svd(residual);
  const double sin_theta = svd.singularValues()(0);
  return sin_theta <= 1e-9;
}

bool equivalent(const ConditionPair& p, const ConditionPair& q) {
  if (p.size() != q.size()) throw Error("equivalent() requires equal sizes");
  const int np = p.sample_count();
  const int nq = q.sample_count();
  if (np != nq && np != 1 && nq != 1) {
    throw Error("equivalent() requires matching sample counts (or a constant side)");
  }
  const int n = std::max(np, nq);
  for (int i = 0; i < n; ++i) {
    if (!equivalent(p.sample(np == 1 ? 0 : i), q.sample(nq == 1 ? 0 : i))) return false;
  }
  return true;
}

ConditionPair dirichlet_condition(int k) {
  if (k < 1) throw Error("condition size must be >= 1");
  return ConditionPair::constant(Matrix::Identity(k, k), Matrix::Zero(k, k));
}

ConditionPair neumann_condition(int k) {
  if (k < 1) throw Error("condition size must be >= 1");
  return ConditionPair::constant(Matrix::Zero(k, k), Matrix::Identity(k, k));
}

ConditionPair kirchhoff_condition(int k) {
  if (k < 1) throw Error("condition size must be >= 1");
  Matrix A = Matrix::Zero(k, k);
  Matrix C = Matrix::Zero(k, k);
  for (int i = 0; i + 1 < k; ++i) {
    A(i, i) = 1.0;
    A(i, i + 1) = -1.0;
  }
  C.row(k - 1).setOnes();
  return ConditionPair::constant(std::move(A), std::move(C));
}

ConditionPair delta_condition(int k, double alpha) {
  if (k < 1) throw Error("condition size must be >= 1");
  Matrix A = Matrix::Zero(k, k);
  Matrix C = Matrix::Zero(k, k);
  for (int i = 0; i + 1 < k; ++i) {
    A(i, i) = 1.0;
    A(i, i + 1) = -1.0;
  }
  A(k - 1, 0) = -alpha;
  C.row(k - 1).setOnes();
  return ConditionPair::constant(std::move(A), std::move(C));
}

ConditionReport analyze(const ConditionPair& pair) {
  ConditionReport report;
  report.rank = check_rank(pair);
  EllipticityResult ell = check_ellipticity(pair);
  report.elliptic = ell.elliptic;
  report.violating_lambda = ell.violating_lambda;
  report.selfadjoint_defect = check_selfadjoint(pair);

  double herm_tol = 0.0;
  for (const auto& s : pair.samples()) herm_tol = std::max(herm_tol, hermiticity_tolerance(s));
  if (report.rank == pair.size() && report.selfadjoint_defect <= herm_tol) {
    std::vector<CanonicalUnitary> canon;
    canon.reserve(pair.sample_count());
    for (const auto& s : pair.samples()) canon.push_back(canonical_unitary(s));
    report.canonical = canon.front();
    const int n = static_cast<int>(canon.size());
    for (int i = 0; n > 1 && i < n; ++i) {
      const double gap = (canon[(i + 1) % n].U - canon[i].U).norm();
      report.sample_variation = std::max(report.sample_variation, gap);
    }
  }
  return report;
}

}  // namespace openbook
