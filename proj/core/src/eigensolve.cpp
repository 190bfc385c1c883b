#include "openbook/eigensolve.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Dense>
#include <Eigen/SparseLU>

namespace openbook {

namespace {

Eigen::VectorXcd seeded_start(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXcd v(n);
  for (int i = 0; i < n; ++i) v(i) = Complex(gauss(rng), gauss(rng));
  v.normalize();
  return v;
}

void sort_pairs(std::vector<EigenPair>& pairs) {
  std::sort(pairs.begin(), pairs.end(), [](const EigenPair& a, const EigenPair& b) {
    if (a.lambda.real() != b.lambda.real()) return a.lambda.real() < b.lambda.real();
    return a.lambda.imag() < b.lambda.imag();
  });
}

}  // namespace

double residual(const ReducedSystem& sys, Complex lambda, const Eigen::VectorXcd& x) {
  if (x.size() != sys.size()) throw Error("residual: vector dimension mismatch");
  const Eigen::VectorXcd r = sys.K * x - lambda * sys.M.cast<Complex>().asDiagonal() * x;
  const double k_norm = sys.K.norm();
  const double x_norm = x.norm();
  if (k_norm == 0.0 || x_norm == 0.0) return r.norm();
  return r.norm() / (k_norm * x_norm);
}

std::vector<int> cluster_eigenvalues(const std::vector<EigenPair>& pairs, double tol) {
  std::vector<int> out(pairs.size(), 0);
  int cluster = 0;
  for (std::size_t i = 1; i < pairs.size(); ++i) {
    const double anchor = pairs[i - 1].lambda.real();
    const double here = pairs[i].lambda.real();
    if (std::abs(here - anchor) > tol * (1.0 + std::abs(here))) ++cluster;
    out[i] = cluster;
  }
  return out;
}

SpectrumResult dense_reference_eig(const ReducedSystem& sys) {
  SolveOptions all;
  all.count = 0;
  return dense_reference_eig(sys, all);
}

SpectrumResult dense_reference_eig(const ReducedSystem& sys, const SolveOptions& opts) {
  const int n = sys.size();
  if (n > 4000) throw Error("dense_reference_eig: dimension cap (4000) exceeded");
  Eigen::VectorXd dinv(n);
  for (int i = 0; i < n; ++i) dinv(i) = 1.0 / std::sqrt(sys.M(i));

  Matrix B = Matrix(sys.K) ;
  for (int r = 0; r < n; ++r) B.row(r) *= dinv(r);
  for (int c = 0; c < n; ++c) B.col(c) *= dinv(c);

  Eigen::ComplexEigenSolver<Matrix> eig(B, /*computeEigenvectors=*/true);
  if (eig.info() != Eigen::Success) throw Error("dense eigensolver failed");

  SpectrumResult result;
  result.mode_label = sys.mode_label;
  result.symmetry_defect = sys.symmetry_defect;
  result.cluster_tol = opts.cluster_tol;
  for (int i = 0; i < n; ++i) {
    EigenPair p;
    p.lambda = eig.eigenvalues()(i);
    p.vector = dinv.cast<Complex>().asDiagonal() * eig.eigenvectors().col(i);
    p.vector.normalize();
    p.residual = residual(sys, p.lambda, p.vector);
    result.pairs.push_back(std::move(p));
  }
  sort_pairs(result.pairs);
  if (opts.count > 0 && opts.count < static_cast<int>(result.pairs.size())) {
    result.pairs.resize(opts.count);
  }
  result.clusters = cluster_eigenvalues(result.pairs, result.cluster_tol);
  return result;
}

SpectrumResult lowest_eigenpairs(const ReducedSystem& sys, const SolveOptions& opts) {
  const int n = sys.size();
  if (opts.count < 1) throw Error("lowest_eigenpairs: count must be >= 1");
  for (int i = 0; i < n; ++i) {
    if (!(sys.M(i) > 0.0)) throw Error("lowest_eigenpairs: mass must be positive diagonal");
  }

  // Factor K - shift * M once; reused by every Krylov step.
  SparseComplex shifted = sys.K;
  {
    std::vector<Eigen::Triplet<Complex>> diag;
    diag.reserve(n);
    for (int i = 0; i < n; ++i) diag.emplace_back(i, i, Complex(-opts.shift * sys.M(i), 0.0));
    SparseComplex D(n, n);
    D.setFromTriplets(diag.begin(), diag.end());
    shifted = SparseComplex(shifted + D);
  }
  Eigen::SparseLU<SparseComplex> lu;
  lu.analyzePattern(shifted);
  lu.factorize(shifted);
  if (lu.info() != Eigen::Success) {
    throw ShiftCollision(opts.shift, opts.shift - 0.0137 * (1.0 + std::abs(opts.shift)));
  }

  const auto apply = [&](const Eigen::VectorXcd& x) -> Eigen::VectorXcd {
    const Eigen::VectorXcd mx = sys.M.cast<Complex>().asDiagonal() * x;
    Eigen::VectorXcd y = lu.solve(mx);
    if (lu.info() != Eigen::Success) {
      throw ShiftCollision(opts.shift, opts.shift - 0.0137 * (1.0 + std::abs(opts.shift)));
    }
    return y;
  };

  const int cap = std::min<long long>(n, 50LL * opts.count);
  // Converge a few pairs beyond the request so the twin of a multiple
  // eigenvalue cannot be silently dropped by a single-vector Krylov space.
  const int target = std::min(n, opts.count + std::max(8, opts.count / 2));
  int m = std::min<int>(cap, std::max(2 * opts.count + 15, 40));

  SpectrumResult result;
  result.mode_label = sys.mode_label;
  result.symmetry_defect = sys.symmetry_defect;
  result.cluster_tol = opts.cluster_tol;

  Eigen::MatrixXcd V;     // Arnoldi basis, built incrementally
  Eigen::MatrixXcd H;     // Hessenberg
  int built = 0;          // columns of V with H filled
  V.resize(n, m + 1);
  H = Eigen::MatrixXcd::Zero(m + 1, m);
  V.col(0) = seeded_start(n, opts.seed);
  bool breakdown = false;

  while (true) {
    // Extend the Arnoldi factorization to m columns with full
    // reorthogonalization (two classical Gram-Schmidt passes).
    if (V.cols() < m + 1) {
      Eigen::MatrixXcd V2(n, m + 1);
      V2.leftCols(V.cols()) = V;
      V = std::move(V2);
      Eigen::MatrixXcd H2 = Eigen::MatrixXcd::Zero(m + 1, m);
      H2.topLeftCorner(H.rows(), H.cols()) = H;
      H = std::move(H2);
    }
    for (int j = built; j < m && !breakdown; ++j) {
      Eigen::VectorXcd w = apply(V.col(j));
      for (int pass = 0; pass < 2; ++pass) {
        const Eigen::VectorXcd coeffs = V.leftCols(j + 1).adjoint() * w;
        w -= V.leftCols(j + 1) * coeffs;
        H.col(j).head(j + 1) += coeffs;
      }
      const double h_next = w.norm();
      H(j + 1, j) = h_next;
      if (h_next < 1e-14) {
        breakdown = true;  // invariant subspace found; Ritz values are exact
        m = j + 1;
        break;
      }
      V.col(j + 1) = w / h_next;
    }
    built = m;

    // Ritz pairs of the square Hessenberg block.
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> eig(H.topLeftCorner(m, m), true);
    if (eig.info() != Eigen::Success) throw Error("Hessenberg eigensolver failed");

    std::vector<EigenPair> candidates;
    for (int i = 0; i < m; ++i) {
      const Complex theta = eig.eigenvalues()(i);
      if (std::abs(theta) < 1e-14) continue;
      EigenPair p;
      p.lambda = opts.shift + 1.0 / theta;
      if (p.lambda.real() <= opts.shift) continue;  // only above the shift
      p.vector = V.leftCols(m) * eig.eigenvectors().col(i);
      p.vector.normalize();
      p.residual = residual(sys, p.lambda, p.vector);
      p.converged = p.residual <= opts.tol;
      candidates.push_back(std::move(p));
    }
    sort_pairs(candidates);
    if (static_cast<int>(candidates.size()) > target) candidates.resize(target);

    const auto converged_through = [&candidates](int k) {
      if (static_cast<int>(candidates.size()) < k) return false;
      return std::all_of(candidates.begin(), candidates.begin() + k,
                         [](const EigenPair& p) { return p.converged; });
    };
    const bool done = converged_through(target);
    if (done || m >= cap || breakdown) {
      const bool requested_ok = converged_through(opts.count);
      if (static_cast<int>(candidates.size()) > opts.count) candidates.resize(opts.count);
      result.pairs = std::move(candidates);
      result.all_converged = requested_ok;
      break;
    }
    m = std::min<int>(cap, std::max(m + 10, static_cast<int>(m * 1.6)));
  }

  result.clusters = cluster_eigenvalues(result.pairs, result.cluster_tol);
  return result;
}

}  // namespace openbook
