#pragma once

// Seeded matrix generators for property-style tests.

#include <random>

#include <Eigen/Dense>

#include "openbook/conditions.hpp"

namespace test_support {

inline Eigen::MatrixXcd random_complex(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXcd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = openbook::Complex(gauss(rng), gauss(rng));
  return m;
}

/// Haar-ish unitary: QR of a complex Gaussian with phase-normalized R diagonal.
inline Eigen::MatrixXcd random_unitary(int k, std::mt19937_64& rng) {
  const Eigen::MatrixXcd g = random_complex(k, k, rng);
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
  Eigen::MatrixXcd q = qr.householderQ();
  const Eigen::MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < k; ++i) {
    const openbook::Complex d = r(i, i);
    q.col(i) *= std::abs(d) > 0 ? d / std::abs(d) : 1.0;
  }
  return q;
}

/// Invertible with modest condition number (resamples until well conditioned).
inline Eigen::MatrixXcd random_invertible(int k, std::mt19937_64& rng) {
  for (;;) {
    const Eigen::MatrixXcd g = random_complex(k, k, rng);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(g);
    if (svd.singularValues()(k - 1) > 1e-2 * svd.singularValues()(0)) return g;
  }
}

}  // namespace test_support
