#pragma once

// Closed-form reference spectra used by the acceptance tests.

#include <string>
#include <vector>

#include "openbook/errors.hpp"

namespace openbook {

struct ReferenceSpectrum {
  struct Entry {
    double eigenvalue;
    int multiplicity;
  };
  std::vector<Entry> entries;  // sorted by eigenvalue
  std::string provenance;

  /// Eigenvalues repeated per multiplicity, sorted.
  std::vector<double> flattened() const;
};

enum class RefBC { dirichlet, neumann };
enum class IntervalTopology { chain, circle };

/// Laplace-Beltrami spectrum of the radius-R sphere: l(l+1)/R^2 with
/// multiplicity 2l+1.
ReferenceSpectrum sphere_spectrum(int l_max, double radius = 1.0);

/// Unit hemisphere with Dirichlet or Neumann condition at the equator:
/// l(l+1) restricted by the parity of associated Legendre functions,
/// l+|m| odd (Dirichlet) or even (Neumann).
ReferenceSpectrum hemisphere_spectrum(RefBC bc, int l_max);

/// Rectangle [0,L]x[0,W]: pi^2 (m^2/L^2 + n^2/W^2), indices from 1 for
/// Dirichlet and from 0 for Neumann.
ReferenceSpectrum rectangle_spectrum(double L, double W, RefBC bc, int index_max = 12);

/// Quantum-graph references: a Kirchhoff chain of intervals equals one
/// interval of the total length; a circle of total length L has spectrum
/// (2 pi n / L)^2 with multiplicity 2 for n >= 1.
ReferenceSpectrum interval_spectrum(const std::vector<double>& lengths,
                                    IntervalTopology topology, RefBC bc, int n_max = 12);

}  // namespace openbook
