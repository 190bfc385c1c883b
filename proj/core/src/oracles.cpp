#include "openbook/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace openbook {

namespace {
constexpr double kPi = 3.14159265358979323846;

ReferenceSpectrum from_multiset(std::map<double, int> spectrum, std::string provenance) {
  ReferenceSpectrum out;
  out.provenance = std::move(provenance);
  for (const auto& [lambda, mult] : spectrum) out.entries.push_back({lambda, mult});
  return out;
}
}  // namespace

std::vector<double> ReferenceSpectrum::flattened() const {
  std::vector<double> all;
  for (const auto& e : entries)
    for (int i = 0; i < e.multiplicity; ++i) all.push_back(e.eigenvalue);
  return all;
}

ReferenceSpectrum sphere_spectrum(int l_max, double radius) {
  if (l_max < 0 || radius <= 0.0) throw Error("sphere_spectrum: bad arguments");
  ReferenceSpectrum out;
  out.provenance = "sphere Laplace-Beltrami, l(l+1)/R^2 with multiplicity 2l+1";
  for (int l = 0; l <= l_max; ++l) {
    out.entries.push_back({static_cast<double>(l) * (l + 1) / (radius * radius), 2 * l + 1});
  }
  return out;
}

ReferenceSpectrum hemisphere_spectrum(RefBC bc, int l_max) {
  if (l_max < 0) throw Error("hemisphere_spectrum: l_max must be >= 0");
  // P_l^m vanishes at the equator iff l+m is odd, its derivative iff l+m is
  // even; count the surviving m per l.
  ReferenceSpectrum out;
  out.provenance = "unit hemisphere, parity of associated Legendre functions at the equator";
  const int want_parity = bc == RefBC::dirichlet ? 1 : 0;
  for (int l = 0; l <= l_max; ++l) {
    int mult = 0;
    for (int m = -l; m <= l; ++m) {
      if ((l + std::abs(m)) % 2 == want_parity) ++mult;
    }
    if (mult > 0) out.entries.push_back({static_cast<double>(l) * (l + 1), mult});
  }
  return out;
}

ReferenceSpectrum rectangle_spectrum(double L, double W, RefBC bc, int index_max) {
  if (L <= 0.0 || W <= 0.0 || index_max < 1) throw Error("rectangle_spectrum: bad arguments");
  const int lo = bc == RefBC::dirichlet ? 1 : 0;
  std::map<double, int> spectrum;
  for (int m = lo; m <= index_max; ++m) {
    for (int n = lo; n <= index_max; ++n) {
      const double lambda = kPi * kPi * (m * m / (L * L) + n * n / (W * W));
      spectrum[lambda] += 1;
    }
  }
  return from_multiset(std::move(spectrum),
                       "rectangle separation of variables, pi^2 (m^2/L^2 + n^2/W^2)");
}

ReferenceSpectrum interval_spectrum(const std::vector<double>& lengths,
                                    IntervalTopology topology, RefBC bc, int n_max) {
  if (lengths.empty()) throw Error("interval_spectrum: needs at least one length");
  for (double l : lengths)
    if (l <= 0.0) throw Error("interval_spectrum: lengths must be positive");
  const double total = std::accumulate(lengths.begin(), lengths.end(), 0.0);

  ReferenceSpectrum out;
  if (topology == IntervalTopology::circle) {
    out.provenance = "circle of length " + std::to_string(total) + ", (2 pi n / L)^2";
    out.entries.push_back({0.0, 1});
    for (int n = 1; n <= n_max; ++n) {
      const double w = 2.0 * kPi * n / total;
      out.entries.push_back({w * w, 2});
    }
    return out;
  }
  // Kirchhoff chain == single interval of the total length.
  out.provenance = "interval of length " + std::to_string(total);
  const int lo = bc == RefBC::dirichlet ? 1 : 0;
  for (int n = lo; n <= n_max; ++n) {
    const double w = kPi * n / total;
    out.entries.push_back({w * w, 1});
  }
  return out;
}

}  // namespace openbook
