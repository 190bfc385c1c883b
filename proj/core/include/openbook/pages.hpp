#pragma once

// Metric charts for pages.  Every supported chart is either a surface of
// revolution with metric ds^2 + f(s)^2 dt^2 (t periodic), a flat rectangle
// (t non-periodic), or a bare interval (the quantum-graph degenerate case).
// The per-mode reduction of -Delta is -(1/f)(f v')' + (m^2/f^2) v with
// L2 weight f(s).

#include <optional>
#include <string>
#include <variant>

#include "openbook/errors.hpp"

namespace openbook {

enum class PageEdge { s0, s1 };
enum class TransverseEdge { t0, t1 };

/// Geometry kinds.  The profile f is pinned per kind:
///   spherical cap   f(s) = R sin(s/R),  s = arc length from the pole
///   cylinder        f(s) = r
///   flat annulus    f(s) = s
///   flat rectangle  f(s) = 1, transverse coordinate of length W, non-periodic
///   interval        f(s) = 1, no transverse coordinate
struct SphericalCap {
  double radius = 1.0;
  double s0 = 0.0;
  double s1 = 1.0;
};
struct Cylinder {
  double radius = 1.0;
  double length = 1.0;
};
struct FlatAnnulus {
  double r0 = 0.0;
  double r1 = 1.0;
};
struct FlatRectangle {
  double length = 1.0;
  double width = 1.0;
};
struct Interval {
  double length = 1.0;
};

using ChartKind = std::variant<SphericalCap, Cylinder, FlatAnnulus, FlatRectangle, Interval>;

/// Measure of one parameter-edge of a chart: a full circle of given length,
/// a straight segment of given length, or a point (interval ends).
struct EdgeMeasure {
  enum class Kind { circle, segment, point } kind = Kind::point;
  double length = 0.0;
};

struct PageChart {
  std::string id;
  ChartKind kind;

  double param_start() const;
  double param_end() const;
  double param_length() const { return param_end() - param_start(); }

  bool is_interval() const { return std::holds_alternative<Interval>(kind); }
  bool is_rectangle() const { return std::holds_alternative<FlatRectangle>(kind); }
  /// Rotationally symmetric surface with a periodic angular coordinate.
  bool is_revolution() const { return !is_interval() && !is_rectangle(); }

  /// True when f vanishes at the given edge (coordinate pole).
  bool is_pole(PageEdge edge) const;
};

/// (f, f') at parameter s.  Throws when s is outside the closed interval.
std::pair<double, double> metric_profile(const PageChart& chart, double s);

/// Physical measure of the edge: 2*pi*f for revolution charts, the width for
/// rectangles, a point for intervals.
EdgeMeasure boundary_circumference(const PageChart& chart, PageEdge edge);

/// Per-mode Sturm-Liouville problem -(1/f)(f v')' + (m^2/f^2) v on
/// [s0, s1] with weight f.  Even in m by construction.
struct SLProblem {
  std::string page_id;
  int mode = 0;
  double s0 = 0.0;
  double s1 = 0.0;

  double weight(double s) const;     // f(s)
  double potential(double s) const;  // m^2 / f(s)^2

  PageChart chart;
};

/// Requires a chart with an angular coordinate and rotational symmetry.
SLProblem sl_reduce(const PageChart& chart, int mode);

}  // namespace openbook
