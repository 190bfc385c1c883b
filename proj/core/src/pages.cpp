#include "openbook/pages.hpp"

#include <cmath>

namespace openbook {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;

struct ParamRange {
  double lo, hi;
};

ParamRange range_of(const ChartKind& kind) {
  return std::visit(
      [](const auto& c) -> ParamRange {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, SphericalCap>) return {c.s0, c.s1};
        if constexpr (std::is_same_v<T, Cylinder>) return {0.0, c.length};
        if constexpr (std::is_same_v<T, FlatAnnulus>) return {c.r0, c.r1};
        if constexpr (std::is_same_v<T, FlatRectangle>) return {0.0, c.length};
        if constexpr (std::is_same_v<T, Interval>) return {0.0, c.length};
      },
      kind);
}

}  // namespace

double PageChart::param_start() const { return range_of(kind).lo; }
double PageChart::param_end() const { return range_of(kind).hi; }

bool PageChart::is_pole(PageEdge edge) const {
  const double s = edge == PageEdge::s0 ? param_start() : param_end();
  if (const auto* cap = std::get_if<SphericalCap>(&kind)) {
    const double f = cap->radius * std::sin(s / cap->radius);
    return std::abs(f) <= 1e-14 * cap->radius;
  }
  if (std::holds_alternative<FlatAnnulus>(kind)) return s == 0.0;
  return false;
}

std::pair<double, double> metric_profile(const PageChart& chart, double s) {
  const ParamRange r = range_of(chart.kind);
  const double slack = 1e-12 * (1.0 + std::abs(r.hi - r.lo));
  if (s < r.lo - slack || s > r.hi + slack) {
    throw Error("parameter s = " + std::to_string(s) + " outside chart '" + chart.id + "'");
  }
  return std::visit(
      [s](const auto& c) -> std::pair<double, double> {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, SphericalCap>) {
          return {c.radius * std::sin(s / c.radius), std::cos(s / c.radius)};
        }
        if constexpr (std::is_same_v<T, Cylinder>) return {c.radius, 0.0};
        if constexpr (std::is_same_v<T, FlatAnnulus>) return {s, 1.0};
        if constexpr (std::is_same_v<T, FlatRectangle>) return {1.0, 0.0};
        if constexpr (std::is_same_v<T, Interval>) return {1.0, 0.0};
      },
      chart.kind);
}

EdgeMeasure boundary_circumference(const PageChart& chart, PageEdge edge) {
  if (chart.is_interval()) return {EdgeMeasure::Kind::point, 0.0};
  const double s = edge == PageEdge::s0 ? chart.param_start() : chart.param_end();
  if (const auto* rect = std::get_if<FlatRectangle>(&chart.kind)) {
    return {EdgeMeasure::Kind::segment, rect->width};
  }
  return {EdgeMeasure::Kind::circle, kTwoPi * metric_profile(chart, s).first};
}

double SLProblem::weight(double s) const { return metric_profile(chart, s).first; }

double SLProblem::potential(double s) const {
  const double f = metric_profile(chart, s).first;
  return static_cast<double>(mode) * static_cast<double>(mode) / (f * f);
}

SLProblem sl_reduce(const PageChart& chart, int mode) {
  if (chart.is_interval()) {
    throw Error("chart '" + chart.id + "' is an interval; no angular reduction exists");
  }
  if (!chart.is_revolution()) {
    throw Error("chart '" + chart.id + "' has no rotational symmetry");
  }
  SLProblem p;
  p.page_id = chart.id;
  p.mode = std::abs(mode);  // spectrum is even in m
  p.s0 = chart.param_start();
  p.s1 = chart.param_end();
  p.chart = chart;
  return p;
}

}  // namespace openbook
