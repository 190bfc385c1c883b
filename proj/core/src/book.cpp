#include "openbook/book.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace openbook {

namespace {

std::string edge_name(PageEdge e) { return e == PageEdge::s0 ? "s0" : "s1"; }

bool kinds_equal(const ChartKind& a, const ChartKind& b) {
  if (a.index() != b.index()) return false;
  return std::visit(
      [&b](const auto& ca) {
        using T = std::decay_t<decltype(ca)>;
        const auto& cb = std::get<T>(b);
        if constexpr (std::is_same_v<T, SphericalCap>) {
          return ca.radius == cb.radius && ca.s0 == cb.s0 && ca.s1 == cb.s1;
        } else if constexpr (std::is_same_v<T, Cylinder>) {
          return ca.radius == cb.radius && ca.length == cb.length;
        } else if constexpr (std::is_same_v<T, FlatAnnulus>) {
          return ca.r0 == cb.r0 && ca.r1 == cb.r1;
        } else if constexpr (std::is_same_v<T, FlatRectangle>) {
          return ca.length == cb.length && ca.width == cb.width;
        } else {
          return ca.length == cb.length;
        }
      },
      a);
}

bool pairs_equal(const ConditionPair& a, const ConditionPair& b) {
  if (a.size() != b.size() || a.sample_count() != b.sample_count() ||
      a.is_constant() != b.is_constant()) {
    return false;
  }
  for (int i = 0; i < a.sample_count(); ++i) {
    if (a.sample(i).A != b.sample(i).A || a.sample(i).C != b.sample(i).C) return false;
  }
  return true;
}

}  // namespace

bool operator==(const PageChart& a, const PageChart& b) {
  return a.id == b.id && kinds_equal(a.kind, b.kind);
}
bool operator==(const Binding& a, const Binding& b) {
  return a.id == b.id && a.circumference == b.circumference;
}
bool operator==(const Adjacency& a, const Adjacency& b) {
  return a.page == b.page && a.edge == b.edge && a.binding == b.binding &&
         a.slot == b.slot && a.orientation == b.orientation;
}
bool operator==(const BoundaryTag& a, const BoundaryTag& b) {
  return a.page == b.page && a.edge == b.edge && a.bc == b.bc;
}
bool operator==(const TransverseTag& a, const TransverseTag& b) {
  return a.page == b.page && a.edge == b.edge && a.bc == b.bc;
}

bool OpenBookComplex::operator==(const OpenBookComplex& o) const {
  if (!(pages == o.pages && bindings == o.bindings && adjacencies == o.adjacencies &&
        boundary_tags == o.boundary_tags && transverse_tags == o.transverse_tags)) {
    return false;
  }
  if (conditions.size() != o.conditions.size()) return false;
  for (const auto& [id, pair] : conditions) {
    auto it = o.conditions.find(id);
    if (it == o.conditions.end() || !pairs_equal(pair, it->second)) return false;
  }
  return true;
}

const PageChart* OpenBookComplex::find_page(const std::string& id) const {
  for (const auto& p : pages)
    if (p.id == id) return &p;
  return nullptr;
}

const Binding* OpenBookComplex::find_binding(const std::string& id) const {
  for (const auto& b : bindings)
    if (b.id == id) return &b;
  return nullptr;
}

std::vector<Adjacency> OpenBookComplex::binding_slots(const std::string& binding_id) const {
  std::vector<Adjacency> slots;
  for (const auto& a : adjacencies)
    if (a.binding == binding_id) slots.push_back(a);
  std::sort(slots.begin(), slots.end(),
            [](const Adjacency& x, const Adjacency& y) { return x.slot < y.slot; });
  return slots;
}

std::optional<OuterBC> OpenBookComplex::outer_tag(const std::string& page_id,
                                                  PageEdge edge) const {
  for (const auto& t : boundary_tags)
    if (t.page == page_id && t.edge == edge) return t.bc;
  return std::nullopt;
}

std::optional<OuterBC> OpenBookComplex::transverse_tag(const std::string& page_id,
                                                       TransverseEdge edge) const {
  for (const auto& t : transverse_tags)
    if (t.page == page_id && t.edge == edge) return t.bc;
  return std::nullopt;
}

const Adjacency* OpenBookComplex::attachment(const std::string& page_id, PageEdge edge) const {
  for (const auto& a : adjacencies)
    if (a.page == page_id && a.edge == edge) return &a;
  return nullptr;
}

int binding_degree(const OpenBookComplex& book, const std::string& binding_id) {
  if (!book.find_binding(binding_id)) throw Error("unknown binding '" + binding_id + "'");
  int k = 0;
  for (const auto& a : book.adjacencies)
    if (a.binding == binding_id) ++k;
  return k;
}

ValidationReport validate_complex(const OpenBookComplex& book) {
  ValidationReport report;
  auto flag = [&report](std::string msg, std::vector<std::string> ids) {
    report.entries.push_back({std::move(msg), std::move(ids)});
  };

  std::set<std::string> page_ids;
  for (const auto& p : book.pages) {
    if (!page_ids.insert(p.id).second) flag("duplicate page id", {p.id});
    // Profile must be positive on the open interval.
    if (const auto* cap = std::get_if<SphericalCap>(&p.kind)) {
      const double pi_r = 3.14159265358979323846 * cap->radius;
      if (cap->radius <= 0.0) flag("cap radius must be positive", {p.id});
      if (!(cap->s0 >= 0.0 && cap->s0 < cap->s1 && cap->s1 <= pi_r * (1.0 + 1e-12))) {
        flag("cap parameter range must satisfy 0 <= s0 < s1 <= pi*R", {p.id});
      }
    } else if (const auto* cyl = std::get_if<Cylinder>(&p.kind)) {
      if (cyl->radius <= 0.0 || cyl->length <= 0.0)
        flag("cylinder radius and length must be positive", {p.id});
    } else if (const auto* ann = std::get_if<FlatAnnulus>(&p.kind)) {
      if (!(ann->r0 >= 0.0 && ann->r0 < ann->r1))
        flag("annulus radial range must satisfy 0 <= r0 < r1", {p.id});
    } else if (const auto* rect = std::get_if<FlatRectangle>(&p.kind)) {
      if (rect->length <= 0.0 || rect->width <= 0.0)
        flag("rectangle length and width must be positive", {p.id});
    } else if (const auto* iv = std::get_if<Interval>(&p.kind)) {
      if (iv->length <= 0.0) flag("interval length must be positive", {p.id});
    }
  }

  std::set<std::string> binding_ids;
  for (const auto& b : book.bindings) {
    if (!binding_ids.insert(b.id).second) flag("duplicate binding id", {b.id});
    if (!b.is_point() && *b.circumference <= 0.0)
      flag("binding circumference must be positive", {b.id});
  }

  // Pages cannot mix dimensions: point bindings pair with interval pages only.
  bool has_interval = false, has_surface = false;
  for (const auto& p : book.pages) (p.is_interval() ? has_interval : has_surface) = true;
  if (has_interval && has_surface)
    flag("book mixes interval pages with two-dimensional pages", {});

  // Each page edge is attached at most once, and never both attached and tagged.
  std::set<std::pair<std::string, int>> used_edges;
  for (const auto& a : book.adjacencies) {
    const PageChart* page = book.find_page(a.page);
    if (!page) {
      flag("adjacency references unknown page", {a.page});
      continue;
    }
    if (!book.find_binding(a.binding)) {
      flag("adjacency references unknown binding", {a.binding});
      continue;
    }
    if (a.orientation != 1 && a.orientation != -1)
      flag("orientation must be +1 or -1", {a.page, a.binding});
    const auto key = std::make_pair(a.page, static_cast<int>(a.edge));
    if (!used_edges.insert(key).second)
      flag("page edge attached more than once", {a.page, edge_name(a.edge)});
    if (page->is_pole(a.edge))
      flag("pole edge cannot attach to a binding", {a.page, a.binding});
  }
  for (const auto& t : book.boundary_tags) {
    const PageChart* page = book.find_page(t.page);
    if (!page) {
      flag("boundary tag references unknown page", {t.page});
      continue;
    }
    const auto key = std::make_pair(t.page, static_cast<int>(t.edge));
    if (used_edges.count(key))
      flag("edge carries both a binding and an outer tag", {t.page, edge_name(t.edge)});
    if (t.bc == OuterBC::pole && !page->is_pole(t.edge))
      flag("pole tag on an edge where the profile does not vanish",
           {t.page, edge_name(t.edge)});
    if (t.bc != OuterBC::pole && page->is_pole(t.edge))
      flag("pole edge must carry the pole-regularity tag", {t.page, edge_name(t.edge)});
  }

  // Every edge is either attached or tagged.
  for (const auto& p : book.pages) {
    for (PageEdge e : {PageEdge::s0, PageEdge::s1}) {
      const bool attached = used_edges.count({p.id, static_cast<int>(e)}) > 0;
      const bool tagged = book.outer_tag(p.id, e).has_value();
      if (!attached && !tagged)
        flag("page edge is neither attached nor tagged", {p.id, edge_name(e)});
    }
    if (p.is_rectangle()) {
      for (TransverseEdge e : {TransverseEdge::t0, TransverseEdge::t1}) {
        const auto tag = p.is_rectangle() ? book.transverse_tag(p.id, e) : std::nullopt;
        if (!tag) {
          flag("rectangle transverse edge needs an outer tag",
               {p.id, e == TransverseEdge::t0 ? "t0" : "t1"});
        } else if (*tag == OuterBC::pole) {
          flag("transverse edges cannot be poles", {p.id});
        }
      }
    } else {
      for (const auto& t : book.transverse_tags)
        if (t.page == p.id) flag("transverse tag on a non-rectangle page", {p.id});
    }
  }

  // Per-binding checks: degree, slot order, metric compatibility, conditions.
  for (const auto& b : book.bindings) {
    auto slots = book.binding_slots(b.id);
    const int k = static_cast<int>(slots.size());
    if (k < 1) {
      flag("binding has no adjacent pages", {b.id});
      continue;
    }
    for (int i = 0; i < k; ++i) {
      if (slots[i].slot != i) {
        flag("slot indices must be exactly 0..degree-1", {b.id});
        break;
      }
    }

    std::optional<EdgeMeasure::Kind> shared_kind;
    for (const auto& a : slots) {
      const PageChart* page = book.find_page(a.page);
      if (!page) continue;
      const EdgeMeasure measure = boundary_circumference(*page, a.edge);
      if (shared_kind && *shared_kind != measure.kind)
        flag("adjacent pages disagree on the binding's topology", {b.id, a.page});
      shared_kind = measure.kind;
      if (b.is_point()) {
        if (measure.kind != EdgeMeasure::Kind::point)
          flag("point binding attached to a page edge with positive length",
               {b.id, a.page});
      } else if (measure.kind == EdgeMeasure::Kind::point) {
        flag("interval page attached to a binding with positive circumference",
             {b.id, a.page});
      } else {
        const double want = *b.circumference;
        if (std::abs(measure.length - want) > kCircumferenceTol * std::max(1.0, want))
          flag("circumference mismatch at binding " + b.id, {b.id, a.page});
      }
    }

    auto cond = book.conditions.find(b.id);
    if (cond == book.conditions.end()) {
      flag("binding has no condition pair", {b.id});
    } else if (cond->second.size() != k) {
      flag("condition size mismatch", {b.id});
    }
  }
  for (const auto& [id, pair] : book.conditions) {
    if (!book.find_binding(id)) flag("condition references unknown binding", {id});
  }

  return report;
}

}  // namespace openbook
