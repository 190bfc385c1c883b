#pragma once

// The open-book complex: pages, bindings, adjacency with explicit slot order
// and orientation, outer boundary tags, and per-binding condition pairs.
// Immutable after construction; validation reports problems, it never throws.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "openbook/conditions.hpp"
#include "openbook/pages.hpp"

namespace openbook {

/// A closed binding circle with its arc length, or a point binding in the
/// quantum-graph case.
struct Binding {
  std::string id;
  /// Unset for a point binding.
  std::optional<double> circumference;

  bool is_point() const { return !circumference.has_value(); }
};

/// One attachment of a page edge to a binding.  The slot index is the
/// row/column index of this page in the binding's condition matrices; slot
/// order is declared explicitly, never inferred.
struct Adjacency {
  std::string page;
  PageEdge edge = PageEdge::s0;
  std::string binding;
  int slot = 0;
  int orientation = +1;  // sign aligning the angular coordinate with the binding's
};

enum class OuterBC { dirichlet, neumann, pole };

/// Outer tag of an unattached page edge.
struct BoundaryTag {
  std::string page;
  PageEdge edge = PageEdge::s0;
  OuterBC bc = OuterBC::dirichlet;
};

/// Outer tag of a rectangle's transverse edge (t = 0 or t = W).
struct TransverseTag {
  std::string page;
  TransverseEdge edge = TransverseEdge::t0;
  OuterBC bc = OuterBC::dirichlet;
};

struct ValidationEntry {
  std::string message;
  /// Ids involved, for positioning diagnostics in file-based front ends.
  std::vector<std::string> ids;
};

struct ValidationReport {
  std::vector<ValidationEntry> entries;
  bool ok() const { return entries.empty(); }
};

struct OpenBookComplex {
  std::vector<PageChart> pages;
  std::vector<Binding> bindings;
  std::vector<Adjacency> adjacencies;
  std::vector<BoundaryTag> boundary_tags;
  std::vector<TransverseTag> transverse_tags;
  std::map<std::string, ConditionPair> conditions;

  const PageChart* find_page(const std::string& id) const;
  const Binding* find_binding(const std::string& id) const;
  /// Adjacencies of one binding ordered by slot.  Requires a valid book.
  std::vector<Adjacency> binding_slots(const std::string& binding_id) const;
  std::optional<OuterBC> outer_tag(const std::string& page_id, PageEdge edge) const;
  std::optional<OuterBC> transverse_tag(const std::string& page_id, TransverseEdge edge) const;
  const Adjacency* attachment(const std::string& page_id, PageEdge edge) const;

  bool operator==(const OpenBookComplex&) const;
};

bool operator==(const Binding&, const Binding&);
bool operator==(const Adjacency&, const Adjacency&);
bool operator==(const BoundaryTag&, const BoundaryTag&);
bool operator==(const TransverseTag&, const TransverseTag&);
bool operator==(const PageChart&, const PageChart&);

/// Checks every structural and metric invariant; all problems are report
/// entries, never exceptions.  Idempotent and side-effect free.
ValidationReport validate_complex(const OpenBookComplex& book);

/// k_j: the number of adjacency records referencing the binding.
/// Throws on an unknown id.
int binding_degree(const OpenBookComplex& book, const std::string& binding_id);

/// Relative tolerance for the binding-circumference compatibility check.
inline constexpr double kCircumferenceTol = 1e-10;

}  // namespace openbook
