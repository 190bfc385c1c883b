#pragma once

// Finite-volume discretization on a vertex grid: unknowns sit at the nodes
// s_i = s0 + i*h of each page, each interior unknown owning the dual cell
// [s_i - h/2, s_i + h/2] with Riemannian volume as its mass entry.  Binding
// edges keep their face node as an explicit trace unknown whose row is the
// condition equation A u|_B + C D_h u = 0, with the outward derivative
// D_h u = (3 u_B - 4 u_1 + u_2)/(2h) taken one-sided into the page.
// eliminate_traces() then removes the trace slots by a block Schur step.

#include <string>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "openbook/book.hpp"

namespace openbook {

using SparseComplex = Eigen::SparseMatrix<Complex>;

/// Location of one unknown, kept for eigenfunction export.
struct NodeInfo {
  std::string page;  // page id; for trace slots the page the trace belongs to
  double s = 0.0;
  double t = 0.0;
  bool is_trace = false;
};

struct DiscreteSystem {
  SparseComplex stiffness;  // square; interior rows are flux balances,
                            // trace rows are condition equations
  Eigen::VectorXd mass;     // diagonal; > 0 on interior rows, 0 on trace rows
  std::vector<NodeInfo> nodes;

  /// One group of condition rows: the k traces of one binding node.
  struct TraceBlock {
    std::string binding;
    std::vector<int> trace_indices;  // slot order; also the condition row indices
    std::vector<double> page_h;      // grid spacing of the page behind each slot
  };
  std::vector<TraceBlock> blocks;

  std::string mode_label;  // "m=<n>", "1d", or "full2d"
  double resolution = 0.0;  // max grid spacing over pages

  int size() const { return static_cast<int>(mass.size()); }
  int trace_count() const;
  int interior_count() const { return size() - trace_count(); }
};

struct ReducedSystem {
  SparseComplex K;
  Eigen::VectorXd M;  // positive diagonal
  /// ||S - S^*||_F / ||S||_F for S = M^{-1/2} K M^{-1/2}; the discrete shadow
  /// of the integration-by-parts boundary term.  Exactly 0 for decoupling
  /// conditions; for one-sided binding closures the ratio shrinks under
  /// refinement, so condition types are compared across a fixed grid study.
  double symmetry_defect = 0.0;
  /// Worst condition number among the eliminated trace blocks.
  double max_trace_block_condition = 0.0;

  std::vector<NodeInfo> nodes;        // interior nodes
  SparseComplex trace_recovery;       // x_trace = trace_recovery * x_interior
  std::vector<NodeInfo> trace_nodes;  // slot-ordered, grouped per binding node

  std::string mode_label;
  double resolution = 0.0;

  int size() const { return static_cast<int>(M.size()); }
};

/// One-dimensional weighted system for angular mode m (ignored for interval
/// pages).  Requires rotationally symmetric pages, constant-sampled
/// conditions, and nodes_per_page >= 8.
DiscreteSystem build_mode_system(const OpenBookComplex& book, int mode, int nodes_per_page);

/// Tensor-grid system over all pages with n_s cells along the parameter and
/// n_t angular cells; binding nodes of adjacent pages are aligned by the
/// orientation sign.  PerNode conditions must carry exactly one sample per
/// binding node.
DiscreteSystem build_full_system(const OpenBookComplex& book, int n_s, int n_t);

/// Schur elimination of the trace slots.  Throws SingularTraceBlock when a
/// k x k trace-coefficient block A + (3/(2h)) C is numerically singular.
ReducedSystem eliminate_traces(const DiscreteSystem& sys);

/// Recompute the relative Frobenius asymmetry of the reduced operator.
double symmetry_defect(const ReducedSystem& sys);

}  // namespace openbook
