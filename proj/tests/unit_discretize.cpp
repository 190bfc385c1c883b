#include "openbook/discretize.hpp"

#include <cmath>
#include <random>
#include <set>

#include "doctest.h"
#include "support/test_books.hpp"

using namespace openbook;
using test_support::kPi;

namespace {

Eigen::VectorXcd ones(int n) { return Eigen::VectorXcd::Ones(n); }

}  // namespace

TEST_CASE("mode system layout invariants") {
  const OpenBookComplex book = test_support::chain_book();
  const DiscreteSystem sys = build_mode_system(book, 0, 16);

  // Two pages, 17 nodes each, two Dirichlet ends dropped: 32 unknowns.
  CHECK(sys.size() == 32);
  CHECK(sys.trace_count() == 2);

  // Mass positive on interior rows, zero on condition rows; every trace slot
  // in exactly one block.
  std::set<int> trace_indices;
  for (const auto& block : sys.blocks) {
    for (int t : block.trace_indices) CHECK(trace_indices.insert(t).second);
  }
  for (int i = 0; i < sys.size(); ++i) {
    if (trace_indices.count(i)) {
      CHECK(sys.mass(i) == 0.0);
      CHECK(sys.nodes[i].is_trace);
    } else {
      CHECK(sys.mass(i) > 0.0);
    }
  }
}

TEST_CASE("kirchhoff trace block matches the symbolic determinant") {
  // T = A + (3/(2h)) C for Kirchhoff k=2 is [[1,-1],[mu,mu]] with
  // mu = 3/(2h); det = 2 mu = 3/h.
  const double h = 1.0 / 16.0;
  const MatrixPair kir = kirchhoff_condition(2).sample(0);
  const Matrix T = kir.A + (3.0 / (2.0 * h)) * kir.C;
  CHECK(std::abs(T.determinant() - Complex(3.0 / h)) < 1e-12);

  const OpenBookComplex book = test_support::chain_book();
  const ReducedSystem red = eliminate_traces(build_mode_system(book, 0, 16));
  CHECK(red.size() == 30);
  CHECK(red.max_trace_block_condition > 0.0);
  CHECK(std::isfinite(red.max_trace_block_condition));
}

TEST_CASE("dirichlet pair gives the exact interior Dirichlet matrix") {
  // With the pair (I, 0) the traces are forced to zero and the reduced matrix
  // is identical to the decoupled interior Dirichlet blocks.
  OpenBookComplex glued = test_support::chain_book(dirichlet_condition(2));
  const ReducedSystem red = eliminate_traces(build_mode_system(glued, 0, 32));

  OpenBookComplex single;
  single.pages.push_back({"left", Interval{1.0}});
  single.boundary_tags.push_back({"left", PageEdge::s0, OuterBC::dirichlet});
  single.boundary_tags.push_back({"left", PageEdge::s1, OuterBC::dirichlet});
  const ReducedSystem page = eliminate_traces(build_mode_system(single, 0, 32));

  REQUIRE(red.size() == 2 * page.size());
  const Matrix full(red.K);
  const Matrix block(page.K);
  CHECK((full.topLeftCorner(page.size(), page.size()) - block).norm() == 0.0);
  CHECK((full.bottomRightCorner(page.size(), page.size()) - block).norm() == 0.0);
  CHECK(full.topRightCorner(page.size(), page.size()).norm() == 0.0);
  CHECK(full.bottomLeftCorner(page.size(), page.size()).norm() == 0.0);
  CHECK(red.symmetry_defect <= 1e-14);
}

TEST_CASE("neumann pair eliminates cleanly") {
  OpenBookComplex book = test_support::chain_book(neumann_condition(2));
  const ReducedSystem red = eliminate_traces(build_mode_system(book, 0, 16));
  CHECK(red.size() == 30);
  // Trace block is (3/(2h)) I, condition number 1.
  CHECK(red.max_trace_block_condition == doctest::Approx(1.0));
}

TEST_CASE("constants lie in the kernel of closed kirchhoff books") {
  const OpenBookComplex sphere = test_support::sphere_book();
  const DiscreteSystem sys = build_mode_system(sphere, 0, 64);
  const Eigen::VectorXcd residual = sys.stiffness * ones(sys.size());
  CHECK(residual.norm() < 1e-11);

  const ReducedSystem red = eliminate_traces(sys);
  CHECK((red.K * ones(red.size())).norm() < 1e-11);

  const OpenBookComplex circle = test_support::circle_book();
  const DiscreteSystem csys = build_mode_system(circle, 0, 64);
  CHECK((csys.stiffness * ones(csys.size())).norm() < 1e-11);
}

TEST_CASE("constants lie in the kernel of a closed full-2d book") {
  // All-Neumann flat book: continuity + flux across the seam keeps constants.
  OpenBookComplex book = test_support::flat_book();
  for (auto& t : book.boundary_tags) t.bc = OuterBC::neumann;
  for (auto& t : book.transverse_tags) t.bc = OuterBC::neumann;
  const DiscreteSystem sys = build_full_system(book, 12, 10);
  CHECK((sys.stiffness * ones(sys.size())).norm() < 1e-11);

  const ReducedSystem red = eliminate_traces(sys);
  CHECK((red.K * ones(red.size())).norm() < 1e-11);
}

TEST_CASE("full 2-d sphere keeps constants and collapses poles") {
  const OpenBookComplex sphere = test_support::sphere_book();
  const DiscreteSystem sys = build_full_system(sphere, 16, 12);
  // 2 pages: pole unknown + 15 rings of 12 + trace ring of 12 each.
  CHECK(sys.size() == 2 * (1 + 15 * 12 + 12));
  CHECK((sys.stiffness * ones(sys.size())).norm() < 1e-10);
  const ReducedSystem red = eliminate_traces(sys);
  CHECK((red.K * ones(red.size())).norm() < 1e-10);
}

TEST_CASE("symmetry defect behaves per condition type") {
  const OpenBookComplex dirichlet_sphere = [] {
    OpenBookComplex b = test_support::sphere_book();
    b.conditions.erase("eq");
    b.conditions.emplace("eq", dirichlet_condition(2));
    return b;
  }();
  CHECK(eliminate_traces(build_mode_system(dirichlet_sphere, 0, 100)).symmetry_defect <= 1e-14);

  // Kirchhoff gluing leaves a one-sided-stencil asymmetry that shrinks with h.
  const OpenBookComplex sphere = test_support::sphere_book();
  std::vector<double> defects;
  for (int n : {50, 100, 200, 400}) {
    defects.push_back(eliminate_traces(build_mode_system(sphere, 0, n)).symmetry_defect);
  }
  for (std::size_t i = 0; i + 1 < defects.size(); ++i) {
    CHECK(defects[i] > defects[i + 1]);
  }
  CHECK(defects.front() > 0.0);

  // The non-self-adjoint pair keeps a defect bounded away from zero.
  const OpenBookComplex bad = test_support::chain_book(test_support::nonselfadjoint_condition());
  std::vector<double> bad_defects;
  for (int n : {50, 100, 200, 400}) {
    bad_defects.push_back(eliminate_traces(build_mode_system(bad, 0, n)).symmetry_defect);
  }
  for (double d : bad_defects) CHECK(d > 1e-2);
}

TEST_CASE("singular trace blocks are surfaced, never regularized") {
  Matrix A = Matrix::Zero(2, 2);
  A(0, 0) = 1.0;
  const ConditionPair rank_deficient = ConditionPair::constant(A, Matrix::Zero(2, 2));
  const OpenBookComplex book = test_support::chain_book(rank_deficient);
  const DiscreteSystem sys = build_mode_system(book, 0, 16);
  CHECK_THROWS_AS(eliminate_traces(sys), SingularTraceBlock);
}

TEST_CASE("precondition errors") {
  const OpenBookComplex book = test_support::chain_book();
  CHECK_THROWS_AS(build_mode_system(book, 0, 4), Error);

  OpenBookComplex flat = test_support::flat_book();
  CHECK_THROWS_AS(build_mode_system(flat, 0, 32), Error);

  // Per-node conditions demand the full 2-D build.
  OpenBookComplex pernode = test_support::sphere_book();
  pernode.conditions.erase("eq");
  std::vector<MatrixPair> samples(12, kirchhoff_condition(2).sample(0));
  pernode.conditions.emplace("eq", ConditionPair::per_node(samples));
  CHECK_THROWS_AS(build_mode_system(pernode, 0, 32), Error);

  // Sample count must match the binding node count in full 2-D.
  CHECK_THROWS_AS(build_full_system(pernode, 16, 16), Error);
  const DiscreteSystem ok = build_full_system(pernode, 16, 12);
  CHECK(ok.blocks.size() == 12);

  // Interval books have no 2-D build.
  CHECK_THROWS_AS(build_full_system(test_support::chain_book(), 16, 16), Error);
}

TEST_CASE("pernode dirichlet equals constant dirichlet matrix-for-matrix") {
  OpenBookComplex constant_book = test_support::sphere_book();
  constant_book.conditions.erase("eq");
  constant_book.conditions.emplace("eq", dirichlet_condition(2));

  OpenBookComplex pernode_book = test_support::sphere_book();
  pernode_book.conditions.erase("eq");
  std::vector<MatrixPair> samples(12, dirichlet_condition(2).sample(0));
  pernode_book.conditions.emplace("eq", ConditionPair::per_node(samples));

  const DiscreteSystem a = build_full_system(constant_book, 16, 12);
  const DiscreteSystem b = build_full_system(pernode_book, 16, 12);
  CHECK((Matrix(a.stiffness) - Matrix(b.stiffness)).norm() == 0.0);
}

TEST_CASE("trace recovery satisfies the condition rows exactly") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> gauss;
  const auto check_recovery = [&](const DiscreteSystem& sys) {
    const ReducedSystem red = eliminate_traces(sys);
    Eigen::VectorXcd interior(red.size());
    for (int i = 0; i < red.size(); ++i) interior(i) = Complex(gauss(rng), gauss(rng));
    const Eigen::VectorXcd traces = red.trace_recovery * interior;

    // Scatter back into the unreduced layout and test the condition rows.
    Eigen::VectorXcd full = Eigen::VectorXcd::Zero(sys.size());
    int i_int = 0, i_tr = 0;
    std::vector<bool> is_trace(sys.size(), false);
    for (const auto& block : sys.blocks)
      for (int t : block.trace_indices) is_trace[t] = true;
    for (int i = 0; i < sys.size(); ++i) full(i) = is_trace[i] ? 0.0 : interior(i_int++);
    for (const auto& block : sys.blocks)
      for (int t : block.trace_indices) full(t) = traces(i_tr++);

    const Eigen::VectorXcd residual = sys.stiffness * full;
    double max_condition_residual = 0.0;
    for (const auto& block : sys.blocks) {
      for (int t : block.trace_indices) {
        max_condition_residual = std::max(max_condition_residual, std::abs(residual(t)));
      }
    }
    CHECK(max_condition_residual < 1e-10);
  };

  check_recovery(build_mode_system(test_support::chain_book(), 0, 32));
  check_recovery(build_mode_system(test_support::sphere_book(), 1, 32));
  check_recovery(build_mode_system(
      test_support::chain_book(test_support::nonselfadjoint_condition()), 0, 32));
  check_recovery(build_full_system(test_support::flat_book(), 12, 10));
  check_recovery(build_full_system(test_support::dumbbell_book(), 12, 10));
}

TEST_CASE("pernode kirchhoff equals constant kirchhoff matrix-for-matrix") {
  OpenBookComplex pernode_book = test_support::sphere_book();
  pernode_book.conditions.erase("eq");
  std::vector<MatrixPair> samples(12, kirchhoff_condition(2).sample(0));
  pernode_book.conditions.emplace("eq", ConditionPair::per_node(samples));

  const DiscreteSystem a = build_full_system(test_support::sphere_book(), 16, 12);
  const DiscreteSystem b = build_full_system(pernode_book, 16, 12);
  CHECK((Matrix(a.stiffness) - Matrix(b.stiffness)).norm() == 0.0);
}

TEST_CASE("reflected gluing of the flat book keeps the rectangle spectrum") {
  // Flipping one page's orientation glues the seam with a transverse
  // reflection, an isometry of the square page; the assembled operator is
  // permutation-similar, so constants stay in the all-Neumann kernel and the
  // glued Dirichlet spectrum is unchanged.
  OpenBookComplex straight = test_support::flat_book();
  OpenBookComplex reflected = test_support::flat_book();
  reflected.adjacencies[1].orientation = -1;
  CHECK(validate_complex(reflected).ok());

  const ReducedSystem rs = eliminate_traces(build_full_system(straight, 16, 16));
  const ReducedSystem rr = eliminate_traces(build_full_system(reflected, 16, 16));
  const Matrix ks(rs.K);
  const Matrix kr(rr.K);
  CHECK(ks.norm() == doctest::Approx(kr.norm()));

  // Compare the six lowest eigenvalues of both gluings.
  Eigen::VectorXd dinv_s(rs.size()), dinv_r(rr.size());
  for (int i = 0; i < rs.size(); ++i) dinv_s(i) = 1.0 / std::sqrt(rs.M(i));
  for (int i = 0; i < rr.size(); ++i) dinv_r(i) = 1.0 / std::sqrt(rr.M(i));
  Eigen::ComplexEigenSolver<Matrix> es(dinv_s.cast<Complex>().asDiagonal() * ks *
                                           dinv_s.cast<Complex>().asDiagonal(),
                                       false);
  Eigen::ComplexEigenSolver<Matrix> er(dinv_r.cast<Complex>().asDiagonal() * kr *
                                           dinv_r.cast<Complex>().asDiagonal(),
                                       false);
  std::vector<double> ls, lr;
  for (int i = 0; i < rs.size(); ++i) ls.push_back(es.eigenvalues()(i).real());
  for (int i = 0; i < rr.size(); ++i) lr.push_back(er.eigenvalues()(i).real());
  std::sort(ls.begin(), ls.end());
  std::sort(lr.begin(), lr.end());
  for (int i = 0; i < 6; ++i) {
    CHECK(std::abs(ls[i] - lr[i]) <= 1e-10 * (1.0 + std::abs(ls[i])));
  }
}

TEST_CASE("orientation flip leaves an axisymmetric spectrum matrix intact") {
  // Flipping one page's orientation on a rotationally invariant book relabels
  // angular binding nodes; the stiffness matrices are permutation-similar, so
  // row/column sums and norms agree.
  OpenBookComplex flipped = test_support::sphere_book();
  flipped.adjacencies[1].orientation = +1;
  const DiscreteSystem a = build_full_system(test_support::sphere_book(), 16, 12);
  const DiscreteSystem b = build_full_system(flipped, 16, 12);
  CHECK(a.stiffness.norm() == doctest::Approx(b.stiffness.norm()));
  CHECK((a.stiffness * ones(a.size())).norm() < 1e-10);
  CHECK((b.stiffness * ones(b.size())).norm() < 1e-10);
}
