// Command-line front end: validate | spectrum | convergence | export.
// All diagnostics go to stdout; failures print a machine-readable line
// prefixed "error:" and exit nonzero.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "openbook/bookfile.hpp"
#include "openbook/discretize.hpp"
#include "openbook/eigensolve.hpp"

namespace {

using namespace openbook;

std::string fmt(double v) {
  if (v == 0.0) v = 0.0;  // drop the sign of negative zero
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_short(double v) {
  if (v == 0.0) v = 0.0;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string matrix_literal(const Matrix& m) {
  std::string out = "[";
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) {
      if (i != 0 || j != 0) out += ",";
      out += "[" + fmt_short(m(i, j).real()) + "," + fmt_short(m(i, j).imag()) + "]";
    }
  }
  return out + "]";
}

struct CommonFlags {
  std::optional<std::string> modes;
  bool full2d = false;
  std::optional<std::string> grid;
  std::optional<int> nodes;
  std::optional<int> count;
  std::optional<double> tol;
  std::optional<double> shift;
  std::optional<std::uint64_t> seed;
  std::optional<double> cluster_tol;
  std::string dump_matrices;
  std::string csv;
  int export_index = 0;
};

void add_solver_flags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--modes", flags.modes, "Angular mode range m0..m1");
  cmd->add_flag("--full2d", flags.full2d, "Tensor-grid build instead of mode reduction");
  cmd->add_option("--grid", flags.grid, "Full 2-D grid NSxNT");
  cmd->add_option("--nodes", flags.nodes, "Nodes per page for mode systems");
  cmd->add_option("--count", flags.count, "Number of eigenpairs");
  cmd->add_option("--tol", flags.tol, "Residual tolerance");
  cmd->add_option("--shift", flags.shift, "Shift-invert target");
  cmd->add_option("--seed", flags.seed, "Start-vector seed");
  cmd->add_option("--cluster-tol", flags.cluster_tol, "Multiplicity cluster tolerance");
  cmd->add_option("--dump-matrices", flags.dump_matrices,
                  "Write reduced K and M in coordinate format to PATH.K.coo / PATH.M.coo");
  cmd->add_option("--csv", flags.csv, "Write results as CSV");
}

SolverSettings apply_flags(SolverSettings s, const CommonFlags& f) {
  if (f.modes) {
    const auto dots = f.modes->find("..");
    if (dots == std::string::npos) throw Error("--modes must look like a..b");
    s.mode_min = std::stoi(f.modes->substr(0, dots));
    s.mode_max = std::stoi(f.modes->substr(dots + 2));
    if (s.mode_min > s.mode_max) throw Error("--modes range is empty");
  }
  if (f.full2d) s.full2d = true;
  if (f.grid) {
    const auto x = f.grid->find('x');
    if (x == std::string::npos) throw Error("--grid must look like NSxNT");
    s.grid_ns = std::stoi(f.grid->substr(0, x));
    s.grid_nt = std::stoi(f.grid->substr(x + 1));
  }
  if (f.nodes) s.nodes = *f.nodes;
  if (f.count) s.count = *f.count;
  if (f.tol) s.tol = *f.tol;
  if (f.shift) s.shift = *f.shift;
  if (f.seed) s.seed = *f.seed;
  if (f.cluster_tol) s.cluster_tol = *f.cluster_tol;
  return s;
}

ParsedBook load(const std::string& path) {
  std::ifstream in(path);
  if (!in.good()) throw Error("cannot open '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  try {
    return parse_book_file(text.str());
  } catch (const ParseError& e) {
    throw Error(path + ":" + e.what());
  }
}

bool is_interval_book(const OpenBookComplex& book) {
  for (const auto& p : book.pages)
    if (!p.is_interval()) return false;
  return !book.pages.empty();
}

SolveOptions solve_options(const SolverSettings& s) {
  SolveOptions o;
  o.count = s.count;
  o.tol = s.tol;
  o.shift = s.shift;
  o.seed = s.seed;
  o.cluster_tol = s.cluster_tol;
  return o;
}

SpectrumResult solve_with_retry(const ReducedSystem& sys, SolveOptions opts) {
  try {
    return lowest_eigenpairs(sys, opts);
  } catch (const ShiftCollision& e) {
    std::cout << "note: " << e.what() << "\n";
    opts.shift = e.suggested_shift;
    return lowest_eigenpairs(sys, opts);
  }
}

struct SolveOutput {
  SpectrumResult merged;
  std::vector<ReducedSystem> systems;       // one per solved mode (or one for full2d/1d)
  std::vector<int> system_of_pair;          // index into systems per merged pair
  std::vector<int> index_in_system;         // eigenpair index within its system result
  std::vector<SpectrumResult> per_system;
};

/// Build, eliminate, and solve per the settings; merge mode systems into one
/// sorted spectrum.  Identical |m| systems are solved once and tagged twice;
/// distinct mode systems are independent and solved concurrently.
SolveOutput run_solver(const OpenBookComplex& book, const SolverSettings& s) {
  SolveOutput out;
  const SolveOptions opts = solve_options(s);

  std::vector<int> modes;
  if (s.full2d || is_interval_book(book)) {
    modes.push_back(0);
  } else {
    for (int m = s.mode_min; m <= s.mode_max; ++m) modes.push_back(m);
  }

  std::vector<int> distinct;  // |m| values to solve, in order
  std::map<int, int> system_of_abs;
  for (int m : modes) {
    const int key = s.full2d ? -1 : std::abs(m);
    if (!system_of_abs.count(key)) {
      system_of_abs.emplace(key, static_cast<int>(distinct.size()));
      distinct.push_back(key);
    }
  }

  out.systems.resize(distinct.size());
  out.per_system.resize(distinct.size());
  std::vector<std::future<void>> jobs;
  for (std::size_t i = 0; i < distinct.size(); ++i) {
    jobs.push_back(std::async(std::launch::async, [&, i] {
      DiscreteSystem disc = s.full2d ? build_full_system(book, s.grid_ns, s.grid_nt)
                                     : build_mode_system(book, distinct[i], s.nodes);
      out.systems[i] = eliminate_traces(disc);
      out.per_system[i] = solve_with_retry(out.systems[i], opts);
    }));
  }
  for (auto& j : jobs) j.get();

  struct Tagged {
    EigenPair pair;
    int system;
    int index;
  };
  std::vector<Tagged> all;
  double defect = 0.0;
  for (int m : modes) {
    const int sys_index = system_of_abs.at(s.full2d ? -1 : std::abs(m));
    defect = std::max(defect, out.systems[sys_index].symmetry_defect);
    const SpectrumResult& r = out.per_system[sys_index];
    for (std::size_t i = 0; i < r.pairs.size(); ++i) {
      Tagged t{r.pairs[i], sys_index, static_cast<int>(i)};
      t.pair.mode_tag = m;
      all.push_back(std::move(t));
    }
  }

  std::sort(all.begin(), all.end(), [](const Tagged& a, const Tagged& b) {
    return a.pair.lambda.real() < b.pair.lambda.real();
  });
  if (static_cast<int>(all.size()) > s.count) all.resize(s.count);

  out.merged.mode_label = s.full2d ? "full2d" : "modes";
  out.merged.symmetry_defect = defect;
  out.merged.cluster_tol = s.cluster_tol;
  out.merged.all_converged = true;
  for (auto& t : all) {
    out.merged.all_converged &= t.pair.converged;
    out.merged.pairs.push_back(std::move(t.pair));
    out.system_of_pair.push_back(t.system);
    out.index_in_system.push_back(t.index);
  }
  out.merged.clusters = cluster_eigenvalues(out.merged.pairs, s.cluster_tol);
  return out;
}

void dump_coordinate(const std::string& base, const ReducedSystem& sys) {
  std::ofstream k(base + ".K.coo");
  k << "# rows cols nnz\n# " << sys.size() << " " << sys.size() << " " << sys.K.nonZeros()
    << "\n";
  for (int c = 0; c < sys.K.outerSize(); ++c) {
    for (SparseComplex::InnerIterator it(sys.K, c); it; ++it) {
      k << it.row() << " " << c << " " << fmt(it.value().real()) << " "
        << fmt(it.value().imag()) << "\n";
    }
  }
  std::ofstream m(base + ".M.coo");
  m << "# rows cols nnz\n# " << sys.size() << " " << sys.size() << " " << sys.size() << "\n";
  for (int i = 0; i < sys.size(); ++i) {
    m << i << " " << i << " " << fmt(sys.M(i)) << " 0\n";
  }
  std::cout << "wrote " << base << ".K.coo and " << base << ".M.coo\n";
}

int cmd_validate(const std::string& path) {
  const ParsedBook parsed = load(path);
  std::cout << "book: " << parsed.book.pages.size() << " pages, "
            << parsed.book.bindings.size() << " bindings, "
            << parsed.book.adjacencies.size() << " attachments\n";

  int failures = 0;
  for (const auto& line : positioned_validation(parsed)) {
    std::cout << "error: " << line << "\n";
    ++failures;
  }

  for (const auto& binding : parsed.book.bindings) {
    auto it = parsed.book.conditions.find(binding.id);
    if (it == parsed.book.conditions.end()) continue;
    const ConditionReport report = analyze(it->second);
    std::cout << "binding " << binding.id << ": degree "
              << binding_degree(parsed.book, binding.id) << ", rank " << report.rank
              << ", elliptic " << (report.elliptic ? "yes" : "no")
              << ", selfadjoint defect " << fmt_short(report.selfadjoint_defect);
    if (report.canonical) {
      std::cout << ", U = " << matrix_literal(report.canonical->U);
      if (!it->second.is_constant()) {
        std::cout << ", sample variation " << fmt_short(report.sample_variation);
      }
    }
    std::cout << "\n";
    if (!report.elliptic) {
      std::cout << "error: binding " << binding.id << ": ellipticity violated";
      if (report.violating_lambda) {
        std::cout << " at lambda = " << fmt_short(*report.violating_lambda);
      } else {
        std::cout << " (identically singular pencil)";
      }
      std::cout << "\n";
      ++failures;
    }
  }
  if (failures == 0) std::cout << "ok\n";
  return failures == 0 ? 0 : 1;
}

int cmd_spectrum(const std::string& path, const CommonFlags& flags) {
  const ParsedBook parsed = load(path);
  if (!parsed.validation.ok()) {
    for (const auto& line : positioned_validation(parsed)) std::cout << "error: " << line << "\n";
    return 1;
  }
  const SolverSettings settings = apply_flags(parsed.settings, flags);
  const SolveOutput out = run_solver(parsed.book, settings);

  std::cout << "# index  eigenvalue_re  eigenvalue_im  residual  cluster  mode  sym_defect\n";
  for (std::size_t i = 0; i < out.merged.pairs.size(); ++i) {
    const EigenPair& p = out.merged.pairs[i];
    std::printf("%6zu  %+.10e  %+.3e  %.3e  %4d  %+3d  %.3e\n", i, p.lambda.real(),
                p.lambda.imag(), p.residual, out.merged.clusters[i], p.mode_tag,
                out.merged.symmetry_defect);
  }

  if (!flags.csv.empty()) {
    std::ofstream csv(flags.csv);
    csv << "index,eigenvalue_re,eigenvalue_im,residual,cluster,mode,symmetry_defect\n";
    for (std::size_t i = 0; i < out.merged.pairs.size(); ++i) {
      const EigenPair& p = out.merged.pairs[i];
      csv << i << "," << fmt(p.lambda.real()) << "," << fmt(p.lambda.imag()) << ","
          << fmt(p.residual) << "," << out.merged.clusters[i] << "," << p.mode_tag << ","
          << fmt(out.merged.symmetry_defect) << "\n";
    }
    std::cout << "wrote " << flags.csv << "\n";
  }
  if (!flags.dump_matrices.empty()) {
    for (std::size_t i = 0; i < out.systems.size(); ++i) {
      const std::string base = out.systems.size() == 1
                                   ? flags.dump_matrices
                                   : flags.dump_matrices + "." + out.systems[i].mode_label;
      dump_coordinate(base, out.systems[i]);
    }
  }
  if (!out.merged.all_converged) {
    std::cout << "error: eigensolver did not converge for every requested pair\n";
    return 1;
  }
  return 0;
}

int cmd_convergence(const std::string& path, const CommonFlags& flags) {
  const ParsedBook parsed = load(path);
  if (!parsed.validation.ok()) {
    for (const auto& line : positioned_validation(parsed)) std::cout << "error: " << line << "\n";
    return 1;
  }
  const SolverSettings base = apply_flags(parsed.settings, flags);

  std::vector<std::vector<double>> levels;
  for (int refine = 0; refine < 3; ++refine) {
    SolverSettings s = base;
    const int factor = 1 << refine;
    s.nodes = base.nodes * factor;
    s.grid_ns = base.grid_ns * factor;
    s.grid_nt = base.grid_nt * factor;
    const SolveOutput out = run_solver(parsed.book, s);
    std::vector<double> vals;
    for (const auto& p : out.merged.pairs) vals.push_back(p.lambda.real());
    levels.push_back(std::move(vals));
  }

  const std::size_t n =
      std::min({levels[0].size(), levels[1].size(), levels[2].size()});
  std::cout << "# index  coarse  medium  fine  observed_order\n";
  for (std::size_t i = 0; i < n; ++i) {
    const double d1 = std::abs(levels[0][i] - levels[1][i]);
    const double d2 = std::abs(levels[1][i] - levels[2][i]);
    std::string order = "-";
    if (d2 > 1e-14 * (1.0 + std::abs(levels[2][i]))) {
      order = fmt_short(std::log2(d1 / d2));
    }
    std::printf("%6zu  %.10e  %.10e  %.10e  %s\n", i, levels[0][i], levels[1][i], levels[2][i],
                order.c_str());
  }
  return 0;
}

int cmd_export(const std::string& path, const CommonFlags& flags) {
  const ParsedBook parsed = load(path);
  if (!parsed.validation.ok()) {
    for (const auto& line : positioned_validation(parsed)) std::cout << "error: " << line << "\n";
    return 1;
  }
  const SolverSettings settings = apply_flags(parsed.settings, flags);
  const SolveOutput out = run_solver(parsed.book, settings);
  if (flags.export_index < 0 ||
      flags.export_index >= static_cast<int>(out.merged.pairs.size())) {
    std::cout << "error: eigenfunction index out of range\n";
    return 1;
  }
  const int sys_id = out.system_of_pair[flags.export_index];
  const ReducedSystem& sys = out.systems[sys_id];
  const EigenPair& pair = out.merged.pairs[flags.export_index];

  const Eigen::VectorXcd traces = sys.trace_recovery * pair.vector;
  std::ostream* dest = &std::cout;
  std::ofstream file;
  if (!flags.csv.empty()) {
    file.open(flags.csv);
    dest = &file;
  }
  *dest << "page,s,t,u_re,u_im\n";
  for (int i = 0; i < sys.size(); ++i) {
    const NodeInfo& n = sys.nodes[i];
    *dest << n.page << "," << fmt(n.s) << "," << fmt(n.t) << "," << fmt(pair.vector(i).real())
          << "," << fmt(pair.vector(i).imag()) << "\n";
  }
  for (int i = 0; i < traces.size(); ++i) {
    const NodeInfo& n = sys.trace_nodes[i];
    *dest << n.page << "," << fmt(n.s) << "," << fmt(n.t) << "," << fmt(traces(i).real()) << ","
          << fmt(traces(i).imag()) << "\n";
  }
  if (!flags.csv.empty()) std::cout << "wrote " << flags.csv << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectra of quantum open books: stratified surfaces glued along bindings"};
  app.require_subcommand(1);

  std::string file;
  CommonFlags flags;

  CLI::App* validate = app.add_subcommand("validate", "Check a book file and its conditions");
  validate->add_option("file", file, "Book description file")->required();

  CLI::App* spectrum = app.add_subcommand("spectrum", "Lowest eigenvalues of the book");
  spectrum->add_option("file", file, "Book description file")->required();
  add_solver_flags(spectrum, flags);

  CLI::App* convergence =
      app.add_subcommand("convergence", "Observed eigenvalue orders over three grids");
  convergence->add_option("file", file, "Book description file")->required();
  add_solver_flags(convergence, flags);

  CLI::App* exporter = app.add_subcommand("export", "Write eigenfunction samples as CSV");
  exporter->add_option("file", file, "Book description file")->required();
  exporter->add_option("--index", flags.export_index, "Eigenfunction index");
  add_solver_flags(exporter, flags);

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) return cmd_validate(file);
    if (spectrum->parsed()) return cmd_spectrum(file, flags);
    if (convergence->parsed()) return cmd_convergence(file, flags);
    if (exporter->parsed()) return cmd_export(file, flags);
  } catch (const std::exception& e) {
    std::cout << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
