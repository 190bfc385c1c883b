// End-to-end checks of the openbook binary: exit codes, error-line contract,
// and emitted files.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

namespace {

struct RunResult {
  int status = -1;
  std::string output;
};

RunResult run(const std::string& args) {
  const std::string cmd = std::string(OPENBOOK_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult result;
  std::array<char, 4096> buf;
  while (std::size_t n = fread(buf.data(), 1, buf.size(), pipe)) result.output.append(buf.data(), n);
  const int rc = pclose(pipe);
  result.status = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  return result;
}

std::string fixture(const std::string& name) {
  return std::string(OPENBOOK_FIXTURE_DIR) + "/" + name;
}

std::string temp_path(const std::string& name) {
  return std::string("/tmp/openbook_cli_test_") + name;
}

bool has_error_line(const std::string& output) {
  std::istringstream in(output);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("error:", 0) == 0) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("validate accepts the sphere fixture and reports the condition calculus") {
  const RunResult r = run("validate " + fixture("sphere-from-caps.book"));
  CAPTURE(r.output);
  CHECK(r.status == 0);
  CHECK_FALSE(has_error_line(r.output));
  CHECK(r.output.find("rank 2") != std::string::npos);
  CHECK(r.output.find("elliptic yes") != std::string::npos);
  CHECK(r.output.find("selfadjoint defect 0") != std::string::npos);
  // Canonical U of Kirchhoff k=2 is the swap matrix.
  CHECK(r.output.find("U = [[0,0],[1,0],[1,0],[0,0]]") != std::string::npos);
}

TEST_CASE("validate rejects an inelliptic pair with the violating lambda") {
  const std::string path = temp_path("inelliptic.book");
  std::ofstream out(path);
  out << "page id=a kind=interval length=1\n"
         "page id=b kind=interval length=1\n"
         "binding id=v point\n"
         "attach page=a edge=s1 binding=v slot=0 orientation=+1\n"
         "attach page=b edge=s0 binding=v slot=1 orientation=+1\n"
         "boundary page=a edge=s0 tag=dirichlet\n"
         "boundary page=b edge=s1 tag=dirichlet\n"
         "condition binding=v kind=custom A=[[1,0],[0,0],[0,0],[1,0]] "
         "C=[[1,0],[0,0],[0,0],[1,0]]\n";
  out.close();
  const RunResult r = run("validate " + path);
  CAPTURE(r.output);
  CHECK(r.status != 0);
  CHECK(has_error_line(r.output));
  CHECK(r.output.find("ellipticity violated at lambda = 1") != std::string::npos);
}

TEST_CASE("validate reports circumference mismatches with positions") {
  const std::string path = temp_path("mismatch.book");
  std::ofstream out(path);
  out << "page id=north kind=spherical_cap radius=1 s0=0 s1=1.5707963267948966\n"
         "page id=south kind=spherical_cap radius=0.9 s0=0 s1=1.413716694115407\n"
         "binding id=eq circumference=6.283185307179586\n"
         "attach page=north edge=s1 binding=eq slot=0 orientation=+1\n"
         "attach page=south edge=s1 binding=eq slot=1 orientation=-1\n"
         "boundary page=north edge=s0 tag=pole\n"
         "boundary page=south edge=s0 tag=pole\n"
         "condition binding=eq kind=kirchhoff\n";
  out.close();
  const RunResult r = run("validate " + path);
  CAPTURE(r.output);
  CHECK(r.status != 0);
  CHECK(r.output.find("circumference mismatch at binding eq") != std::string::npos);
}

TEST_CASE("parse errors carry line and column") {
  const std::string path = temp_path("typo.book");
  std::ofstream out(path);
  out << "page id=a kind=interval length=1\n"
         "page id=a2 kind=interval zap=1\n";
  out.close();
  const RunResult r = run("validate " + path);
  CHECK(r.status != 0);
  CHECK(has_error_line(r.output));
  CHECK(r.output.find(":2:") != std::string::npos);
}

TEST_CASE("spectrum on the chain fixture writes a stable CSV") {
  const std::string csv = temp_path("chain.csv");
  const RunResult r =
      run("spectrum " + fixture("chain-intervals.book") + " --count 4 --nodes 500 --csv " + csv);
  CAPTURE(r.output);
  CHECK(r.status == 0);
  CHECK_FALSE(has_error_line(r.output));

  std::ifstream in(csv);
  REQUIRE(in.good());
  std::string header;
  std::getline(in, header);
  CHECK(header == "index,eigenvalue_re,eigenvalue_im,residual,cluster,mode,symmetry_defect");
  // First eigenvalue approximately (pi/2)^2.
  std::string first;
  std::getline(in, first);
  const double lambda0 = std::stod(first.substr(first.find(',') + 1));
  CHECK(lambda0 == doctest::Approx(2.4674011002723395).epsilon(1e-4));

  // Identical reruns produce identical bytes (determinism contract).
  const std::string csv2 = temp_path("chain2.csv");
  run("spectrum " + fixture("chain-intervals.book") + " --count 4 --nodes 500 --csv " + csv2);
  std::ifstream a(csv), b(csv2);
  std::stringstream sa, sb;
  sa << a.rdbuf();
  sb << b.rdbuf();
  CHECK(sa.str() == sb.str());
}

TEST_CASE("spectrum flags override file settings and dump matrices") {
  const std::string base = temp_path("dump");
  const RunResult r = run("spectrum " + fixture("chain-intervals.book") +
                          " --count 2 --nodes 64 --dump-matrices " + base);
  CAPTURE(r.output);
  CHECK(r.status == 0);
  std::ifstream k(base + ".K.coo");
  REQUIRE(k.good());
  std::string line;
  std::getline(k, line);
  CHECK(line == "# rows cols nnz");
  std::getline(k, line);
  CHECK(line.find("126") != std::string::npos);  // 2*(65-2) interior unknowns
  std::ifstream m(base + ".M.coo");
  CHECK(m.good());
}

TEST_CASE("export writes eigenfunction samples") {
  const std::string csv = temp_path("mode.csv");
  const RunResult r = run("export " + fixture("circle-intervals.book") +
                          " --count 3 --nodes 200 --index 0 --csv " + csv);
  CAPTURE(r.output);
  CHECK(r.status == 0);
  std::ifstream in(csv);
  REQUIRE(in.good());
  std::string header;
  std::getline(in, header);
  CHECK(header == "page,s,t,u_re,u_im");
  int rows = 0;
  std::string line;
  while (std::getline(in, line)) ++rows;
  // 2 pages x 199 interior nodes + 4 trace samples.
  CHECK(rows == 2 * 199 + 4);
}

TEST_CASE("sphere fixture defaults cluster as 1, 3, 5, 7 within a percent") {
  const std::string csv = temp_path("sphere_full.csv");
  const RunResult r = run("spectrum " + fixture("sphere-from-caps.book") + " --csv " + csv);
  CAPTURE(r.output);
  CHECK(r.status == 0);
  std::ifstream in(csv);
  REQUIRE(in.good());
  std::string line;
  std::getline(in, line);
  std::vector<int> clusters;
  std::vector<double> values;
  while (std::getline(in, line)) {
    std::istringstream row(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    values.push_back(std::stod(cells[1]));
    clusters.push_back(std::stoi(cells[4]));
  }
  REQUIRE(values.size() == 16);
  const double want[] = {0, 2, 2, 2, 6, 6, 6, 6, 6, 12, 12, 12, 12, 12, 12, 12};
  std::vector<int> sizes(4, 0);
  for (int i = 0; i < 16; ++i) {
    CHECK(std::abs(values[i] - want[i]) <= 1e-2 * (1.0 + want[i]));
    REQUIRE(clusters[i] <= 3);
    sizes[clusters[i]] += 1;
  }
  CHECK(sizes == std::vector<int>{1, 3, 5, 7});
}

TEST_CASE("sphere spectrum clusters as 1, 3, 5 in the CSV") {
  const std::string csv = temp_path("sphere.csv");
  const RunResult r = run("spectrum " + fixture("sphere-from-caps.book") +
                          " --modes -2..2 --nodes 120 --count 9 --csv " + csv);
  CAPTURE(r.output);
  CHECK(r.status == 0);
  std::ifstream in(csv);
  REQUIRE(in.good());
  std::string line;
  std::getline(in, line);  // header
  std::vector<int> clusters;
  std::vector<double> values;
  while (std::getline(in, line)) {
    std::istringstream row(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    values.push_back(std::stod(cells[1]));
    clusters.push_back(std::stoi(cells[4]));
  }
  REQUIRE(values.size() == 9);
  CHECK(values[0] == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(values[1] == doctest::Approx(2.0).epsilon(0.02));
  CHECK(values[4] == doctest::Approx(6.0).epsilon(0.02));
  CHECK(clusters == std::vector<int>{0, 1, 1, 1, 2, 2, 2, 2, 2});
}

TEST_CASE("convergence reports observed orders near two") {
  const RunResult r =
      run("convergence " + fixture("chain-intervals.book") + " --count 3 --nodes 100");
  CAPTURE(r.output);
  CHECK(r.status == 0);
  // Last column of the first data row is the observed order of lambda_1.
  std::istringstream in(r.output);
  std::string line;
  bool checked = false;
  while (std::getline(in, line)) {
    if (line.rfind("     0", 0) == 0) {
      const double order = std::stod(line.substr(line.rfind(' ')));
      CHECK(order == doctest::Approx(2.0).epsilon(0.25));
      checked = true;
    }
  }
  CHECK(checked);
}

TEST_CASE("full-2d spectrum runs end to end on the flat book") {
  const std::string csv = temp_path("flat.csv");
  const RunResult r =
      run("spectrum " + fixture("flat-book.book") + " --grid 24x48 --count 3 --csv " + csv);
  CAPTURE(r.output);
  CHECK(r.status == 0);
  std::ifstream in(csv);
  REQUIRE(in.good());
  std::string line;
  std::getline(in, line);
  std::getline(in, line);
  // Lowest eigenvalue of the 2x1 Dirichlet rectangle is 1.25 pi^2.
  const double lambda0 = std::stod(line.substr(line.find(',') + 1));
  CHECK(lambda0 == doctest::Approx(12.337).epsilon(5e-3));
}

TEST_CASE("dumbbell fixture runs with its file settings") {
  const RunResult r = run("spectrum " + fixture("dumbbell.book") + " --count 4 --nodes 100");
  CAPTURE(r.output);
  CHECK(r.status == 0);
  CHECK_FALSE(has_error_line(r.output));
  // Closed Kirchhoff book: the constant mode sits at zero.
  std::istringstream in(r.output);
  std::string line;
  std::getline(in, line);  // header
  std::getline(in, line);
  std::istringstream row(line);
  int index;
  double lambda0;
  row >> index >> lambda0;
  CHECK(std::abs(lambda0) < 1e-8);
}

TEST_CASE("unreachable tolerance flags partial results and exits nonzero") {
  const RunResult r =
      run("spectrum " + fixture("chain-intervals.book") + " --count 3 --nodes 64 --tol 1e-30");
  CAPTURE(r.output);
  CHECK(r.status != 0);
  CHECK(r.output.find("error: eigensolver did not converge") != std::string::npos);
  // The table is still printed for inspection.
  CHECK(r.output.find("# index") != std::string::npos);
}

TEST_CASE("missing file is an error line") {
  const RunResult r = run("spectrum /nonexistent/path.book");
  CHECK(r.status != 0);
  CHECK(has_error_line(r.output));
}
