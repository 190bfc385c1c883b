#include "openbook/bookfile.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <vector>

namespace openbook {

namespace {

struct Token {
  std::string key;
  std::string value;
  int col = 0;
};

struct Line {
  int number = 0;
  std::string directive;
  int directive_col = 0;
  std::vector<Token> tokens;
};

std::vector<Line> tokenize(const std::string& text) {
  std::vector<Line> lines;
  std::istringstream stream(text);
  std::string raw;
  int number = 0;
  while (std::getline(stream, raw)) {
    ++number;
    Line line;
    line.number = number;
    std::size_t pos = 0;
    while (pos < raw.size()) {
      while (pos < raw.size() && std::isspace(static_cast<unsigned char>(raw[pos]))) ++pos;
      if (pos >= raw.size() || raw[pos] == '#') break;
      const std::size_t start = pos;
      while (pos < raw.size() && !std::isspace(static_cast<unsigned char>(raw[pos]))) ++pos;
      const std::string word = raw.substr(start, pos - start);
      const int col = static_cast<int>(start) + 1;
      if (line.directive.empty()) {
        line.directive = word;
        line.directive_col = col;
        continue;
      }
      const auto eq = word.find('=');
      if (eq == std::string::npos) {
        // Bare flags (e.g. "point", "full2d") are keys with empty values.
        line.tokens.push_back({word, "", col});
      } else {
        line.tokens.push_back({word.substr(0, eq), word.substr(eq + 1), col});
      }
    }
    if (!line.directive.empty()) lines.push_back(std::move(line));
  }
  return lines;
}

class TokenReader {
 public:
  TokenReader(const Line& line) : line_(line), used_(line.tokens.size(), false) {}

  const Token* find(const std::string& key) {
    for (std::size_t i = 0; i < line_.tokens.size(); ++i) {
      if (line_.tokens[i].key == key) {
        used_[i] = true;
        return &line_.tokens[i];
      }
    }
    return nullptr;
  }

  std::string require(const std::string& key) {
    const Token* t = find(key);
    if (!t) {
      throw ParseError(line_.number, line_.directive_col,
                       "missing key '" + key + "' in '" + line_.directive + "'");
    }
    return t->value;
  }

  double require_number(const std::string& key) { return to_number(key, require(key)); }

  double to_number(const std::string& key, const std::string& value) {
    try {
      std::size_t consumed = 0;
      const double v = std::stod(value, &consumed);
      if (consumed != value.size()) throw std::invalid_argument("");
      return v;
    } catch (const std::exception&) {
      const Token* t = find(key);
      throw ParseError(line_.number, t ? t->col : line_.directive_col,
                       "expected a number for '" + key + "', got '" + value + "'");
    }
  }

  long require_integer(const std::string& key) {
    const double v = require_number(key);
    if (v != std::floor(v)) {
      throw ParseError(line_.number, line_.directive_col, "'" + key + "' must be an integer");
    }
    return static_cast<long>(v);
  }

  void reject_unknown() const {
    for (std::size_t i = 0; i < line_.tokens.size(); ++i) {
      if (!used_[i]) {
        throw ParseError(line_.number, line_.tokens[i].col,
                         "unknown key '" + line_.tokens[i].key + "' in '" +
                             line_.directive + "'");
      }
    }
  }

  const Line& line() const { return line_; }

 private:
  const Line& line_;
  std::vector<bool> used_;
};

PageEdge parse_s_edge(TokenReader& r, const std::string& value) {
  if (value == "s0") return PageEdge::s0;
  if (value == "s1") return PageEdge::s1;
  throw ParseError(r.line().number, r.line().directive_col,
                   "edge must be s0 or s1, got '" + value + "'");
}

OuterBC parse_tag(TokenReader& r, const std::string& value) {
  if (value == "dirichlet") return OuterBC::dirichlet;
  if (value == "neumann") return OuterBC::neumann;
  if (value == "pole") return OuterBC::pole;
  throw ParseError(r.line().number, r.line().directive_col,
                   "tag must be dirichlet, neumann, or pole; got '" + value + "'");
}

// Matrix literal: [[re,im],[re,im],...] with k*k entries, row-major.
Matrix parse_matrix(TokenReader& r, const std::string& key, const std::string& text) {
  const int line = r.line().number;
  const auto fail = [&](const std::string& msg) -> ParseError {
    return ParseError(line, r.line().directive_col, "matrix '" + key + "': " + msg);
  };
  if (text.size() < 2 || text.front() != '[' || text.back() != ']')
    throw fail("expected [[re,im],...]");
  std::vector<Complex> entries;
  std::size_t pos = 1;
  while (pos < text.size() - 1) {
    if (text[pos] == ',') {
      ++pos;
      continue;
    }
    if (text[pos] != '[') throw fail("expected '[' at offset " + std::to_string(pos));
    const std::size_t close = text.find(']', pos);
    if (close == std::string::npos) throw fail("unterminated entry");
    const std::string body = text.substr(pos + 1, close - pos - 1);
    const auto comma = body.find(',');
    if (comma == std::string::npos) throw fail("entry needs re,im");
    try {
      std::size_t c1 = 0, c2 = 0;
      const double re = std::stod(body.substr(0, comma), &c1);
      const double im = std::stod(body.substr(comma + 1), &c2);
      if (c1 != comma || c2 != body.size() - comma - 1) throw std::invalid_argument("");
      entries.emplace_back(re, im);
    } catch (const std::exception&) {
      throw fail("bad complex entry '" + body + "'");
    }
    pos = close + 1;
  }
  const int k = static_cast<int>(std::lround(std::sqrt(static_cast<double>(entries.size()))));
  if (entries.empty() || static_cast<std::size_t>(k) * k != entries.size())
    throw fail("entry count " + std::to_string(entries.size()) + " is not a square");
  Matrix out(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) out(i, j) = entries[i * k + j];
  return out;
}

struct PendingCondition {
  int line = 0;
  std::string kind;
  double alpha = 0.0;
  std::optional<MatrixPair> custom;
  int pernode_samples = 0;
  std::map<int, MatrixPair> samples;
};

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string format_matrix(const Matrix& m) {
  std::string out = "[";
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) {
      if (i != 0 || j != 0) out += ",";
      out += "[" + format_double(m(i, j).real()) + "," + format_double(m(i, j).imag()) + "]";
    }
  }
  return out + "]";
}

}  // namespace

ParsedBook parse_book_file(const std::string& text) {
  ParsedBook parsed;
  std::map<std::string, PendingCondition> pending;

  for (const Line& line : tokenize(text)) {
    TokenReader r(line);
    if (line.directive == "page") {
      PageChart page;
      page.id = r.require("id");
      const std::string kind = r.require("kind");
      if (kind == "spherical_cap") {
        page.kind = SphericalCap{r.require_number("radius"), r.require_number("s0"),
                                 r.require_number("s1")};
      } else if (kind == "cylinder") {
        page.kind = Cylinder{r.require_number("radius"), r.require_number("length")};
      } else if (kind == "flat_annulus") {
        page.kind = FlatAnnulus{r.require_number("r0"), r.require_number("r1")};
      } else if (kind == "flat_rectangle") {
        page.kind = FlatRectangle{r.require_number("length"), r.require_number("width")};
      } else if (kind == "interval") {
        page.kind = Interval{r.require_number("length")};
      } else {
        throw ParseError(line.number, line.directive_col, "unknown page kind '" + kind + "'");
      }
      parsed.entity_lines.emplace(page.id, line.number);
      parsed.book.pages.push_back(std::move(page));
    } else if (line.directive == "binding") {
      Binding b;
      b.id = r.require("id");
      if (r.find("point")) {
        b.circumference.reset();
      } else {
        b.circumference = r.require_number("circumference");
      }
      parsed.entity_lines.emplace(b.id, line.number);
      parsed.book.bindings.push_back(std::move(b));
    } else if (line.directive == "attach") {
      Adjacency a;
      a.page = r.require("page");
      a.edge = parse_s_edge(r, r.require("edge"));
      a.binding = r.require("binding");
      a.slot = static_cast<int>(r.require_integer("slot"));
      const std::string orient = r.require("orientation");
      if (orient == "+1" || orient == "1") {
        a.orientation = +1;
      } else if (orient == "-1") {
        a.orientation = -1;
      } else {
        throw ParseError(line.number, line.directive_col,
                         "orientation must be +1 or -1, got '" + orient + "'");
      }
      parsed.book.adjacencies.push_back(std::move(a));
    } else if (line.directive == "boundary") {
      const std::string page = r.require("page");
      const std::string edge = r.require("edge");
      const OuterBC bc = parse_tag(r, r.require("tag"));
      if (edge == "t0" || edge == "t1") {
        parsed.book.transverse_tags.push_back(
            {page, edge == "t0" ? TransverseEdge::t0 : TransverseEdge::t1, bc});
      } else {
        parsed.book.boundary_tags.push_back({page, parse_s_edge(r, edge), bc});
      }
    } else if (line.directive == "condition") {
      const std::string binding = r.require("binding");
      if (pending.count(binding)) {
        throw ParseError(line.number, line.directive_col,
                         "duplicate condition for binding '" + binding + "'");
      }
      PendingCondition pc;
      pc.line = line.number;
      pc.kind = r.require("kind");
      if (pc.kind == "delta") {
        pc.alpha = r.require_number("alpha");
      } else if (pc.kind == "custom") {
        pc.custom = MatrixPair{parse_matrix(r, "A", r.require("A")),
                               parse_matrix(r, "C", r.require("C"))};
        if (pc.custom->A.rows() != pc.custom->C.rows()) {
          throw ParseError(line.number, line.directive_col, "A and C sizes differ");
        }
      } else if (pc.kind == "pernode") {
        pc.pernode_samples = static_cast<int>(r.require_integer("samples"));
        if (pc.pernode_samples < 1) {
          throw ParseError(line.number, line.directive_col, "samples must be >= 1");
        }
      } else if (pc.kind != "dirichlet" && pc.kind != "neumann" && pc.kind != "kirchhoff") {
        throw ParseError(line.number, line.directive_col,
                         "unknown condition kind '" + pc.kind + "'");
      }
      parsed.entity_lines.emplace("condition:" + binding, line.number);
      pending.emplace(binding, std::move(pc));
    } else if (line.directive == "sample") {
      const std::string binding = r.require("binding");
      auto it = pending.find(binding);
      if (it == pending.end() || it->second.kind != "pernode") {
        throw ParseError(line.number, line.directive_col,
                         "sample before a pernode condition for '" + binding + "'");
      }
      const int index = static_cast<int>(r.require_integer("index"));
      if (index < 0 || index >= it->second.pernode_samples) {
        throw ParseError(line.number, line.directive_col, "sample index out of range");
      }
      if (it->second.samples.count(index)) {
        throw ParseError(line.number, line.directive_col, "duplicate sample index");
      }
      MatrixPair mp{parse_matrix(r, "A", r.require("A")), parse_matrix(r, "C", r.require("C"))};
      if (mp.A.rows() != mp.C.rows()) {
        throw ParseError(line.number, line.directive_col, "A and C sizes differ");
      }
      it->second.samples.emplace(index, std::move(mp));
    } else if (line.directive == "solver") {
      SolverSettings& s = parsed.settings;
      if (r.find("full2d")) s.full2d = true;
      if (const Token* t = r.find("modes")) {
        const auto dots = t->value.find("..");
        try {
          if (dots == std::string::npos) throw std::invalid_argument("");
          s.mode_min = std::stoi(t->value.substr(0, dots));
          s.mode_max = std::stoi(t->value.substr(dots + 2));
        } catch (const std::exception&) {
          throw ParseError(line.number, t->col, "modes must look like a..b");
        }
        if (s.mode_min > s.mode_max) {
          throw ParseError(line.number, t->col, "modes range is empty");
        }
      }
      if (const Token* t = r.find("grid")) {
        const auto x = t->value.find('x');
        try {
          if (x == std::string::npos) throw std::invalid_argument("");
          s.grid_ns = std::stoi(t->value.substr(0, x));
          s.grid_nt = std::stoi(t->value.substr(x + 1));
        } catch (const std::exception&) {
          throw ParseError(line.number, t->col, "grid must look like NSxNT");
        }
      }
      if (const Token* t = r.find("nodes")) s.nodes = static_cast<int>(r.to_number("nodes", t->value));
      if (const Token* t = r.find("count")) s.count = static_cast<int>(r.to_number("count", t->value));
      if (const Token* t = r.find("tol")) s.tol = r.to_number("tol", t->value);
      if (const Token* t = r.find("shift")) s.shift = r.to_number("shift", t->value);
      if (const Token* t = r.find("seed"))
        s.seed = static_cast<std::uint64_t>(r.to_number("seed", t->value));
      if (const Token* t = r.find("cluster_tol")) s.cluster_tol = r.to_number("cluster_tol", t->value);
    } else {
      throw ParseError(line.number, line.directive_col,
                       "unknown directive '" + line.directive + "'");
    }
    r.reject_unknown();
  }

  // Resolve named conditions now that binding degrees are known.
  for (auto& [binding_id, pc] : pending) {
    int degree = 0;
    for (const auto& a : parsed.book.adjacencies)
      if (a.binding == binding_id) ++degree;
    const int k = std::max(degree, 1);
    if (pc.kind == "dirichlet") {
      parsed.book.conditions.emplace(binding_id, dirichlet_condition(k));
    } else if (pc.kind == "neumann") {
      parsed.book.conditions.emplace(binding_id, neumann_condition(k));
    } else if (pc.kind == "kirchhoff") {
      parsed.book.conditions.emplace(binding_id, kirchhoff_condition(k));
    } else if (pc.kind == "delta") {
      parsed.book.conditions.emplace(binding_id, delta_condition(k, pc.alpha));
    } else if (pc.kind == "custom") {
      parsed.book.conditions.emplace(binding_id,
                                     ConditionPair::constant(pc.custom->A, pc.custom->C));
    } else {  // pernode
      if (static_cast<int>(pc.samples.size()) != pc.pernode_samples) {
        throw ParseError(pc.line, 1,
                         "pernode condition for '" + binding_id + "' declares " +
                             std::to_string(pc.pernode_samples) + " samples but " +
                             std::to_string(pc.samples.size()) + " were given");
      }
      std::vector<MatrixPair> samples;
      for (auto& [idx, mp] : pc.samples) samples.push_back(std::move(mp));
      parsed.book.conditions.emplace(binding_id, ConditionPair::per_node(std::move(samples)));
    }
  }

  parsed.validation = validate_complex(parsed.book);
  return parsed;
}

std::vector<std::string> positioned_validation(const ParsedBook& parsed) {
  std::vector<std::string> out;
  for (const auto& e : parsed.validation.entries) {
    std::string msg = e.message;
    if (!e.ids.empty()) {
      msg += " [";
      for (std::size_t i = 0; i < e.ids.size(); ++i) {
        if (i) msg += ", ";
        msg += e.ids[i];
      }
      msg += "]";
    }
    const bool about_condition = e.message.find("condition") != std::string::npos;
    for (const auto& id : e.ids) {
      auto it = parsed.entity_lines.end();
      if (about_condition) it = parsed.entity_lines.find("condition:" + id);
      if (it == parsed.entity_lines.end()) it = parsed.entity_lines.find(id);
      if (it == parsed.entity_lines.end()) it = parsed.entity_lines.find("condition:" + id);
      if (it != parsed.entity_lines.end()) {
        msg += " (line " + std::to_string(it->second) + ")";
        break;
      }
    }
    out.push_back(std::move(msg));
  }
  return out;
}

std::string emit_book_file(const OpenBookComplex& book, const SolverSettings& settings) {
  std::string out;
  for (const auto& p : book.pages) {
    out += "page id=" + p.id + " kind=";
    std::visit(
        [&out](const auto& c) {
          using T = std::decay_t<decltype(c)>;
          if constexpr (std::is_same_v<T, SphericalCap>) {
            out += "spherical_cap radius=" + format_double(c.radius) +
                   " s0=" + format_double(c.s0) + " s1=" + format_double(c.s1);
          } else if constexpr (std::is_same_v<T, Cylinder>) {
            out += "cylinder radius=" + format_double(c.radius) +
                   " length=" + format_double(c.length);
          } else if constexpr (std::is_same_v<T, FlatAnnulus>) {
            out += "flat_annulus r0=" + format_double(c.r0) + " r1=" + format_double(c.r1);
          } else if constexpr (std::is_same_v<T, FlatRectangle>) {
            out += "flat_rectangle length=" + format_double(c.length) +
                   " width=" + format_double(c.width);
          } else {
            out += "interval length=" + format_double(c.length);
          }
        },
        p.kind);
    out += "\n";
  }
  for (const auto& b : book.bindings) {
    out += "binding id=" + b.id;
    out += b.is_point() ? " point" : " circumference=" + format_double(*b.circumference);
    out += "\n";
  }
  for (const auto& a : book.adjacencies) {
    out += "attach page=" + a.page + " edge=" + (a.edge == PageEdge::s0 ? "s0" : "s1") +
           " binding=" + a.binding + " slot=" + std::to_string(a.slot) +
           " orientation=" + (a.orientation > 0 ? "+1" : "-1") + "\n";
  }
  for (const auto& t : book.boundary_tags) {
    out += "boundary page=" + t.page + " edge=" + (t.edge == PageEdge::s0 ? "s0" : "s1") +
           " tag=";
    out += t.bc == OuterBC::dirichlet ? "dirichlet" : (t.bc == OuterBC::neumann ? "neumann" : "pole");
    out += "\n";
  }
  for (const auto& t : book.transverse_tags) {
    out += "boundary page=" + t.page + " edge=" + (t.edge == TransverseEdge::t0 ? "t0" : "t1") +
           " tag=";
    out += t.bc == OuterBC::dirichlet ? "dirichlet" : "neumann";
    out += "\n";
  }
  for (const auto& [id, pair] : book.conditions) {
    if (pair.is_constant()) {
      out += "condition binding=" + id + " kind=custom A=" + format_matrix(pair.sample(0).A) +
             " C=" + format_matrix(pair.sample(0).C) + "\n";
    } else {
      out += "condition binding=" + id + " kind=pernode samples=" +
             std::to_string(pair.sample_count()) + "\n";
      for (int i = 0; i < pair.sample_count(); ++i) {
        out += "sample binding=" + id + " index=" + std::to_string(i) +
               " A=" + format_matrix(pair.sample(i).A) +
               " C=" + format_matrix(pair.sample(i).C) + "\n";
      }
    }
  }
  out += "solver";
  if (settings.full2d) out += " full2d";
  out += " modes=" + std::to_string(settings.mode_min) + ".." + std::to_string(settings.mode_max);
  out += " nodes=" + std::to_string(settings.nodes);
  out += " grid=" + std::to_string(settings.grid_ns) + "x" + std::to_string(settings.grid_nt);
  out += " count=" + std::to_string(settings.count);
  out += " tol=" + format_double(settings.tol);
  out += " shift=" + format_double(settings.shift);
  out += " seed=" + std::to_string(settings.seed);
  out += " cluster_tol=" + format_double(settings.cluster_tol);
  out += "\n";
  return out;
}

}  // namespace openbook
