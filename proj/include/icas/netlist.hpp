#pragma once

// Structural gate-level netlist subset, fan-in tracing from prefix-flagged
// root nets, and Graphviz output of the traced cone.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <deque>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "icas/error.hpp"

namespace icas::netlist {

enum class PortDir { In, Out, Clock };

/// cell type -> port -> direction. Clock inputs are never traversed.
using DirectionTable = std::map<std::string, std::map<std::string, PortDir>>;

inline DirectionTable builtin_directions() {
  using enum PortDir;
  DirectionTable t;
  t["INV"] = {{"A", In}, {"Y", Out}};
  t["BUF"] = {{"A", In}, {"Y", Out}};
  t["NAND2"] = t["NOR2"] = t["AND2"] = t["OR2"] = t["XOR2"] = {{"A", In}, {"B", In}, {"Y", Out}};
  t["NAND3"] = t["NOR3"] = {{"A", In}, {"B", In}, {"C", In}, {"Y", Out}};
  t["MUX2"] = {{"A", In}, {"B", In}, {"S", In}, {"Y", Out}};
  t["DFF"] = {{"D", In}, {"CLK", Clock}, {"Q", Out}};
  return t;
}

/// Lines `<cellType> <port>:<in|out|clk> ...`; entries replace same-named cells in `base`.
inline DirectionTable parse_direction_file(std::string_view text, DirectionTable base = builtin_directions(),
                                           const std::string& source = "directions") {
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (const auto h = raw.find('#'); h != std::string::npos) raw.erase(h);
    std::istringstream ls(raw);
    std::string cell;
    if (!(ls >> cell)) continue;
    std::map<std::string, PortDir> ports;
    for (std::string item; ls >> item;) {
      const auto colon = item.find(':');
      if (colon == std::string::npos || colon == 0) throw ParseError(source, line, "expected <port>:<dir>, found '" + item + "'");
      const std::string dir = item.substr(colon + 1);
      PortDir d;
      if (dir == "in") d = PortDir::In;
      else if (dir == "out") d = PortDir::Out;
      else if (dir == "clk") d = PortDir::Clock;
      else throw ParseError(source, line, "unknown direction '" + dir + "'");
      ports[item.substr(0, colon)] = d;
    }
    if (ports.empty()) throw ParseError(source, line, "cell " + cell + " lists no ports");
    base[cell] = std::move(ports);
  }
  return base;
}

struct PortConn {
  std::string port;
  int net = -1;
  PortDir dir = PortDir::In;
};

struct CellInst {
  std::string name;
  std::string type;
  std::vector<PortConn> ports;
};

struct NetGraph {
  std::string module;
  std::vector<std::string> nets;
  std::unordered_map<std::string, int> net_index;
  std::vector<CellInst> cells;
  std::vector<int> driver;      // per net: driving cell, or -1
  std::vector<int> alias_from;  // per net: source net of `assign net = src`, or -1

  int find(const std::string& n) const {
    auto it = net_index.find(n);
    return it == net_index.end() ? -1 : it->second;
  }
  int add_net(const std::string& n) {
    if (int i = find(n); i >= 0) return i;
    const int i = static_cast<int>(nets.size());
    nets.push_back(n);
    net_index.emplace(n, i);
    driver.push_back(-1);
    alias_from.push_back(-1);
    return i;
  }

  /// Fan-in predecessors of `net`: (source net, step cost, cell index or -1 for an alias).
  std::vector<std::tuple<int, int, int>> predecessors(int net) const {
    std::vector<std::tuple<int, int, int>> out;
    if (alias_from[net] >= 0) out.emplace_back(alias_from[net], 0, -1);
    if (const int c = driver[net]; c >= 0)
      for (const PortConn& p : cells[c].ports)
        if (p.dir == PortDir::In && p.net >= 0) out.emplace_back(p.net, 1, c);
    return out;
  }
};

// ---------------------------------------------------------------------------
// Parser

namespace detail {

struct VTok {
  std::string text;
  std::size_t line;
};

inline std::vector<VTok> vtokenize(std::string_view s, const std::string& source) {
  std::vector<VTok> out;
  std::size_t line = 1, i = 0;
  const std::size_t n = s.size();
  auto ident_char = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$'; };
  while (i < n) {
    const char c = s[i];
    if (c == '\n') {
      ++line;
      ++i;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == '/' && i + 1 < n && s[i + 1] == '/') {
      while (i < n && s[i] != '\n') ++i;
    } else if (c == '/' && i + 1 < n && s[i + 1] == '*') {
      i += 2;
      while (i + 1 < n && !(s[i] == '*' && s[i + 1] == '/')) line += s[i++] == '\n';
      if (i + 1 >= n) throw ParseError(source, line, "unterminated block comment");
      i += 2;
    } else if (c == '\\') {  // escaped identifier runs to whitespace
      const std::size_t start = i++;
      while (i < n && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
      out.push_back({std::string(s.substr(start + 1, i - start - 1)), line});
    } else if (ident_char(c) || c == '\'') {
      const std::size_t start = i;
      while (i < n && (ident_char(s[i]) || s[i] == '\'')) ++i;
      out.push_back({std::string(s.substr(start, i - start)), line});
    } else {
      out.push_back({std::string(1, c), line});
      ++i;
    }
  }
  return out;
}

inline bool is_identifier(const std::string& t) {
  return !t.empty() && (std::isalpha(static_cast<unsigned char>(t[0])) || t[0] == '_') &&
         t.find('\'') == std::string::npos;
}

inline bool is_constant(const std::string& t) { return !t.empty() && std::isdigit(static_cast<unsigned char>(t[0])); }

class VerilogParser {
public:
  VerilogParser(std::string_view text, const DirectionTable& dirs, std::string source)
      : toks_(vtokenize(text, source)), dirs_(dirs), source_(std::move(source)) {}

  NetGraph run() {
    bool have_module = false;
    while (!done()) {
      const std::string k = next();
      if (k != "module") fail("expected 'module', found '" + k + "'");
      if (have_module) fail("multiple modules are not supported; flatten the netlist first");
      have_module = true;
      module();
    }
    if (!have_module) fail("no module found");
    return std::move(g_);
  }

private:
  struct Decl {
    int msb = 0, lsb = 0;
    bool vector = false;
  };

  bool done() const { return pos_ >= toks_.size(); }
  std::size_t line() const { return done() ? (toks_.empty() ? 0 : toks_.back().line) : toks_[pos_].line; }
  const std::string& peek() const {
    static const std::string empty;
    return done() ? empty : toks_[pos_].text;
  }
  const std::string& next() {
    if (done()) fail("unexpected end of input");
    return toks_[pos_++].text;
  }
  void expect(const std::string& t) {
    if (next() != t) fail("expected '" + t + "'");
  }
  bool accept(const std::string& t) {
    if (peek() == t) {
      ++pos_;
      return true;
    }
    return false;
  }
  [[noreturn]] void fail(const std::string& what) const { throw ParseError(source_, line(), what); }
  [[noreturn]] void behavioral(const std::string& what) const {
    throw ParseError(source_, line(), "behavioral construct unsupported: " + what);
  }

  int number() {
    const std::string t = next();
    int v = 0;
    const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size()) fail("expected integer, found '" + t + "'");
    return v;
  }

  std::string ident() {
    const std::string t = next();
    if (!is_identifier(t)) fail("expected identifier, found '" + t + "'");
    return t;
  }

  static bool is_behavioral_keyword(const std::string& k) {
    static const std::set<std::string> kw = {"always", "initial", "reg", "if", "else", "case", "casez", "casex",
                                             "for", "while", "function", "task", "generate", "integer", "begin",
                                             "parameter", "localparam", "always_ff", "always_comb", "logic"};
    return kw.count(k) > 0;
  }

  void declare(const std::string& name, const Decl& d) {
    if (decls_.count(name)) {
      const Decl& old = decls_[name];
      if (old.vector != d.vector || old.msb != d.msb || old.lsb != d.lsb) fail("conflicting declarations of '" + name + "'");
      return;
    }
    decls_[name] = d;
    if (!d.vector) {
      g_.add_net(name);
      return;
    }
    const int step = d.msb >= d.lsb ? -1 : 1;
    for (int i = d.msb;; i += step) {
      g_.add_net(name + "[" + std::to_string(i) + "]");
      if (i == d.lsb) break;
    }
  }

  // `input [3:0] a, b ;` after the direction keyword.
  void declaration(bool ansi) {
    if (peek() == "reg") behavioral("reg");
    accept("wire");
    accept("tri");
    Decl d;
    if (accept("[")) {
      d.msb = number();
      expect(":");
      d.lsb = number();
      expect("]");
      d.vector = true;
    }
    for (;;) {
      declare(ident(), d);
      if (ansi) {
        // Stop at the next direction keyword in an ANSI port list.
        if (peek() == ",") {
          const std::size_t save = pos_;
          ++pos_;
          const std::string& k = peek();
          if (k == "input" || k == "output" || k == "inout") {
            pos_ = save;
            return;
          }
          continue;
        }
        return;
      }
      if (accept(",")) continue;
      expect(";");
      return;
    }
  }

  // Bits referenced by an expression: id, id[i], id[a:b], or a sized constant.
  std::vector<int> bits() {
    const std::string t = next();
    if (is_constant(t)) {
      if (t.find('\'') == std::string::npos) fail("unsized constant '" + t + "' in a connection");
      return {g_.add_net(t)};
    }
    if (!is_identifier(t)) {
      if (t == "{") fail("concatenation is not supported");
      behavioral("expression '" + t + "'");
    }
    auto it = decls_.find(t);
    if (it == decls_.end()) fail("undeclared net '" + t + "'");
    const Decl& d = it->second;
    if (accept("[")) {
      if (!d.vector) fail("bit select on scalar '" + t + "'");
      const int a = number();
      int b = a;
      if (accept(":")) b = number();
      expect("]");
      const int lo = std::min(d.msb, d.lsb), hi = std::max(d.msb, d.lsb);
      if (a < lo || a > hi || b < lo || b > hi) fail("index out of range for '" + t + "'");
      std::vector<int> out;
      const int step = a >= b ? -1 : 1;
      for (int i = a;; i += step) {
        out.push_back(g_.find(t + "[" + std::to_string(i) + "]"));
        if (i == b) break;
      }
      return out;
    }
    if (!d.vector) return {g_.find(t)};
    std::vector<int> out;
    const int step = d.msb >= d.lsb ? -1 : 1;
    for (int i = d.msb;; i += step) {
      out.push_back(g_.find(t + "[" + std::to_string(i) + "]"));
      if (i == d.lsb) break;
    }
    return out;
  }

  void set_driver(int net, int cell) {
    if (g_.driver[net] >= 0 || g_.alias_from[net] >= 0)
      throw NetlistError("net '" + g_.nets[net] + "' has multiple drivers" +
                         (g_.driver[net] >= 0 ? " ('" + g_.cells[g_.driver[net]].name + "' and " : " (an assign and ") +
                         (cell >= 0 ? "'" + g_.cells[cell].name + "')" : "an assign)"));
    if (cell >= 0) g_.driver[net] = cell;
  }

  void assign() {
    const std::vector<int> lhs = bits();
    expect("=");
    const std::vector<int> rhs = bits();
    if (peek() != ";") behavioral("expression in assign");
    next();
    if (lhs.size() != rhs.size()) fail("assign width mismatch");
    for (std::size_t i = 0; i < lhs.size(); ++i) {
      set_driver(lhs[i], -1);
      g_.alias_from[lhs[i]] = rhs[i];
    }
  }

  void instance(const std::string& type) {
    auto dt = dirs_.find(type);
    if (dt == dirs_.end()) throw NetlistError("unknown cell type '" + type + "' (line " + std::to_string(line()) + ")");
    if (accept("#")) {  // parameter override: skip balanced parentheses
      expect("(");
      for (int depth = 1; depth > 0;) {
        const std::string& t = next();
        depth += (t == "(") - (t == ")");
      }
    }
    for (;;) {
      CellInst cell{ident(), type, {}};
      const int idx = static_cast<int>(g_.cells.size());
      expect("(");
      std::set<std::string> seen;
      if (!accept(")")) {
        for (;;) {
          if (!accept(".")) fail("positional port connections are not supported");
          const std::string port = ident();
          auto pd = dt->second.find(port);
          if (pd == dt->second.end()) throw NetlistError("cell type '" + type + "' has no port '" + port + "'");
          if (!seen.insert(port).second) fail("port '" + port + "' connected twice");
          expect("(");
          int net = -1;
          if (!accept(")")) {
            const auto b = bits();
            if (b.size() != 1) fail("port '" + port + "' of '" + cell.name + "' needs a single-bit net");
            net = b[0];
            expect(")");
          }
          cell.ports.push_back({port, net, pd->second});
          if (accept(")")) break;
          expect(",");
        }
      }
      g_.cells.push_back(std::move(cell));
      for (const PortConn& p : g_.cells[idx].ports)
        if (p.dir == PortDir::Out && p.net >= 0) set_driver(p.net, idx);
      if (accept(",")) continue;
      expect(";");
      return;
    }
  }

  void module() {
    g_.module = ident();
    if (accept("(")) {
      if (!accept(")")) {
        for (;;) {
          const std::string& k = peek();
          if (k == "input" || k == "output" || k == "inout") {
            next();
            declaration(true);
          } else {
            ident();  // non-ANSI: declared in the body
          }
          if (accept(")")) break;
          expect(",");
        }
      }
    }
    expect(";");
    for (;;) {
      const std::string k = next();
      if (k == "endmodule") return;
      if (k == "input" || k == "output" || k == "inout" || k == "wire" || k == "tri") {
        if (k == "wire" || k == "tri") --pos_;
        declaration(false);
      } else if (k == "supply0" || k == "supply1") {
        declaration(false);
      } else if (k == "assign") {
        assign();
      } else if (is_behavioral_keyword(k)) {
        behavioral(k);
      } else if (is_identifier(k)) {
        instance(k);
      } else {
        fail("unexpected '" + k + "'");
      }
    }
  }

  std::vector<VTok> toks_;
  std::size_t pos_ = 0;
  const DirectionTable& dirs_;
  std::string source_;
  NetGraph g_;
  std::map<std::string, Decl> decls_;
};

}  // namespace detail

inline NetGraph parse_netlist(std::string_view text, const DirectionTable& dirs = builtin_directions(),
                              const std::string& source = "netlist") {
  return detail::VerilogParser(text, dirs, source).run();
}

// ---------------------------------------------------------------------------
// Fan-in tracing

struct TraceConfig {
  std::string root_prefix = "sec_";
  int depth = 2;
};

struct TraceEdge {
  std::string from;  // member net
  std::string to;    // net feeding its driver
  std::string via;   // driving cell instance, or "assign"
  friend auto operator<=>(const TraceEdge&, const TraceEdge&) = default;
};

struct CriticalSet {
  std::set<std::string> roots;
  std::map<std::string, int> members;  // net -> depth reached (roots at 0)
  std::vector<TraceEdge> edges;        // sorted
  std::map<std::string, std::set<std::string>> per_root;  // root -> its own fan-in members
  std::vector<std::string> warnings;

  bool contains(const std::string& n) const { return members.count(n) > 0; }
};

/// 0-1 BFS: alias edges cost 0, stepping through a driving cell costs 1.
inline std::map<int, int> fanin_depths(const NetGraph& g, const std::vector<int>& roots, int depth) {
  std::map<int, int> dist;
  std::deque<int> dq;
  for (int r : roots) {
    dist[r] = 0;
    dq.push_back(r);
  }
  while (!dq.empty()) {
    const int u = dq.front();
    dq.pop_front();
    const int du = dist[u];
    for (auto [w, cost, cell] : g.predecessors(u)) {
      (void)cell;
      const int dw = du + cost;
      if (dw > depth) continue;
      auto it = dist.find(w);
      if (it != dist.end() && it->second <= dw) continue;
      dist[w] = dw;
      if (cost == 0) dq.push_front(w);
      else dq.push_back(w);
    }
  }
  return dist;
}

inline CriticalSet trace_fanin(const NetGraph& g, const TraceConfig& cfg) {
  if (cfg.depth < 0) throw NetlistError("trace depth must be non-negative");
  CriticalSet cs;
  std::vector<int> roots;
  for (std::size_t i = 0; i < g.nets.size(); ++i)
    if (g.nets[i].rfind(cfg.root_prefix, 0) == 0) roots.push_back(static_cast<int>(i));
  if (roots.empty()) {
    cs.warnings.push_back("no net name starts with prefix '" + cfg.root_prefix + "'");
    return cs;
  }
  const auto dist = fanin_depths(g, roots, cfg.depth);
  for (int r : roots) cs.roots.insert(g.nets[r]);
  for (auto [n, d] : dist) cs.members[g.nets[n]] = d;
  for (auto [u, du] : dist)
    for (auto [w, cost, cell] : g.predecessors(u))
      if (du + cost <= cfg.depth) cs.edges.push_back({g.nets[u], g.nets[w], cell >= 0 ? g.cells[cell].name : "assign"});
  std::sort(cs.edges.begin(), cs.edges.end());
  cs.edges.erase(std::unique(cs.edges.begin(), cs.edges.end()), cs.edges.end());
  for (int r : roots) {
    auto& set = cs.per_root[g.nets[r]];
    for (auto [n, d] : fanin_depths(g, {r}, cfg.depth)) set.insert(g.nets[n]);
  }
  return cs;
}

/// Byte-deterministic Graphviz digraph of the traced cone.
inline std::string emit_dot(const CriticalSet& cs, const NetGraph& g) {
  (void)g;
  auto q = [](const std::string& s) {
    std::string o = "\"";
    for (char c : s) {
      if (c == '"' || c == '\\') o += '\\';
      o += c;
    }
    return o + "\"";
  };
  std::ostringstream o;
  o << "digraph fanin {\n  rankdir=RL;\n";
  for (const auto& [n, d] : cs.members) {
    std::string label = q(n);
    label.insert(label.size() - 1, "\\nd=" + std::to_string(d));
    o << "  " << q(n) << " [label=" << label << (d == 0 ? ", shape=box" : "") << "];\n";
  }
  for (const TraceEdge& e : cs.edges) o << "  " << q(e.from) << " -> " << q(e.to) << " [label=" << q(e.via) << "];\n";
  o << "}\n";
  return o.str();
}

}  // namespace icas::netlist
