#pragma once

// Random acyclic gate-level netlists plus the connectivity they encode, used
// as an independent oracle for fan-in tracing.

#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace icas::test {

struct RandomNetlist {
  std::string text;
  // net -> list of (source net, cost): cost 1 through a gate data input, 0 through an assign.
  std::map<std::string, std::vector<std::pair<std::string, int>>> preds;
  std::vector<std::string> nets;
};

inline RandomNetlist random_dag_netlist(std::mt19937_64& rng, int gates, int roots) {
  RandomNetlist r;
  auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };
  const int inputs = 4 + static_cast<int>(pick(6));
  std::vector<std::string> avail;
  std::ostringstream body;
  std::ostringstream decl;
  decl << "module top (clk";
  for (int i = 0; i < inputs; ++i) {
    avail.push_back("in" + std::to_string(i));
    decl << ", in" << i;
  }
  decl << ");\n  input clk;\n";
  for (int i = 0; i < inputs; ++i) decl << "  input in" << i << ";\n";
  r.nets = avail;
  r.nets.push_back("clk");
  struct Kind { const char* type; std::vector<const char*> ins; const char* out; };
  const std::vector<Kind> kinds = {{"INV", {"A"}, "Y"},           {"BUF", {"A"}, "Y"},
                                   {"NAND2", {"A", "B"}, "Y"},    {"NOR2", {"A", "B"}, "Y"},
                                   {"AND2", {"A", "B"}, "Y"},     {"XOR2", {"A", "B"}, "Y"},
                                   {"NAND3", {"A", "B", "C"}, "Y"}, {"MUX2", {"A", "B", "S"}, "Y"},
                                   {"DFF", {"D"}, "Q"}};
  const int first_root = gates - roots;
  for (int g = 0; g < gates; ++g) {
    const std::string out = g >= first_root ? "sec_r" + std::to_string(g - first_root) : "n" + std::to_string(g);
    decl << "  wire " << out << ";\n";
    r.nets.push_back(out);
    if (pick(8) == 0 && !avail.empty()) {
      const std::string src = avail[pick(avail.size())];
      body << "  assign " << out << " = " << src << ";\n";
      r.preds[out].push_back({src, 0});
    } else {
      const Kind& k = kinds[pick(kinds.size())];
      body << "  " << k.type << " u" << g << " (";
      for (const char* port : k.ins) {
        // Favour recent nets so chains get deep.
        const std::size_t lo = avail.size() > 8 && pick(3) ? avail.size() - 8 : 0;
        const std::string src = avail[lo + pick(avail.size() - lo)];
        body << "." << port << "(" << src << "), ";
        r.preds[out].push_back({src, 1});
      }
      if (std::string(k.type) == "DFF") body << ".CLK(clk), ";
      body << "." << k.out << "(" << out << "));\n";
    }
    avail.push_back(out);
  }
  r.text = decl.str() + body.str() + "endmodule\n";
  return r;
}

/// Minimum cost of any backward path from a root, enumerating every path explicitly.
inline void enumerate_paths(const RandomNetlist& nl, const std::string& net, int cost, int limit,
                            std::map<std::string, int>& best) {
  auto it = best.find(net);
  if (it == best.end() || cost < it->second) best[net] = cost;
  auto p = nl.preds.find(net);
  if (p == nl.preds.end()) return;
  for (const auto& [src, c] : p->second)
    if (cost + c <= limit) enumerate_paths(nl, src, cost + c, limit, best);
}

}  // namespace icas::test
