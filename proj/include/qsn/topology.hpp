#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace qsn {

/// Hardware limit on CZ links per qubit.
inline constexpr int kMaxDegree = 4;

struct Edge {
  int a = 0;  // a < b after canonicalization
  int b = 0;
  auto operator<=>(const Edge&) const = default;
};

/// Named sensor-network graph. Edges are CZ links, stored sorted with a < b.
class Topology {
 public:
  /// Canonicalizes and validates structure (range, self-loops, duplicates).
  /// Over-degree nodes are rejected unless `allow_overdegree` is set.
  Topology(std::string name, int n_qubits, std::vector<Edge> edges, bool allow_overdegree = false);

  const std::string& name() const { return name_; }
  int n_qubits() const { return n_qubits_; }
  const std::vector<Edge>& edges() const { return edges_; }
  bool allow_overdegree() const { return allow_overdegree_; }
  std::vector<int> degrees() const;
  int max_degree() const;

  bool operator==(const Topology&) const = default;

 private:
  std::string name_;
  int n_qubits_;
  std::vector<Edge> edges_;
  bool allow_overdegree_;
};

struct ValidationReport {
  bool ok = true;
  std::vector<int> overdegree_nodes;  // nodes with degree > kMaxDegree
};

/// Structural errors throw ConfigError; degree violations are reported.
ValidationReport validate(int n_qubits, const std::vector<Edge>& edges, bool allow_overdegree);
ValidationReport validate(const Topology& t, bool allow_overdegree);

/// L4 R4 S4 F4 L9 S9 RS9 F9 GHZ4 GHZ9.
Topology builtin(std::string_view name);
const std::vector<std::string>& builtin_names();

/// Edge-list text: header `N K` (qubits, edge count), then K lines `i j`.
/// `#` starts a comment. The topology name defaults to the file stem.
Topology load_edge_list(const std::filesystem::path& path, bool allow_overdegree = false);
Topology parse_edge_list(std::string_view text, std::string name, bool allow_overdegree = false);
std::string format_edge_list(const Topology& t);

/// Builtin name or path to an edge-list file.
Topology resolve_topology(const std::string& name_or_path, bool allow_overdegree = false);

}  // namespace qsn
