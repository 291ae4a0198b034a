#include "qsn/topology.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "qsn/errors.hpp"
#include "qsn/sim.hpp"

namespace qsn {

namespace {

std::vector<Edge> canonical(std::vector<Edge> edges) {
  for (auto& e : edges) {
    if (e.a > e.b) std::swap(e.a, e.b);
  }
  std::sort(edges.begin(), edges.end());
  return edges;
}

std::vector<Edge> chain(int n) {
  std::vector<Edge> e;
  for (int i = 0; i + 1 < n; ++i) e.push_back({i, i + 1});
  return e;
}

std::vector<Edge> complete(int n) {
  std::vector<Edge> e;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) e.push_back({i, j});
  }
  return e;
}

}  // namespace

ValidationReport validate(int n_qubits, const std::vector<Edge>& edges, bool allow_overdegree) {
  check_qubit_count(n_qubits);
  std::set<std::pair<int, int>> seen;
  std::vector<int> degree(static_cast<std::size_t>(n_qubits), 0);
  for (const auto& e : edges) {
    if (e.a < 0 || e.b < 0 || e.a >= n_qubits || e.b >= n_qubits) {
      throw ConfigError("edge (" + std::to_string(e.a) + "," + std::to_string(e.b) +
                        ") out of range for " + std::to_string(n_qubits) + " qubits");
    }
    if (e.a == e.b) throw ConfigError("self-loop on node " + std::to_string(e.a));
    const auto key = std::minmax(e.a, e.b);
    if (!seen.insert(key).second) {
      throw ConfigError("duplicate edge (" + std::to_string(key.first) + "," +
                        std::to_string(key.second) + ")");
    }
    ++degree[static_cast<std::size_t>(e.a)];
    ++degree[static_cast<std::size_t>(e.b)];
  }
  ValidationReport r;
  if (!allow_overdegree) {
    for (int q = 0; q < n_qubits; ++q) {
      if (degree[static_cast<std::size_t>(q)] > kMaxDegree) r.overdegree_nodes.push_back(q);
    }
  }
  r.ok = r.overdegree_nodes.empty();
  return r;
}

ValidationReport validate(const Topology& t, bool allow_overdegree) {
  return validate(t.n_qubits(), t.edges(), allow_overdegree);
}

Topology::Topology(std::string name, int n_qubits, std::vector<Edge> edges, bool allow_overdegree)
    : name_(std::move(name)),
      n_qubits_(n_qubits),
      edges_(canonical(std::move(edges))),
      allow_overdegree_(allow_overdegree) {
  const auto report = validate(n_qubits_, edges_, allow_overdegree_);
  if (!report.ok) {
    std::string nodes;
    for (int q : report.overdegree_nodes) nodes += (nodes.empty() ? "" : ",") + std::to_string(q);
    throw ConfigError("topology " + name_ + " exceeds degree " + std::to_string(kMaxDegree) +
                      " at nodes {" + nodes + "}");
  }
}

std::vector<int> Topology::degrees() const {
  std::vector<int> d(static_cast<std::size_t>(n_qubits_), 0);
  for (const auto& e : edges_) {
    ++d[static_cast<std::size_t>(e.a)];
    ++d[static_cast<std::size_t>(e.b)];
  }
  return d;
}

int Topology::max_degree() const {
  const auto d = degrees();
  return d.empty() ? 0 : *std::max_element(d.begin(), d.end());
}

const std::vector<std::string>& builtin_names() {
  static const std::vector<std::string> names{"L4", "R4",  "S4", "F4",   "L9",
                                              "S9", "RS9", "F9", "GHZ4", "GHZ9"};
  return names;
}

Topology builtin(std::string_view name) {
  if (name == "L4") return {"L4", 4, chain(4)};
  if (name == "R4") {
    auto e = chain(4);
    e.push_back({0, 3});
    return {"R4", 4, e};
  }
  if (name == "S4") return {"S4", 4, {{0, 1}, {0, 2}, {0, 3}}};
  if (name == "F4") return {"F4", 4, complete(4)};
  if (name == "L9") return {"L9", 9, chain(9)};
  if (name == "S9") {
    // 3x3 grid, center 4 linked to its lattice neighbours; each corner hangs
    // off one edge-midpoint node.
    return {"S9", 9, {{4, 1}, {4, 3}, {4, 5}, {4, 7}, {0, 1}, {2, 5}, {8, 7}, {6, 3}}};
  }
  if (name == "RS9") {
    auto e = chain(8);
    e.push_back({0, 7});
    for (int r : {0, 2, 4, 6}) e.push_back({r, 8});
    return {"RS9", 9, e};
  }
  if (name == "F9") return {"F9", 9, complete(9), true};
  // CZ wiring of the sequential CNOT chain that prepares a GHZ state.
  if (name == "GHZ4") return {"GHZ4", 4, chain(4)};
  if (name == "GHZ9") return {"GHZ9", 9, chain(9)};
  throw ConfigError("unknown topology '" + std::string(name) + "'");
}

Topology parse_edge_list(std::string_view text, std::string name, bool allow_overdegree) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::vector<std::vector<long long>> records;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::vector<long long> values;
    std::string tok;
    while (fields >> tok) {
      try {
        std::size_t used = 0;
        values.push_back(std::stoll(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw ConfigError("edge list line " + std::to_string(line_no) + ": bad integer '" + tok + "'");
      }
    }
    if (values.empty()) continue;
    if (values.size() != 2) {
      throw ConfigError("edge list line " + std::to_string(line_no) + ": expected two integers");
    }
    records.push_back(std::move(values));
  }
  if (records.empty()) throw ConfigError("edge list has no header line");
  const long long n = records.front()[0];
  const long long k = records.front()[1];
  if (n < 1 || n > kMaxQubits) throw ConfigError("edge list: bad qubit count");
  if (k < 0 || static_cast<std::size_t>(k) != records.size() - 1) {
    throw ConfigError("edge list: header declares " + std::to_string(k) + " edges, found " +
                      std::to_string(records.size() - 1));
  }
  std::vector<Edge> edges;
  for (std::size_t r = 1; r < records.size(); ++r) {
    edges.push_back({static_cast<int>(records[r][0]), static_cast<int>(records[r][1])});
  }
  return {std::move(name), static_cast<int>(n), std::move(edges), allow_overdegree};
}

Topology load_edge_list(const std::filesystem::path& path, bool allow_overdegree) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open edge list " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_edge_list(buf.str(), path.stem().string(), allow_overdegree);
}

std::string format_edge_list(const Topology& t) {
  std::ostringstream out;
  out << "# " << t.name() << "\n" << t.n_qubits() << " " << t.edges().size() << "\n";
  for (const auto& e : t.edges()) out << e.a << " " << e.b << "\n";
  return out.str();
}

Topology resolve_topology(const std::string& name_or_path, bool allow_overdegree) {
  const auto& names = builtin_names();
  if (std::find(names.begin(), names.end(), name_or_path) != names.end()) {
    return builtin(name_or_path);
  }
  if (std::filesystem::exists(name_or_path)) return load_edge_list(name_or_path, allow_overdegree);
  throw ConfigError("'" + name_or_path + "' is neither a builtin topology nor an edge-list file");
}

}  // namespace qsn
