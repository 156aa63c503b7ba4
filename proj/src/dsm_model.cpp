#include "dsmseq/dsm_model.hpp"

#include <algorithm>
#include <fstream>
#include <queue>
#include <set>
#include <sstream>
#include <unordered_set>

#include "dsmseq/rng.hpp"

namespace dsmseq {

namespace {

constexpr std::string_view kAlphanumeric = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789";
constexpr std::size_t kAnonymizedLength = 5;

bool is_alnum(char c) {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9');
}

std::string required_string(const nlohmann::json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw CaseError(CaseError::Kind::Parse, where, std::string("missing key '") + key + "'");
  }
  const auto& v = obj.at(key);
  if (!v.is_string()) {
    throw CaseError(CaseError::Kind::Parse, where + "/" + key, "expected a string");
  }
  return v.get<std::string>();
}

}  // namespace

bool NodeId::is_anonymized_form() const noexcept {
  return value_.size() == kAnonymizedLength && std::all_of(value_.begin(), value_.end(), is_alnum);
}

DsmCase DsmCase::create(std::vector<Node> nodes, std::vector<Edge> edges, std::string description,
                        std::optional<int> known_optimum) {
  DsmCase c;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto where = "/nodes/" + std::to_string(i);
    if (nodes[i].id.empty()) {
      throw CaseError(CaseError::Kind::EmptyId, where + "/id", "node id must be non-empty");
    }
    if (!c.index_.emplace(nodes[i].id, i).second) {
      throw CaseError(CaseError::Kind::DuplicateNode, where + "/id", "duplicate node id '" + nodes[i].id.str() + "'");
    }
  }
  if (nodes.size() < 2) {
    throw CaseError(CaseError::Kind::TooSmall, "/nodes", "a case needs at least 2 nodes");
  }

  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const auto where = "/edges/" + std::to_string(k);
    const auto& e = edges[k];
    auto dep = c.index_.find(e.dependent);
    if (dep == c.index_.end()) {
      throw CaseError(CaseError::Kind::DanglingEndpoint, where + "/dependent", "unknown node id '" + e.dependent.str() + "'");
    }
    auto pred = c.index_.find(e.predecessor);
    if (pred == c.index_.end()) {
      throw CaseError(CaseError::Kind::DanglingEndpoint, where + "/predecessor",
                      "unknown node id '" + e.predecessor.str() + "'");
    }
    if (dep->second == pred->second) {
      throw CaseError(CaseError::Kind::SelfLoop, where, "self-loop on '" + e.dependent.str() + "'");
    }
    if (!seen.emplace(dep->second, pred->second).second) {
      throw CaseError(CaseError::Kind::DuplicateEdge, where,
                      "duplicate edge " + e.predecessor.str() + " -> " + e.dependent.str());
    }
  }
  if (known_optimum && *known_optimum < 0) {
    throw CaseError(CaseError::Kind::Parse, "/known_optimum", "must be non-negative");
  }

  c.nodes_ = std::move(nodes);
  c.edges_ = std::move(edges);
  c.description_ = std::move(description);
  c.known_optimum_ = known_optimum;
  return c;
}

std::vector<NodeId> DsmCase::node_ids() const {
  std::vector<NodeId> ids;
  ids.reserve(nodes_.size());
  for (const auto& n : nodes_) ids.push_back(n.id);
  return ids;
}

bool DsmCase::has_names() const {
  return std::all_of(nodes_.begin(), nodes_.end(), [](const Node& n) { return !n.name.empty(); });
}

DsmCase case_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw CaseError(CaseError::Kind::Parse, "", "case document must be a JSON object");

  std::string description;
  if (doc.contains("description")) {
    if (!doc["description"].is_string()) throw CaseError(CaseError::Kind::Parse, "/description", "expected a string");
    description = doc["description"].get<std::string>();
  }

  std::optional<int> known_optimum;
  if (doc.contains("known_optimum") && !doc["known_optimum"].is_null()) {
    if (!doc["known_optimum"].is_number_integer()) {
      throw CaseError(CaseError::Kind::Parse, "/known_optimum", "expected an integer");
    }
    known_optimum = doc["known_optimum"].get<int>();
  }

  if (!doc.contains("nodes") || !doc["nodes"].is_array()) {
    throw CaseError(CaseError::Kind::Parse, "/nodes", "expected an array");
  }
  std::vector<Node> nodes;
  for (std::size_t i = 0; i < doc["nodes"].size(); ++i) {
    const auto& n = doc["nodes"][i];
    const auto where = "/nodes/" + std::to_string(i);
    std::string name;
    if (n.is_object() && n.contains("name")) {
      if (!n["name"].is_string()) throw CaseError(CaseError::Kind::Parse, where + "/name", "expected a string");
      name = n["name"].get<std::string>();
    }
    nodes.push_back({NodeId(required_string(n, "id", where)), std::move(name)});
  }

  if (!doc.contains("edges") || !doc["edges"].is_array()) {
    throw CaseError(CaseError::Kind::Parse, "/edges", "expected an array");
  }
  std::vector<Edge> edges;
  for (std::size_t k = 0; k < doc["edges"].size(); ++k) {
    const auto& e = doc["edges"][k];
    const auto where = "/edges/" + std::to_string(k);
    edges.push_back({NodeId(required_string(e, "dependent", where)), NodeId(required_string(e, "predecessor", where))});
  }

  return DsmCase::create(std::move(nodes), std::move(edges), std::move(description), known_optimum);
}

nlohmann::json case_to_json(const DsmCase& dsm) {
  nlohmann::json doc;
  doc["description"] = dsm.description();
  if (dsm.known_optimum()) doc["known_optimum"] = *dsm.known_optimum();
  doc["nodes"] = nlohmann::json::array();
  for (const auto& n : dsm.nodes()) doc["nodes"].push_back({{"id", n.id.str()}, {"name", n.name}});
  doc["edges"] = nlohmann::json::array();
  for (const auto& e : dsm.edges()) {
    doc["edges"].push_back({{"dependent", e.dependent.str()}, {"predecessor", e.predecessor.str()}});
  }
  return doc;
}

DsmCase load_case(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CaseError(CaseError::Kind::Parse, path.string(), "cannot open file");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw CaseError(CaseError::Kind::Parse, path.string() + " byte " + std::to_string(e.byte), e.what());
  }
  try {
    return case_from_json(doc);
  } catch (const CaseError& e) {
    throw CaseError(e.kind(), path.string() + ":" + e.location(), e.what());
  }
}

void save_case(const DsmCase& dsm, const std::filesystem::path& path) {
  std::ofstream out(path);
  out << case_to_json(dsm).dump(2) << '\n';
}

AdjacencyMatrix::AdjacencyMatrix(std::vector<NodeId> ids) : ids_(std::move(ids)), cells_(ids_.size() * ids_.size(), 0) {
  for (std::size_t i = 0; i < ids_.size(); ++i) index_.emplace(ids_[i], i);
}

void AdjacencyMatrix::set(std::size_t i, std::size_t j, bool value) {
  cells_[i * ids_.size() + j] = value ? 1 : 0;
}

std::size_t AdjacencyMatrix::edge_count() const {
  return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), std::uint8_t{1}));
}

std::size_t AdjacencyMatrix::row_sum(std::size_t i) const {
  std::size_t s = 0;
  for (std::size_t j = 0; j < size(); ++j) s += at(i, j);
  return s;
}

std::size_t AdjacencyMatrix::column_sum(std::size_t j) const {
  std::size_t s = 0;
  for (std::size_t i = 0; i < size(); ++i) s += at(i, j);
  return s;
}

AdjacencyMatrix build_adjacency(const DsmCase& dsm) {
  AdjacencyMatrix m(dsm.node_ids());
  for (const auto& e : dsm.edges()) m.set(dsm.index_of(e.dependent), dsm.index_of(e.predecessor), true);
  return m;
}

DsmCase relabel(const DsmCase& dsm, const IdMapping& mapping) {
  std::vector<Node> nodes;
  nodes.reserve(dsm.size());
  for (const auto& n : dsm.nodes()) nodes.push_back({mapping.at(n.id), n.name});
  std::vector<Edge> edges;
  edges.reserve(dsm.edges().size());
  for (const auto& e : dsm.edges()) edges.push_back({mapping.at(e.dependent), mapping.at(e.predecessor)});
  return DsmCase::create(std::move(nodes), std::move(edges), dsm.description(), dsm.known_optimum());
}

AnonymizedCase anonymize_ids(const DsmCase& dsm, std::uint64_t seed) {
  Rng rng(seed);
  std::unordered_set<std::string> used;
  IdMapping forward;
  IdMapping inverse;
  for (const auto& n : dsm.nodes()) {
    std::string candidate(kAnonymizedLength, ' ');
    do {
      for (auto& ch : candidate) ch = kAlphanumeric[rng.below(kAlphanumeric.size())];
    } while (!used.insert(candidate).second);
    NodeId fresh(candidate);
    forward.emplace(n.id, fresh);
    inverse.emplace(std::move(fresh), n.id);
  }
  return {relabel(dsm, forward), std::move(forward), std::move(inverse)};
}

NetworkMetrics network_metrics(const DsmCase& dsm) {
  const std::size_t n = dsm.size();
  const std::size_t e = dsm.edges().size();

  std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
  for (const auto& edge : dsm.edges()) {
    const auto i = dsm.index_of(edge.dependent);
    const auto j = dsm.index_of(edge.predecessor);
    adj[i][j] = adj[j][i] = true;
  }
  std::vector<std::vector<std::size_t>> nbrs(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (adj[i][j]) nbrs[i].push_back(j);

  NetworkMetrics m;
  m.n = n;
  m.e = e;
  m.density = 2.0 * static_cast<double>(e) / (static_cast<double>(n) * static_cast<double>(n - 1));
  m.average_degree = 2.0 * static_cast<double>(e) / static_cast<double>(n);

  // Average local clustering; nodes of degree < 2 contribute zero.
  double clustering = 0.0;
  for (std::size_t v = 0; v < n; ++v) {
    const auto k = nbrs[v].size();
    if (k < 2) continue;
    std::size_t links = 0;
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = a + 1; b < k; ++b)
        if (adj[nbrs[v][a]][nbrs[v][b]]) ++links;
    clustering += 2.0 * static_cast<double>(links) / (static_cast<double>(k) * static_cast<double>(k - 1));
  }
  m.clustering_coefficient = clustering / static_cast<double>(n);

  // All-pairs BFS distances.
  constexpr std::size_t kUnreached = static_cast<std::size_t>(-1);
  std::vector<std::vector<std::size_t>> dist(n, std::vector<std::size_t>(n, kUnreached));
  for (std::size_t s = 0; s < n; ++s) {
    std::queue<std::size_t> q;
    dist[s][s] = 0;
    q.push(s);
    while (!q.empty()) {
      const auto u = q.front();
      q.pop();
      for (auto w : nbrs[u]) {
        if (dist[s][w] == kUnreached) {
          dist[s][w] = dist[s][u] + 1;
          q.push(w);
        }
      }
    }
  }

  // Largest connected component; smallest member index breaks size ties.
  std::vector<bool> assigned(n, false);
  std::vector<std::size_t> largest;
  for (std::size_t s = 0; s < n; ++s) {
    if (assigned[s]) continue;
    std::vector<std::size_t> comp;
    for (std::size_t t = 0; t < n; ++t) {
      if (dist[s][t] != kUnreached) {
        comp.push_back(t);
        assigned[t] = true;
      }
    }
    if (comp.size() > largest.size()) largest = std::move(comp);
  }
  m.disconnected = largest.size() < n;

  std::size_t diameter = 0;
  double total = 0.0;
  for (auto a : largest) {
    for (auto b : largest) {
      if (a == b) continue;
      diameter = std::max(diameter, dist[a][b]);
      total += static_cast<double>(dist[a][b]);
    }
  }
  const auto c = static_cast<double>(largest.size());
  m.diameter = static_cast<int>(diameter);
  m.average_path_length = largest.size() > 1 ? total / (c * (c - 1.0)) : 0.0;
  return m;
}

nlohmann::json metrics_to_json(const NetworkMetrics& m) {
  return {{"n", m.n},
          {"e", m.e},
          {"diameter", m.diameter},
          {"density", m.density},
          {"average_degree", m.average_degree},
          {"clustering_coefficient", m.clustering_coefficient},
          {"average_path_length", m.average_path_length},
          {"disconnected", m.disconnected}};
}

}  // namespace dsmseq
