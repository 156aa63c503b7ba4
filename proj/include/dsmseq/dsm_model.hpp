#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"

namespace dsmseq {

/// Identifier of a node within one case.
///
/// Case files may use any non-empty string. Anonymized cases use exactly five
/// alphanumeric characters, which is the form sent to language models.
class NodeId {
 public:
  NodeId() = default;
  explicit NodeId(std::string value) : value_(std::move(value)) {}

  const std::string& str() const noexcept { return value_; }
  bool empty() const noexcept { return value_.empty(); }

  /// True when the id has the 5-char alphanumeric anonymized form.
  bool is_anonymized_form() const noexcept;

  friend auto operator<=>(const NodeId&, const NodeId&) = default;
  friend bool operator==(const NodeId&, const NodeId&) = default;

 private:
  std::string value_;
};

struct NodeIdHash {
  std::size_t operator()(const NodeId& id) const noexcept {
    return std::hash<std::string>{}(id.str());
  }
};

struct Node {
  NodeId id;
  std::string name;
};

/// Directed dependency: `dependent` needs output of `predecessor`.
struct Edge {
  NodeId dependent;
  NodeId predecessor;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Error raised while loading or validating a case. `location` is a JSON
/// pointer-like path into the source document (e.g. "/edges/3/dependent").
class CaseError : public std::runtime_error {
 public:
  enum class Kind { Parse, DuplicateNode, DanglingEndpoint, SelfLoop, DuplicateEdge, TooSmall, EmptyId };

  CaseError(Kind kind, std::string location, const std::string& message)
      : std::runtime_error(location.empty() ? message : location + ": " + message),
        kind_(kind),
        location_(std::move(location)) {}

  Kind kind() const noexcept { return kind_; }
  const std::string& location() const noexcept { return location_; }

 private:
  Kind kind_;
  std::string location_;
};

/// One DSM instance. Construct through `DsmCase::create` or `load_case`; both
/// validate, so a DsmCase value always satisfies its invariants.
class DsmCase {
 public:
  static DsmCase create(std::vector<Node> nodes, std::vector<Edge> edges, std::string description = {},
                        std::optional<int> known_optimum = std::nullopt);

  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const std::string& description() const noexcept { return description_; }
  std::optional<int> known_optimum() const noexcept { return known_optimum_; }
  std::size_t size() const noexcept { return nodes_.size(); }

  bool contains(const NodeId& id) const { return index_.contains(id); }
  /// Position of `id` in the node list. Throws std::out_of_range for unknown ids.
  std::size_t index_of(const NodeId& id) const { return index_.at(id); }
  std::vector<NodeId> node_ids() const;

  /// True when every node has a non-empty name (required for prompts that
  /// carry domain knowledge).
  bool has_names() const;

 private:
  DsmCase() = default;

  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::string description_;
  std::optional<int> known_optimum_;
  std::unordered_map<NodeId, std::size_t, NodeIdHash> index_;
};

DsmCase case_from_json(const nlohmann::json& doc);
nlohmann::json case_to_json(const DsmCase& dsm);
DsmCase load_case(const std::filesystem::path& path);
void save_case(const DsmCase& dsm, const std::filesystem::path& path);

/// Dense binary dependency matrix: at(i, j) == 1 iff node i depends on node j
/// (edge from j to i). Row/column order follows the case's node order.
class AdjacencyMatrix {
 public:
  AdjacencyMatrix() = default;
  /// Zero matrix over the given ids.
  explicit AdjacencyMatrix(std::vector<NodeId> ids);

  std::size_t size() const noexcept { return ids_.size(); }
  std::uint8_t at(std::size_t i, std::size_t j) const noexcept { return cells_[i * ids_.size() + j]; }
  void set(std::size_t i, std::size_t j, bool value);

  const std::vector<NodeId>& ids() const noexcept { return ids_; }
  std::size_t index_of(const NodeId& id) const { return index_.at(id); }
  bool contains(const NodeId& id) const { return index_.contains(id); }

  std::size_t edge_count() const;
  std::size_t row_sum(std::size_t i) const;
  std::size_t column_sum(std::size_t j) const;

  friend bool operator==(const AdjacencyMatrix& a, const AdjacencyMatrix& b) {
    return a.ids_ == b.ids_ && a.cells_ == b.cells_;
  }

 private:
  std::vector<NodeId> ids_;
  std::vector<std::uint8_t> cells_;
  std::unordered_map<NodeId, std::size_t, NodeIdHash> index_;
};

AdjacencyMatrix build_adjacency(const DsmCase& dsm);

using IdMapping = std::unordered_map<NodeId, NodeId, NodeIdHash>;

struct AnonymizedCase {
  DsmCase dsm;
  IdMapping forward;  // original -> anonymized
  IdMapping inverse;  // anonymized -> original
};

/// Assigns every node a fresh, unique 5-char alphanumeric id drawn from a
/// seeded generator. Names, description and edge structure are preserved.
AnonymizedCase anonymize_ids(const DsmCase& dsm, std::uint64_t seed);

/// Rewrites ids of a case through `mapping` (every node must be mapped).
DsmCase relabel(const DsmCase& dsm, const IdMapping& mapping);

struct NetworkMetrics {
  std::size_t n = 0;
  std::size_t e = 0;
  int diameter = 0;
  double density = 0.0;
  double average_degree = 0.0;
  double clustering_coefficient = 0.0;
  double average_path_length = 0.0;
  /// Set when the undirected projection is disconnected; diameter and path
  /// length then describe the largest connected component only.
  bool disconnected = false;
};

/// Network characterization of a case. Density and average degree use the
/// directed edge count E (2E/(n(n-1)) and 2E/n); diameter, clustering and path
/// length are computed on the undirected projection.
NetworkMetrics network_metrics(const DsmCase& dsm);

nlohmann::json metrics_to_json(const NetworkMetrics& m);

}  // namespace dsmseq
