#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dsmseq/dsm_model.hpp"

namespace dsmseq {

/// Order of node ids; a valid sequence is a permutation of the case's nodes.
using Sequence = std::vector<NodeId>;

/// Order of matrix indices. Index-based twin of Sequence used by the search
/// methods where id lookups would dominate runtime.
using Permutation = std::vector<std::uint32_t>;

/// Feedback-loop count: dependencies whose predecessor is placed after the
/// dependent (entries above the diagonal of the reordered matrix).
using Score = int;

struct SequenceDiagnostic {
  bool valid = true;
  std::vector<NodeId> missing;
  std::vector<NodeId> duplicated;
  std::vector<NodeId> unknown;
  bool wrong_length = false;

  std::string message() const;
};

/// Optional user precedence constraints: (before, after) pairs that a valid
/// sequence must respect. Empty by default.
struct PrecedenceConstraint {
  NodeId before;
  NodeId after;
};

SequenceDiagnostic is_valid_sequence(std::span<const NodeId> node_ids, std::span<const NodeId> candidate,
                                     std::span<const PrecedenceConstraint> constraints = {});
inline SequenceDiagnostic is_valid_sequence(const DsmCase& dsm, std::span<const NodeId> candidate,
                                            std::span<const PrecedenceConstraint> constraints = {}) {
  const auto ids = dsm.node_ids();
  return is_valid_sequence(ids, candidate, constraints);
}

class InvalidSequence : public std::invalid_argument {
 public:
  explicit InvalidSequence(SequenceDiagnostic diag)
      : std::invalid_argument("invalid sequence: " + diag.message()), diagnostic_(std::move(diag)) {}
  const SequenceDiagnostic& diagnostic() const noexcept { return diagnostic_; }

 private:
  SequenceDiagnostic diagnostic_;
};

/// Maps ids to matrix indices; throws InvalidSequence if not a permutation.
Permutation to_permutation(const AdjacencyMatrix& matrix, std::span<const NodeId> s);
Sequence to_sequence(const AdjacencyMatrix& matrix, std::span<const std::uint32_t> perm);

/// Fast path: `perm` must already be a permutation of 0..n-1.
Score score_permutation(const AdjacencyMatrix& matrix, std::span<const std::uint32_t> perm);
Score score_sequence(const AdjacencyMatrix& matrix, std::span<const NodeId> s);

/// Simultaneous row/column permutation: result(p, q) = matrix(s[p], s[q]).
AdjacencyMatrix reorder_matrix(const AdjacencyMatrix& matrix, std::span<const NodeId> s);

/// Count of 1-entries strictly above the diagonal.
Score upper_triangle_count(const AdjacencyMatrix& matrix);

struct OptimumResult {
  Score score = 0;
  Sequence sequence;
};

inline constexpr std::size_t kBruteForceLimit = 10;

/// Exact minimum over all n! orders (n <= kBruteForceLimit). Among optimal
/// orders returns the lexicographically smallest in matrix-index order.
OptimumResult brute_force_optimum(const AdjacencyMatrix& matrix);

/// True iff the dependency digraph has no directed cycle.
bool is_acyclic(const AdjacencyMatrix& matrix);

}  // namespace dsmseq
