#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "dsmseq/evaluator.hpp"

namespace dsmseq {

enum class DeterministicMethod { OutInDegree, Eigenvector, WalkExponential, WalkResolvent, Visibility };

std::string_view to_string(DeterministicMethod method);
/// Accepts the short CLI names: outin, eig, exp, resolvent, visibility.
DeterministicMethod deterministic_method_from_string(std::string_view name);
const std::vector<DeterministicMethod>& all_deterministic_methods();

enum class RankDirection { Descending, Ascending };

struct RankingOptions {
  /// Descending puts high primary keys (and low secondary keys) first;
  /// Ascending reverses both.
  RankDirection direction = RankDirection::Descending;
  double resolvent_delta = 0.025;
};

struct NodeRanking {
  Sequence order;
  /// Per node, in matrix index order.
  std::vector<double> primary_keys;
  /// Empty for methods without a secondary key.
  std::vector<double> secondary_keys;
  /// Groups whose keys tied on every key and were ordered by the RNG.
  std::vector<std::vector<NodeId>> tie_groups;
  std::vector<std::string> warnings;
};

nlohmann::json ranking_to_json(const NodeRanking& ranking, const AdjacencyMatrix& matrix);

NodeRanking out_in_degree_order(const AdjacencyMatrix& matrix, std::uint64_t seed, const RankingOptions& opts = {});
NodeRanking eigenvector_order(const AdjacencyMatrix& matrix, std::uint64_t seed, const RankingOptions& opts = {});
NodeRanking walk_exponential_order(const AdjacencyMatrix& matrix, std::uint64_t seed, const RankingOptions& opts = {});
NodeRanking walk_resolvent_order(const AdjacencyMatrix& matrix, std::uint64_t seed, const RankingOptions& opts = {});
NodeRanking visibility_order(const AdjacencyMatrix& matrix, std::uint64_t seed, const RankingOptions& opts = {});

NodeRanking deterministic_order(DeterministicMethod method, const AdjacencyMatrix& matrix, std::uint64_t seed,
                                const RankingOptions& opts = {});

// Matrix functions behind the walk-based rankings, exposed for verification.

Eigen::MatrixXd to_dense(const AdjacencyMatrix& matrix);

/// exp(A) by scaling and squaring with a truncated Taylor series.
Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& a);

/// (I - delta*A)^{-1}. Throws std::domain_error when delta*rho(A) >= 1 or the
/// system is numerically singular (condition estimate > 1e12).
Eigen::MatrixXd resolvent(const Eigen::MatrixXd& a, double delta);

/// binarize(sum_{k=0}^{n} A^k), computed as boolean reachability so no
/// intermediate power can overflow. Entry (i, j) is 1 iff a directed path of
/// length >= 0 leads from j to i.
Eigen::MatrixXd visibility_matrix(const AdjacencyMatrix& matrix);

struct PerronResult {
  Eigen::VectorXd vector;  // non-negative, unit 1-norm; all zero for A = 0
  int iterations = 0;
  bool converged = false;
  /// 0 when the plain matrix converged, otherwise the diagonal shift used.
  double shift = 0.0;
  std::vector<std::string> warnings;
};

/// Dominant eigenvector of a non-negative matrix by power iteration.
PerronResult perron_vector(const Eigen::MatrixXd& a);

}  // namespace dsmseq
