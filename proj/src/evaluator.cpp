#include "dsmseq/evaluator.hpp"

#include <algorithm>
#include <limits>
#include <unordered_map>

namespace dsmseq {

namespace {

void join_ids(std::string& out, const char* label, const std::vector<NodeId>& ids) {
  if (ids.empty()) return;
  if (!out.empty()) out += "; ";
  out += label;
  out += ": ";
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ", ";
    out += ids[i].str();
  }
}

}  // namespace

std::string SequenceDiagnostic::message() const {
  if (valid) return "ok";
  std::string out;
  join_ids(out, "missing", missing);
  join_ids(out, "duplicated", duplicated);
  join_ids(out, "unknown id", unknown);
  if (wrong_length && out.empty()) out = "wrong length";
  if (out.empty()) out = "precedence constraint violated";
  return out;
}

SequenceDiagnostic is_valid_sequence(std::span<const NodeId> node_ids, std::span<const NodeId> candidate,
                                     std::span<const PrecedenceConstraint> constraints) {
  SequenceDiagnostic d;
  std::unordered_map<NodeId, std::size_t, NodeIdHash> seen;
  for (const auto& id : node_ids) seen.emplace(id, 0);

  std::unordered_map<NodeId, std::size_t, NodeIdHash> position;
  for (std::size_t p = 0; p < candidate.size(); ++p) {
    const auto& id = candidate[p];
    auto it = seen.find(id);
    if (it == seen.end()) {
      if (std::find(d.unknown.begin(), d.unknown.end(), id) == d.unknown.end()) d.unknown.push_back(id);
      continue;
    }
    if (++it->second == 2) d.duplicated.push_back(id);
    position.emplace(id, p);
  }
  for (const auto& id : node_ids) {
    if (seen.at(id) == 0) d.missing.push_back(id);
  }
  d.wrong_length = candidate.size() != node_ids.size();
  d.valid = d.missing.empty() && d.duplicated.empty() && d.unknown.empty() && !d.wrong_length;

  if (d.valid) {
    for (const auto& c : constraints) {
      auto b = position.find(c.before);
      auto a = position.find(c.after);
      if (b != position.end() && a != position.end() && b->second > a->second) {
        d.valid = false;
        break;
      }
    }
  }
  return d;
}

Permutation to_permutation(const AdjacencyMatrix& matrix, std::span<const NodeId> s) {
  auto diag = is_valid_sequence(matrix.ids(), s);
  if (!diag.valid) throw InvalidSequence(std::move(diag));
  Permutation perm;
  perm.reserve(s.size());
  for (const auto& id : s) perm.push_back(static_cast<std::uint32_t>(matrix.index_of(id)));
  return perm;
}

Sequence to_sequence(const AdjacencyMatrix& matrix, std::span<const std::uint32_t> perm) {
  Sequence s;
  s.reserve(perm.size());
  for (auto i : perm) s.push_back(matrix.ids()[i]);
  return s;
}

Score score_permutation(const AdjacencyMatrix& matrix, std::span<const std::uint32_t> perm) {
  Score total = 0;
  for (std::size_t p = 0; p < perm.size(); ++p)
    for (std::size_t q = p + 1; q < perm.size(); ++q) total += matrix.at(perm[p], perm[q]);
  return total;
}

Score score_sequence(const AdjacencyMatrix& matrix, std::span<const NodeId> s) {
  return score_permutation(matrix, to_permutation(matrix, s));
}

AdjacencyMatrix reorder_matrix(const AdjacencyMatrix& matrix, std::span<const NodeId> s) {
  const auto perm = to_permutation(matrix, s);
  AdjacencyMatrix out(Sequence(s.begin(), s.end()));
  for (std::size_t p = 0; p < perm.size(); ++p)
    for (std::size_t q = 0; q < perm.size(); ++q) out.set(p, q, matrix.at(perm[p], perm[q]) != 0);
  return out;
}

Score upper_triangle_count(const AdjacencyMatrix& matrix) {
  Score total = 0;
  for (std::size_t i = 0; i < matrix.size(); ++i)
    for (std::size_t j = i + 1; j < matrix.size(); ++j) total += matrix.at(i, j);
  return total;
}

namespace {

// Depth-first enumeration in lexicographic order with bound pruning. Placing
// node v after the already placed set adds one feedback loop for every placed
// u with a[u][v] = 1 (u depends on v but comes first).
class BranchAndBound {
 public:
  explicit BranchAndBound(const AdjacencyMatrix& m) : m_(m), n_(m.size()), used_(n_, false) {
    prefix_.reserve(n_);
  }

  OptimumResult solve() {
    descend(0);
    return {best_, to_sequence(m_, best_perm_)};
  }

 private:
  void descend(Score cost) {
    if (prefix_.size() == n_) {
      // Strict improvement only, so the first (lexicographically smallest)
      // optimal order is kept.
      if (cost < best_) {
        best_ = cost;
        best_perm_ = prefix_;
      }
      return;
    }
    for (std::uint32_t v = 0; v < n_; ++v) {
      if (used_[v]) continue;
      Score added = 0;
      for (auto u : prefix_) added += m_.at(u, v);
      if (cost + added >= best_) continue;
      used_[v] = true;
      prefix_.push_back(v);
      descend(cost + added);
      prefix_.pop_back();
      used_[v] = false;
    }
  }

  const AdjacencyMatrix& m_;
  std::size_t n_;
  std::vector<bool> used_;
  Permutation prefix_;
  Permutation best_perm_;
  Score best_ = std::numeric_limits<Score>::max();
};

}  // namespace

OptimumResult brute_force_optimum(const AdjacencyMatrix& matrix) {
  if (matrix.size() > kBruteForceLimit) {
    throw std::invalid_argument("brute force is limited to n <= " + std::to_string(kBruteForceLimit) + " (got n = " +
                                std::to_string(matrix.size()) + "); use the GA or deterministic baselines instead");
  }
  return BranchAndBound(matrix).solve();
}

bool is_acyclic(const AdjacencyMatrix& matrix) {
  // Kahn's algorithm on edges predecessor j -> dependent i.
  const auto n = matrix.size();
  std::vector<std::size_t> indeg(n, 0);
  for (std::size_t i = 0; i < n; ++i) indeg[i] = matrix.row_sum(i);
  std::vector<std::size_t> ready;
  for (std::size_t i = 0; i < n; ++i)
    if (indeg[i] == 0) ready.push_back(i);
  std::size_t removed = 0;
  while (!ready.empty()) {
    const auto j = ready.back();
    ready.pop_back();
    ++removed;
    for (std::size_t i = 0; i < n; ++i) {
      if (matrix.at(i, j) && --indeg[i] == 0) ready.push_back(i);
    }
  }
  return removed == n;
}

}  // namespace dsmseq
