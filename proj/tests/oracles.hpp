#pragma once

// Independent reference computations for tests. Nothing here calls into the
// library's algorithms beyond the plain data types.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <queue>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dsmseq/dsm_model.hpp"
#include "dsmseq/evaluator.hpp"

namespace oracle {

using dsmseq::AdjacencyMatrix;
using dsmseq::DsmCase;
using dsmseq::Edge;
using dsmseq::Node;
using dsmseq::NodeId;

using Dense = std::vector<std::vector<int>>;

inline Dense dense(const AdjacencyMatrix& m) {
  Dense a(m.size(), std::vector<int>(m.size(), 0));
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m.size(); ++j) a[i][j] = m.at(i, j);
  return a;
}

/// Feedback count straight from the definition: for every edge, is the
/// predecessor placed after the dependent?
inline int naive_score(const DsmCase& dsm, const dsmseq::Sequence& order) {
  int total = 0;
  for (const Edge& e : dsm.edges()) {
    const auto dep = std::find(order.begin(), order.end(), e.dependent) - order.begin();
    const auto pred = std::find(order.begin(), order.end(), e.predecessor) - order.begin();
    if (pred > dep) ++total;
  }
  return total;
}

/// Minimum over all n! orders by std::next_permutation.
inline int enumerate_optimum(const Dense& a) {
  const auto n = a.size();
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), 0);
  int best = INT32_MAX;
  do {
    int s = 0;
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t y = x + 1; y < n; ++y) s += a[p[x]][p[y]];
    best = std::min(best, s);
  } while (std::next_permutation(p.begin(), p.end()));
  return best;
}

/// Scores of every order, in next_permutation order.
inline std::vector<int> all_scores(const Dense& a) {
  const auto n = a.size();
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), 0);
  std::vector<int> out;
  do {
    int s = 0;
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t y = x + 1; y < n; ++y) s += a[p[x]][p[y]];
    out.push_back(s);
  } while (std::next_permutation(p.begin(), p.end()));
  return out;
}

/// sum_{k=0}^{terms-1} A^k / k!
inline Eigen::MatrixXd taylor_exp(const Eigen::MatrixXd& a, int terms) {
  const auto n = a.rows();
  Eigen::MatrixXd sum = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(n, n);
  for (int k = 1; k < terms; ++k) {
    term = (term * a) / static_cast<double>(k);
    sum += term;
  }
  return sum;
}

/// sum_{k=0}^{terms-1} (delta A)^k
inline Eigen::MatrixXd geometric_series(const Eigen::MatrixXd& a, double delta, int terms) {
  const auto n = a.rows();
  Eigen::MatrixXd sum = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(n, n);
  for (int k = 1; k < terms; ++k) {
    term = term * (delta * a);
    sum += term;
  }
  return sum;
}

/// reach[i][j] = 1 iff a path (length >= 0) leads from j to i, by BFS along
/// edges j -> i (a[i][j] = 1).
inline Dense reachability(const Dense& a) {
  const auto n = a.size();
  Dense r(n, std::vector<int>(n, 0));
  for (std::size_t src = 0; src < n; ++src) {
    std::vector<bool> seen(n, false);
    std::queue<std::size_t> q;
    q.push(src);
    seen[src] = true;
    while (!q.empty()) {
      const auto u = q.front();
      q.pop();
      r[u][src] = 1;
      for (std::size_t v = 0; v < n; ++v) {
        if (a[v][u] && !seen[v]) {
          seen[v] = true;
          q.push(v);
        }
      }
    }
  }
  return r;
}

inline std::vector<Node> make_nodes(std::size_t n) {
  std::vector<Node> nodes;
  for (std::size_t i = 0; i < n; ++i) nodes.push_back({NodeId("n" + std::to_string(i)), "node " + std::to_string(i)});
  return nodes;
}

/// Random directed graph: each ordered pair (i != j) present with probability p.
inline DsmCase random_case(std::size_t n, double p, std::mt19937_64& gen) {
  std::bernoulli_distribution coin(p);
  auto nodes = make_nodes(n);
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && coin(gen)) edges.push_back({nodes[i].id, nodes[j].id});
  return DsmCase::create(nodes, edges, "random");
}

/// Random DAG: a hidden topological order, edges only from earlier to later
/// positions in it. Node list order is shuffled so the DAG is not presented
/// sorted.
inline DsmCase random_dag(std::size_t n, double p, std::mt19937_64& gen) {
  std::bernoulli_distribution coin(p);
  auto nodes = make_nodes(n);
  std::vector<std::size_t> topo(n);
  std::iota(topo.begin(), topo.end(), 0);
  std::shuffle(topo.begin(), topo.end(), gen);
  std::vector<Edge> edges;
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = x + 1; y < n; ++y)
      if (coin(gen)) edges.push_back({nodes[topo[y]].id, nodes[topo[x]].id});  // topo[y] depends on topo[x]
  return DsmCase::create(nodes, edges, "dag");
}

inline DsmCase case_from_pairs(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& dep_pred) {
  auto nodes = make_nodes(n);
  std::vector<Edge> edges;
  for (auto [d, p] : dep_pred) edges.push_back({nodes[d].id, nodes[p].id});
  return DsmCase::create(nodes, edges, "fixture");
}

}  // namespace oracle
