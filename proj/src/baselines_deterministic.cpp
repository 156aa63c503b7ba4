#include "dsmseq/baselines_deterministic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "dsmseq/rng.hpp"

namespace dsmseq {

namespace {

constexpr double kKeyTolerance = 1e-9;
constexpr double kPowerTolerance = 1e-10;
constexpr int kPowerMaxIterations = 10000;
constexpr double kNilpotentShift = 1e-6;
constexpr double kPeriodicShift = 1.0;
constexpr double kSeriesTolerance = 1e-12;
constexpr double kMaxCondition = 1e12;

bool keys_equal(double a, double b) {
  return std::abs(a - b) <= kKeyTolerance * std::max({1.0, std::abs(a), std::abs(b)});
}

// Splits `idx` (already sorted by `keys` in the wanted direction) into runs of
// tied keys. Ties are measured against the first element of each run.
std::vector<std::vector<std::size_t>> tie_runs(const std::vector<std::size_t>& idx, const std::vector<double>& keys) {
  std::vector<std::vector<std::size_t>> runs;
  for (auto i : idx) {
    if (runs.empty() || !keys_equal(keys[runs.back().front()], keys[i])) runs.emplace_back();
    runs.back().push_back(i);
  }
  return runs;
}

// Orders nodes by primary key, then secondary key, then a seeded shuffle of
// whatever still ties.
NodeRanking rank_nodes(const AdjacencyMatrix& matrix, std::vector<double> primary, std::vector<double> secondary,
                       std::uint64_t seed, RankDirection direction) {
  const auto n = matrix.size();
  const bool descending = direction == RankDirection::Descending;
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);

  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return descending ? primary[a] > primary[b] : primary[a] < primary[b];
  });

  Rng rng(seed);
  NodeRanking out;
  std::vector<std::size_t> final_order;
  final_order.reserve(n);

  auto emit_shuffled = [&](std::vector<std::size_t> group) {
    if (group.size() > 1) {
      rng.shuffle(std::span<std::size_t>(group));
      std::vector<NodeId> ids;
      for (auto i : group) ids.push_back(matrix.ids()[i]);
      out.tie_groups.push_back(std::move(ids));
    }
    final_order.insert(final_order.end(), group.begin(), group.end());
  };

  for (auto& run : tie_runs(idx, primary)) {
    if (run.size() == 1 || secondary.empty()) {
      emit_shuffled(std::move(run));
      continue;
    }
    // Secondary key breaks primary ties in the opposite sense (low column
    // sums first when ranking descending by row sums).
    std::stable_sort(run.begin(), run.end(), [&](std::size_t a, std::size_t b) {
      return descending ? secondary[a] < secondary[b] : secondary[a] > secondary[b];
    });
    for (auto& sub : tie_runs(run, secondary)) emit_shuffled(std::move(sub));
  }

  for (auto i : final_order) out.order.push_back(matrix.ids()[i]);
  out.primary_keys = std::move(primary);
  out.secondary_keys = std::move(secondary);
  return out;
}

NodeRanking rank_by_row_and_column_sums(const AdjacencyMatrix& matrix, const Eigen::MatrixXd& f, std::uint64_t seed,
                                        RankDirection direction) {
  const Eigen::VectorXd rows = f.rowwise().sum();
  const Eigen::VectorXd cols = f.colwise().sum().transpose();
  return rank_nodes(matrix, std::vector<double>(rows.data(), rows.data() + rows.size()),
                    std::vector<double>(cols.data(), cols.data() + cols.size()), seed, direction);
}

struct PowerRun {
  Eigen::VectorXd x;
  int iterations = 0;
  bool converged = false;
  bool vanished = false;
};

PowerRun power_iterate(const Eigen::MatrixXd& m) {
  const auto n = m.rows();
  PowerRun run;
  run.x = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  for (run.iterations = 1; run.iterations <= kPowerMaxIterations; ++run.iterations) {
    Eigen::VectorXd y = m * run.x;
    const double total = y.sum();
    if (total <= 0.0) {
      run.vanished = true;
      return run;
    }
    y /= total;
    const double change = (y - run.x).lpNorm<1>();
    run.x = std::move(y);
    if (change < kPowerTolerance) {
      run.converged = true;
      return run;
    }
  }
  run.iterations = kPowerMaxIterations;
  return run;
}

}  // namespace

std::string_view to_string(DeterministicMethod method) {
  switch (method) {
    case DeterministicMethod::OutInDegree: return "outin";
    case DeterministicMethod::Eigenvector: return "eig";
    case DeterministicMethod::WalkExponential: return "exp";
    case DeterministicMethod::WalkResolvent: return "resolvent";
    case DeterministicMethod::Visibility: return "visibility";
  }
  return "unknown";
}

DeterministicMethod deterministic_method_from_string(std::string_view name) {
  for (auto m : all_deterministic_methods())
    if (to_string(m) == name) return m;
  throw std::invalid_argument("unknown deterministic method '" + std::string(name) +
                              "' (expected outin, eig, exp, resolvent or visibility)");
}

const std::vector<DeterministicMethod>& all_deterministic_methods() {
  static const std::vector<DeterministicMethod> methods = {
      DeterministicMethod::OutInDegree, DeterministicMethod::Eigenvector, DeterministicMethod::WalkExponential,
      DeterministicMethod::WalkResolvent, DeterministicMethod::Visibility};
  return methods;
}

nlohmann::json ranking_to_json(const NodeRanking& ranking, const AdjacencyMatrix& matrix) {
  nlohmann::json j;
  j["order"] = nlohmann::json::array();
  for (const auto& id : ranking.order) j["order"].push_back(id.str());
  j["primary_keys"] = nlohmann::json::object();
  j["secondary_keys"] = nlohmann::json::object();
  for (std::size_t i = 0; i < ranking.primary_keys.size(); ++i) j["primary_keys"][matrix.ids()[i].str()] = ranking.primary_keys[i];
  for (std::size_t i = 0; i < ranking.secondary_keys.size(); ++i)
    j["secondary_keys"][matrix.ids()[i].str()] = ranking.secondary_keys[i];
  j["tie_groups"] = nlohmann::json::array();
  for (const auto& g : ranking.tie_groups) {
    auto group = nlohmann::json::array();
    for (const auto& id : g) group.push_back(id.str());
    j["tie_groups"].push_back(std::move(group));
  }
  j["warnings"] = ranking.warnings;
  return j;
}

Eigen::MatrixXd to_dense(const AdjacencyMatrix& matrix) {
  const auto n = static_cast<Eigen::Index>(matrix.size());
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      a(i, j) = matrix.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  return a;
}

Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& a) {
  const auto n = a.rows();
  const double norm = a.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const Eigen::MatrixXd b = a / std::ldexp(1.0, squarings);

  Eigen::MatrixXd sum = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(n, n);
  for (int k = 1; k < 100; ++k) {
    term = term * b / static_cast<double>(k);
    sum += term;
    if (term.cwiseAbs().maxCoeff() <= kSeriesTolerance * sum.cwiseAbs().maxCoeff()) break;
  }
  for (int s = 0; s < squarings; ++s) sum = sum * sum;
  return sum;
}

Eigen::MatrixXd resolvent(const Eigen::MatrixXd& a, double delta) {
  const auto n = a.rows();
  if (n > 0) {
    const double rho = a.eigenvalues().cwiseAbs().maxCoeff();
    if (delta * rho >= 1.0) {
      throw std::domain_error("resolvent: delta * spectral radius = " + std::to_string(delta * rho) +
                              " >= 1, the walk series diverges; choose a smaller delta");
    }
  }
  const Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n) - delta * a;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
  const double rcond = lu.rcond();
  if (!(rcond > 1.0 / kMaxCondition)) {
    throw std::domain_error("resolvent: I - delta*A is near-singular (condition estimate > 1e12); choose a smaller delta");
  }
  return lu.inverse();
}

Eigen::MatrixXd visibility_matrix(const AdjacencyMatrix& matrix) {
  const auto n = matrix.size();
  // reach accumulates binarize(A^0 + ... + A^k); power tracks binarize(A^k).
  std::vector<std::uint8_t> power(n * n, 0), reach(n * n, 0), next(n * n, 0);
  for (std::size_t i = 0; i < n; ++i) power[i * n + i] = reach[i * n + i] = 1;
  for (std::size_t k = 1; k <= n; ++k) {
    std::fill(next.begin(), next.end(), 0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t m = 0; m < n; ++m)
        if (matrix.at(i, m))
          for (std::size_t j = 0; j < n; ++j) next[i * n + j] |= power[m * n + j];
    power.swap(next);
    bool grew = false;
    for (std::size_t c = 0; c < n * n; ++c) {
      if (power[c] && !reach[c]) {
        reach[c] = 1;
        grew = true;
      }
    }
    if (!grew && std::none_of(power.begin(), power.end(), [](auto v) { return v != 0; })) break;
  }
  Eigen::MatrixXd f(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      f(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = reach[i * n + j];
  return f;
}

PerronResult perron_vector(const Eigen::MatrixXd& a) {
  const auto n = a.rows();
  PerronResult out;
  if (a.isZero(0.0)) {
    out.vector = Eigen::VectorXd::Zero(n);
    out.converged = true;
    out.warnings.push_back("zero matrix: eigenvector undefined, all nodes tie");
    return out;
  }

  auto run = power_iterate(a);
  if (!run.converged) {
    // A nilpotent matrix (acyclic graph) has spectral radius 0 and the plain
    // iteration collapses to zero; a periodic one oscillates. Both are fixed
    // by a diagonal shift, which leaves eigenvectors unchanged.
    out.shift = run.vanished ? kNilpotentShift : kPeriodicShift;
    out.warnings.push_back(run.vanished ? "iteration vanished (nilpotent matrix); retrying with A + 1e-6 I"
                                        : "power iteration did not converge; retrying with A + I");
    const Eigen::MatrixXd shifted = a + out.shift * Eigen::MatrixXd::Identity(n, n);
    run = power_iterate(shifted);
    if (!run.converged) out.warnings.push_back("shifted power iteration did not converge; using last iterate");
  }
  out.vector = run.x;
  out.iterations = run.iterations;
  out.converged = run.converged;
  return out;
}

NodeRanking out_in_degree_order(const AdjacencyMatrix& matrix, std::uint64_t seed, const RankingOptions& opts) {
  std::vector<double> keys(matrix.size());
  for (std::size_t v = 0; v < matrix.size(); ++v) {
    // Out-degree: edges where v is the predecessor (column v).
    keys[v] = static_cast<double>(matrix.column_sum(v)) - static_cast<double>(matrix.row_sum(v));
  }
  return rank_nodes(matrix, std::move(keys), {}, seed, opts.direction);
}

NodeRanking eigenvector_order(const AdjacencyMatrix& matrix, std::uint64_t seed, const RankingOptions& opts) {
  auto perron = perron_vector(to_dense(matrix));
  const auto& v = perron.vector;
  auto ranking = rank_nodes(matrix, std::vector<double>(v.data(), v.data() + v.size()), {}, seed, opts.direction);
  ranking.warnings = std::move(perron.warnings);
  return ranking;
}

NodeRanking walk_exponential_order(const AdjacencyMatrix& matrix, std::uint64_t seed, const RankingOptions& opts) {
  return rank_by_row_and_column_sums(matrix, matrix_exponential(to_dense(matrix)), seed, opts.direction);
}

NodeRanking walk_resolvent_order(const AdjacencyMatrix& matrix, std::uint64_t seed, const RankingOptions& opts) {
  return rank_by_row_and_column_sums(matrix, resolvent(to_dense(matrix), opts.resolvent_delta), seed, opts.direction);
}

NodeRanking visibility_order(const AdjacencyMatrix& matrix, std::uint64_t seed, const RankingOptions& opts) {
  return rank_by_row_and_column_sums(matrix, visibility_matrix(matrix), seed, opts.direction);
}

NodeRanking deterministic_order(DeterministicMethod method, const AdjacencyMatrix& matrix, std::uint64_t seed,
                                const RankingOptions& opts) {
  switch (method) {
    case DeterministicMethod::OutInDegree: return out_in_degree_order(matrix, seed, opts);
    case DeterministicMethod::Eigenvector: return eigenvector_order(matrix, seed, opts);
    case DeterministicMethod::WalkExponential: return walk_exponential_order(matrix, seed, opts);
    case DeterministicMethod::WalkResolvent: return walk_resolvent_order(matrix, seed, opts);
    case DeterministicMethod::Visibility: return visibility_order(matrix, seed, opts);
  }
  throw std::invalid_argument("unknown deterministic method");
}

}  // namespace dsmseq
