#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "dsmseq/evaluator.hpp"
#include "dsmseq/rng.hpp"
#include "dsmseq/solution_base.hpp"

namespace dsmseq {

enum class CrossoverKind { Ordered, PartiallyMapped };

struct GaConfig {
  int population_size = 20;
  int generations = 2000;
  double indpb = 0.02;
  int tournament_size = 10;
  double cxpb = 0.7;
  double mutpb = 0.3;
  std::uint64_t seed = 0;
  CrossoverKind crossover = CrossoverKind::Ordered;

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;
};

enum class GaPreset { Exploration, Exploitation, Balanced };

std::string_view to_string(GaPreset preset);
GaPreset ga_preset_from_string(std::string_view name);
GaConfig preset_config(GaPreset preset, std::uint64_t seed = 0);

struct ConvergencePoint {
  std::size_t unique_count = 0;
  Score best_score = 0;
};

struct GaResult {
  SolutionRecord best;
  /// best_so_far[k] is the best score after k + 1 distinct permutations had
  /// been evaluated.
  std::vector<Score> best_so_far;
  std::size_t evaluations = 0;
  /// Best score of each generation's population, generation 0 first.
  std::vector<Score> generation_best;

  std::size_t unique_count() const noexcept { return best_so_far.size(); }
  /// Step points of the best-so-far curve (one per improvement plus the last x).
  std::vector<ConvergencePoint> convergence() const;
  /// Best score once `unique` distinct permutations were seen, or the final
  /// best if the run explored fewer.
  Score best_at_unique(std::size_t unique) const;
};

GaResult run_ga(const AdjacencyMatrix& matrix, const GaConfig& cfg);

struct Individual {
  Permutation genes;
  Score score = 0;
};

/// Draws k members uniformly with replacement and returns the index of the
/// lowest-score one (first drawn wins ties).
std::size_t tournament_select(std::span<const Individual> population, int k, Rng& rng);

/// Each position swaps, with probability indpb, with a different uniformly
/// chosen position.
void shuffle_mutation(Permutation& genes, double indpb, Rng& rng);

/// Ordered crossover with an explicit inclusive segment [lo, hi]. Child 1
/// keeps p1's segment in place and takes the remaining genes in p2's order,
/// starting after the segment and wrapping; child 2 symmetrically.
std::pair<Permutation, Permutation> order_crossover(std::span<const std::uint32_t> p1, std::span<const std::uint32_t> p2,
                                                    std::size_t lo, std::size_t hi);
std::pair<Permutation, Permutation> order_crossover(std::span<const std::uint32_t> p1, std::span<const std::uint32_t> p2,
                                                    Rng& rng);

/// Partially mapped crossover over the inclusive segment [lo, hi].
std::pair<Permutation, Permutation> pmx_crossover(std::span<const std::uint32_t> p1, std::span<const std::uint32_t> p2,
                                                  std::size_t lo, std::size_t hi);
std::pair<Permutation, Permutation> pmx_crossover(std::span<const std::uint32_t> p1, std::span<const std::uint32_t> p2,
                                                  Rng& rng);

/// Id-level convenience over order_crossover; throws std::invalid_argument
/// when the parents are not permutations of the same node set.
std::pair<Sequence, Sequence> order_crossover(const Sequence& p1, const Sequence& p2, std::uint64_t seed);

}  // namespace dsmseq
