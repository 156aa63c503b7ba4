#include "dsmseq/baselines_ga.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <unordered_set>

namespace dsmseq {

namespace {

std::string key_of(const Permutation& genes) {
  return {reinterpret_cast<const char*>(genes.data()), genes.size() * sizeof(std::uint32_t)};
}

std::pair<std::size_t, std::size_t> random_segment(std::size_t n, Rng& rng) {
  auto a = static_cast<std::size_t>(rng.below(n));
  auto b = static_cast<std::size_t>(rng.below(n - 1));
  if (b >= a) ++b;
  return {std::min(a, b), std::max(a, b)};
}

Permutation ox_child(std::span<const std::uint32_t> keep, std::span<const std::uint32_t> fill, std::size_t lo,
                     std::size_t hi) {
  const auto n = keep.size();
  Permutation child(n);
  std::vector<bool> taken(n, false);
  for (std::size_t p = lo; p <= hi; ++p) {
    child[p] = keep[p];
    taken[keep[p]] = true;
  }
  std::size_t write = (hi + 1) % n;
  for (std::size_t k = 0; k < n; ++k) {
    const auto gene = fill[(hi + 1 + k) % n];
    if (taken[gene]) continue;
    child[write] = gene;
    write = (write + 1) % n;
  }
  return child;
}

Permutation pmx_child(std::span<const std::uint32_t> keep, std::span<const std::uint32_t> other, std::size_t lo,
                      std::size_t hi) {
  const auto n = keep.size();
  Permutation child(other.begin(), other.end());
  std::vector<std::size_t> pos(n);
  for (std::size_t p = 0; p < n; ++p) pos[child[p]] = p;
  for (std::size_t p = lo; p <= hi; ++p) {
    // Swap keep[p] into position p, preserving permutation validity.
    const auto gene = keep[p];
    const auto q = pos[gene];
    std::swap(child[p], child[q]);
    pos[child[q]] = q;
    pos[child[p]] = p;
  }
  return child;
}

void check_parents(std::span<const std::uint32_t> p1, std::span<const std::uint32_t> p2) {
  if (p1.size() != p2.size() || p1.empty()) throw std::invalid_argument("crossover parents must have equal, non-zero length");
}

}  // namespace

void GaConfig::validate() const {
  auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (population_size < 1) throw std::invalid_argument("population_size must be >= 1");
  if (generations < 1) throw std::invalid_argument("generations must be >= 1");
  if (tournament_size < 1) throw std::invalid_argument("tournament_size must be >= 1");
  if (!prob(indpb) || !prob(cxpb) || !prob(mutpb)) throw std::invalid_argument("probabilities must lie in [0, 1]");
}

std::string_view to_string(GaPreset preset) {
  switch (preset) {
    case GaPreset::Exploration: return "exploration";
    case GaPreset::Exploitation: return "exploitation";
    case GaPreset::Balanced: return "balanced";
  }
  return "unknown";
}

GaPreset ga_preset_from_string(std::string_view name) {
  if (name == "exploration") return GaPreset::Exploration;
  if (name == "exploitation") return GaPreset::Exploitation;
  if (name == "balanced") return GaPreset::Balanced;
  throw std::invalid_argument("unknown GA preset '" + std::string(name) +
                              "' (expected exploration, exploitation or balanced)");
}

GaConfig preset_config(GaPreset preset, std::uint64_t seed) {
  GaConfig cfg;
  cfg.generations = 2000;
  cfg.seed = seed;
  switch (preset) {
    case GaPreset::Exploration:
      cfg.population_size = 50;
      cfg.indpb = 0.05;
      cfg.tournament_size = 5;
      cfg.cxpb = 0.6;
      cfg.mutpb = 0.4;
      break;
    case GaPreset::Exploitation:
      cfg.population_size = 10;
      cfg.indpb = 0.01;
      cfg.tournament_size = 20;
      cfg.cxpb = 0.9;
      cfg.mutpb = 0.1;
      break;
    case GaPreset::Balanced:
      cfg.population_size = 20;
      cfg.indpb = 0.02;
      cfg.tournament_size = 10;
      cfg.cxpb = 0.7;
      cfg.mutpb = 0.3;
      break;
  }
  return cfg;
}

std::vector<ConvergencePoint> GaResult::convergence() const {
  std::vector<ConvergencePoint> points;
  for (std::size_t k = 0; k < best_so_far.size(); ++k) {
    const bool last = k + 1 == best_so_far.size();
    if (points.empty() || best_so_far[k] < points.back().best_score || last) {
      points.push_back({k + 1, best_so_far[k]});
    }
  }
  return points;
}

Score GaResult::best_at_unique(std::size_t unique) const {
  if (best_so_far.empty()) throw std::logic_error("empty GA result");
  if (unique == 0) throw std::invalid_argument("unique count must be >= 1");
  return best_so_far[std::min(unique, best_so_far.size()) - 1];
}

std::size_t tournament_select(std::span<const Individual> population, int k, Rng& rng) {
  if (population.empty()) throw std::invalid_argument("tournament over an empty population");
  std::size_t winner = static_cast<std::size_t>(rng.below(population.size()));
  for (int draw = 1; draw < k; ++draw) {
    const auto c = static_cast<std::size_t>(rng.below(population.size()));
    if (population[c].score < population[winner].score) winner = c;
  }
  return winner;
}

void shuffle_mutation(Permutation& genes, double indpb, Rng& rng) {
  const auto n = genes.size();
  if (n < 2) return;
  for (std::size_t i = 0; i < n; ++i) {
    if (!rng.bernoulli(indpb)) continue;
    auto j = static_cast<std::size_t>(rng.below(n - 1));
    if (j >= i) ++j;
    std::swap(genes[i], genes[j]);
  }
}

std::pair<Permutation, Permutation> order_crossover(std::span<const std::uint32_t> p1, std::span<const std::uint32_t> p2,
                                                    std::size_t lo, std::size_t hi) {
  check_parents(p1, p2);
  if (lo > hi || hi >= p1.size()) throw std::invalid_argument("crossover segment out of range");
  return {ox_child(p1, p2, lo, hi), ox_child(p2, p1, lo, hi)};
}

std::pair<Permutation, Permutation> order_crossover(std::span<const std::uint32_t> p1, std::span<const std::uint32_t> p2,
                                                    Rng& rng) {
  check_parents(p1, p2);
  if (p1.size() < 2) return {Permutation(p1.begin(), p1.end()), Permutation(p2.begin(), p2.end())};
  const auto [lo, hi] = random_segment(p1.size(), rng);
  return order_crossover(p1, p2, lo, hi);
}

std::pair<Permutation, Permutation> pmx_crossover(std::span<const std::uint32_t> p1, std::span<const std::uint32_t> p2,
                                                  std::size_t lo, std::size_t hi) {
  check_parents(p1, p2);
  if (lo > hi || hi >= p1.size()) throw std::invalid_argument("crossover segment out of range");
  return {pmx_child(p1, p2, lo, hi), pmx_child(p2, p1, lo, hi)};
}

std::pair<Permutation, Permutation> pmx_crossover(std::span<const std::uint32_t> p1, std::span<const std::uint32_t> p2,
                                                  Rng& rng) {
  check_parents(p1, p2);
  if (p1.size() < 2) return {Permutation(p1.begin(), p1.end()), Permutation(p2.begin(), p2.end())};
  const auto [lo, hi] = random_segment(p1.size(), rng);
  return pmx_crossover(p1, p2, lo, hi);
}

std::pair<Sequence, Sequence> order_crossover(const Sequence& p1, const Sequence& p2, std::uint64_t seed) {
  const std::unordered_set<NodeId, NodeIdHash> distinct(p1.begin(), p1.end());
  if (distinct.size() != p1.size() || !is_valid_sequence(p1, p2).valid)
    throw std::invalid_argument("crossover parents have mismatched node sets");
  AdjacencyMatrix frame(p1);
  const auto a = to_permutation(frame, p1);
  const auto b = to_permutation(frame, p2);
  Rng rng(seed);
  auto [c1, c2] = order_crossover(a, b, rng);
  return {to_sequence(frame, c1), to_sequence(frame, c2)};
}

GaResult run_ga(const AdjacencyMatrix& matrix, const GaConfig& cfg) {
  cfg.validate();
  const auto n = matrix.size();
  Rng rng(cfg.seed);
  GaResult result;
  std::unordered_set<std::string> seen;
  Score best = std::numeric_limits<Score>::max();
  Permutation best_genes;
  int best_generation = 0;

  auto evaluate = [&](Individual& ind, int generation) {
    ind.score = score_permutation(matrix, ind.genes);
    ++result.evaluations;
    if (!seen.insert(key_of(ind.genes)).second) return;
    if (ind.score < best) {
      best = ind.score;
      best_genes = ind.genes;
      best_generation = generation;
    }
    result.best_so_far.push_back(best);
  };

  auto generation_min = [](const std::vector<Individual>& pop) {
    return std::min_element(pop.begin(), pop.end(), [](auto& a, auto& b) { return a.score < b.score; })->score;
  };

  std::vector<Individual> population(static_cast<std::size_t>(cfg.population_size));
  for (auto& ind : population) {
    ind.genes.resize(n);
    std::iota(ind.genes.begin(), ind.genes.end(), 0u);
    rng.shuffle(std::span<std::uint32_t>(ind.genes));
    evaluate(ind, 0);
  }
  result.generation_best.push_back(generation_min(population));

  std::vector<Individual> offspring(population.size());
  std::vector<bool> changed(population.size());
  for (int gen = 1; gen <= cfg.generations; ++gen) {
    for (auto& child : offspring) child = population[tournament_select(population, cfg.tournament_size, rng)];
    std::fill(changed.begin(), changed.end(), false);

    for (std::size_t i = 1; i < offspring.size(); i += 2) {
      if (!rng.bernoulli(cfg.cxpb)) continue;
      auto children = cfg.crossover == CrossoverKind::Ordered
                          ? order_crossover(offspring[i - 1].genes, offspring[i].genes, rng)
                          : pmx_crossover(offspring[i - 1].genes, offspring[i].genes, rng);
      offspring[i - 1].genes = std::move(children.first);
      offspring[i].genes = std::move(children.second);
      changed[i - 1] = changed[i] = true;
    }
    for (std::size_t i = 0; i < offspring.size(); ++i) {
      if (!rng.bernoulli(cfg.mutpb)) continue;
      shuffle_mutation(offspring[i].genes, cfg.indpb, rng);
      changed[i] = true;
    }
    for (std::size_t i = 0; i < offspring.size(); ++i)
      if (changed[i]) evaluate(offspring[i], gen);

    population.swap(offspring);
    result.generation_best.push_back(generation_min(population));
  }

  result.best = {to_sequence(matrix, best_genes), best, best_generation, SolutionSource::Ga};
  return result;
}

}  // namespace dsmseq
