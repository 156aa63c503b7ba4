#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "doctest.h"

#include "dsmseq/baselines_ga.hpp"
#include "oracles.hpp"

using namespace dsmseq;

namespace {

bool is_perm(const Permutation& p, std::size_t n) {
  if (p.size() != n) return false;
  std::vector<bool> seen(n, false);
  for (auto g : p) {
    if (g >= n || seen[g]) return false;
    seen[g] = true;
  }
  return true;
}

Permutation random_perm(std::size_t n, std::mt19937_64& gen) {
  Permutation p(n);
  std::iota(p.begin(), p.end(), 0u);
  std::shuffle(p.begin(), p.end(), gen);
  return p;
}

// Textbook PMX: copy the segment from `keep`, then place each remaining gene
// of `other` by following the segment mapping until it lands outside it.
Permutation pmx_oracle(const Permutation& keep, const Permutation& other, std::size_t lo, std::size_t hi) {
  const auto n = keep.size();
  Permutation child(n, UINT32_MAX);
  std::map<std::uint32_t, std::uint32_t> mapping;  // keep gene -> other gene at same position
  for (std::size_t p = lo; p <= hi; ++p) {
    child[p] = keep[p];
    mapping[keep[p]] = other[p];
  }
  for (std::size_t p = 0; p < n; ++p) {
    if (p >= lo && p <= hi) continue;
    auto g = other[p];
    while (mapping.count(g)) g = mapping[g];
    child[p] = g;
  }
  return child;
}

}  // namespace

TEST_CASE("presets") {
  const auto e = preset_config(GaPreset::Exploration);
  CHECK(e.population_size == 50);
  CHECK(e.indpb == 0.05);
  CHECK(e.tournament_size == 5);
  CHECK(e.cxpb == 0.6);
  CHECK(e.mutpb == 0.4);
  const auto x = preset_config(GaPreset::Exploitation);
  CHECK(x.population_size == 10);
  CHECK(x.indpb == 0.01);
  CHECK(x.tournament_size == 20);
  CHECK(x.cxpb == 0.9);
  CHECK(x.mutpb == 0.1);
  const auto b = preset_config(GaPreset::Balanced);
  CHECK(b.population_size == 20);
  CHECK(b.indpb == 0.02);
  CHECK(b.tournament_size == 10);
  CHECK(b.cxpb == 0.7);
  CHECK(b.mutpb == 0.3);
  for (const auto& c : {e, x, b}) CHECK(c.generations == 2000);
  CHECK_NOTHROW(x.validate());  // tournament 20 > population 10 is allowed
  auto bad = b;
  bad.cxpb = 1.5;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  CHECK(ga_preset_from_string("balanced") == GaPreset::Balanced);
  CHECK_THROWS(ga_preset_from_string("greedy"));
}

TEST_CASE("OX textbook example") {
  const Permutation p1{0, 1, 2, 3, 4, 5, 6, 7, 8};
  const Permutation p2{8, 2, 6, 7, 1, 5, 4, 0, 3};
  const auto [c1, c2] = order_crossover(p1, p2, 3, 6);
  CHECK(c1 == Permutation{2, 7, 1, 3, 4, 5, 6, 0, 8});
  CHECK(c2 == Permutation{2, 3, 6, 7, 1, 5, 4, 8, 0});
}

TEST_CASE("OX boundary cases") {
  std::mt19937_64 gen(2);
  const auto p1 = random_perm(7, gen), p2 = random_perm(7, gen);
  CHECK(order_crossover(p1, p2, 0, 6).first == p1);
  const auto same = order_crossover(p1, p1, 2, 4);
  CHECK(same.first == p1);
  CHECK(same.second == p1);
}

TEST_CASE("PMX matches the textbook mapping procedure") {
  const Permutation p1{0, 1, 2, 3, 4, 5, 6, 7, 8};
  const Permutation p2{8, 2, 6, 7, 1, 5, 4, 0, 3};
  CHECK(pmx_crossover(p1, p2, 3, 6).first == Permutation{8, 2, 1, 3, 4, 5, 6, 0, 7});

  std::mt19937_64 gen(3);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 2 + t % 12;
    const auto a = random_perm(n, gen), b = random_perm(n, gen);
    const std::size_t lo = gen() % n, hi = lo + gen() % (n - lo);
    const auto [c1, c2] = pmx_crossover(a, b, lo, hi);
    CHECK(c1 == pmx_oracle(a, b, lo, hi));
    CHECK(c2 == pmx_oracle(b, a, lo, hi));
  }
}

TEST_CASE("crossover children are permutations and keep the segment") {
  std::mt19937_64 gen(4);
  Rng rng(4);
  for (int t = 0; t < 500; ++t) {
    const std::size_t n = 2 + t % 15;
    const auto a = random_perm(n, gen), b = random_perm(n, gen);
    const std::size_t lo = gen() % n, hi = lo + gen() % (n - lo);
    const auto [c1, c2] = order_crossover(a, b, lo, hi);
    CHECK(is_perm(c1, n));
    CHECK(is_perm(c2, n));
    for (std::size_t p = lo; p <= hi; ++p) {
      CHECK(c1[p] == a[p]);
      CHECK(c2[p] == b[p]);
    }
    // Genes outside the segment keep p2's relative order.
    std::vector<std::uint32_t> rest_c, rest_b;
    std::set<std::uint32_t> seg(a.begin() + lo, a.begin() + hi + 1);
    for (std::size_t k = 0; k < n; ++k) {
      const auto pos = (hi + 1 + k) % n;
      if (pos < lo || pos > hi) rest_c.push_back(c1[pos]);
      if (!seg.count(b[(hi + 1 + k) % n])) rest_b.push_back(b[(hi + 1 + k) % n]);
    }
    CHECK(rest_c == rest_b);
    const auto r = order_crossover(a, b, rng);
    CHECK(is_perm(r.first, n));
    CHECK(is_perm(r.second, n));
    const auto q = pmx_crossover(a, b, rng);
    CHECK(is_perm(q.first, n));
    CHECK(is_perm(q.second, n));
  }
}

TEST_CASE("id-level crossover rejects mismatched parents") {
  const Sequence a{NodeId("x"), NodeId("y"), NodeId("z")};
  const Sequence b{NodeId("x"), NodeId("y"), NodeId("w")};
  const Sequence dup{NodeId("x"), NodeId("x"), NodeId("z")};
  CHECK_THROWS_AS(order_crossover(a, b, 1), std::invalid_argument);
  CHECK_THROWS_AS(order_crossover(dup, dup, 1), std::invalid_argument);
  const auto [c1, c2] = order_crossover(a, Sequence{NodeId("z"), NodeId("x"), NodeId("y")}, 1);
  CHECK(is_valid_sequence(a, c1).valid);
  CHECK(is_valid_sequence(a, c2).valid);
}

TEST_CASE("shuffle mutation") {
  Rng rng(5);
  Permutation p(10);
  std::iota(p.begin(), p.end(), 0u);
  auto same = p;
  shuffle_mutation(same, 0.0, rng);
  CHECK(same == p);

  int changed = 0;
  for (int t = 0; t < 10000; ++t) {
    auto q = p;
    shuffle_mutation(q, 0.3, rng);
    CHECK(is_perm(q, 10));
    changed += q != p;
  }
  CHECK(changed > 9000);

  Permutation two{0, 1};
  for (int t = 0; t < 100; ++t) {
    shuffle_mutation(two, 1.0, rng);
    CHECK(is_perm(two, 2));
  }
}

TEST_CASE("tournament selection") {
  std::vector<Individual> pop(10);
  for (std::size_t i = 0; i < pop.size(); ++i) pop[i].score = static_cast<Score>(10 + i);
  Rng rng(6);

  // k = 1: uniform
  std::vector<int> counts(10, 0);
  for (int t = 0; t < 10000; ++t) ++counts[tournament_select(pop, 1, rng)];
  for (int c : counts) CHECK(std::abs(c - 1000) < 150);

  // large k: the best almost surely wins, P = 1 - 0.9^50 > 0.99
  int best = 0;
  for (int t = 0; t < 1000; ++t) best += tournament_select(pop, 50, rng) == 0;
  CHECK(best >= 980);

  // equal scores: the first draw wins, so uniform
  for (auto& ind : pop) ind.score = 3;
  std::fill(counts.begin(), counts.end(), 0);
  for (int t = 0; t < 10000; ++t) ++counts[tournament_select(pop, 5, rng)];
  for (int c : counts) CHECK(std::abs(c - 1000) < 150);
}

TEST_CASE("GA reaches zero on 6-node DAGs") {
  std::mt19937_64 gen(7);
  const auto dsm = oracle::random_dag(6, 0.5, gen);
  const auto m = build_adjacency(dsm);
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) hits += run_ga(m, preset_config(GaPreset::Balanced, seed)).best.score == 0;
  CHECK(hits >= 9);
}

TEST_CASE("exploitation preset on a 3-cycle finds the optimum 1") {
  const auto m = build_adjacency(oracle::case_from_pairs(3, {{1, 0}, {2, 1}, {0, 2}}));
  auto cfg = preset_config(GaPreset::Exploitation, 1);
  cfg.generations = 50;
  const auto r = run_ga(m, cfg);
  CHECK(r.best.score == 1);
  CHECK(r.unique_count() <= 6);
}

TEST_CASE("GA bookkeeping invariants and determinism") {
  std::mt19937_64 gen(8);
  const auto dsm = oracle::random_case(9, 0.35, gen);
  const auto m = build_adjacency(dsm);
  auto cfg = preset_config(GaPreset::Exploration, 13);
  cfg.generations = 60;
  const auto r = run_ga(m, cfg);
  CHECK(r.unique_count() <= r.evaluations);
  CHECK(r.generation_best.size() == 61);
  for (std::size_t k = 1; k < r.best_so_far.size(); ++k) CHECK(r.best_so_far[k] <= r.best_so_far[k - 1]);
  CHECK(r.best.score == r.best_so_far.back());
  CHECK(score_sequence(m, r.best.sequence) == r.best.score);
  CHECK(r.best.score >= brute_force_optimum(m).score);
  for (auto g : r.generation_best) CHECK(g >= r.best.score);
  CHECK(r.best_at_unique(1) == r.best_so_far.front());
  CHECK(r.best_at_unique(1u << 30) == r.best.score);

  const auto again = run_ga(m, cfg);
  CHECK(again.best_so_far == r.best_so_far);
  CHECK(again.generation_best == r.generation_best);
  CHECK(again.best.sequence == r.best.sequence);

  const auto conv = r.convergence();
  CHECK(conv.back().unique_count == r.unique_count());
  for (std::size_t k = 1; k < conv.size(); ++k) CHECK(conv[k].unique_count > conv[k - 1].unique_count);

  cfg.crossover = CrossoverKind::PartiallyMapped;
  const auto pmx = run_ga(m, cfg);
  CHECK(score_sequence(m, pmx.best.sequence) == pmx.best.score);
}

TEST_CASE("unique counter never double counts") {
  // 3 nodes have only 6 permutations; a long run must saturate at 6.
  const auto m = build_adjacency(oracle::case_from_pairs(3, {{1, 0}}));
  auto cfg = preset_config(GaPreset::Exploration, 2);
  cfg.generations = 200;
  const auto r = run_ga(m, cfg);
  CHECK(r.unique_count() == 6);
  CHECK(r.evaluations > 6);
}
