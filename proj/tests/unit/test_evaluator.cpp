#include <algorithm>
#include <numeric>
#include <random>

#include "doctest.h"

#include "dsmseq/evaluator.hpp"
#include "oracles.hpp"

using namespace dsmseq;

namespace {

Sequence ids(std::initializer_list<const char*> names) {
  Sequence s;
  for (auto n : names) s.emplace_back(n);
  return s;
}

}  // namespace

TEST_CASE("score of a chain in both directions") {
  // n1 depends on n0, n2 on n1.
  const auto dsm = oracle::case_from_pairs(3, {{1, 0}, {2, 1}});
  const auto m = build_adjacency(dsm);
  CHECK(score_sequence(m, ids({"n0", "n1", "n2"})) == 0);
  CHECK(score_sequence(m, ids({"n2", "n1", "n0"})) == 2);
  CHECK(score_sequence(m, ids({"n1", "n0", "n2"})) == 1);
}

TEST_CASE("3-cycle has optimum 1, two disjoint 3-cycles optimum 2") {
  const auto one = build_adjacency(oracle::case_from_pairs(3, {{1, 0}, {2, 1}, {0, 2}}));
  CHECK(brute_force_optimum(one).score == 1);
  const auto two =
      build_adjacency(oracle::case_from_pairs(6, {{1, 0}, {2, 1}, {0, 2}, {4, 3}, {5, 4}, {3, 5}}));
  CHECK(brute_force_optimum(two).score == 2);
  CHECK_FALSE(is_acyclic(two));
}

TEST_CASE("brute force refuses n > 10") {
  std::mt19937_64 gen(1);
  const auto m = build_adjacency(oracle::random_case(11, 0.3, gen));
  CHECK_THROWS_AS(brute_force_optimum(m), std::invalid_argument);
}

TEST_CASE("brute force returns the lexicographically smallest optimal order") {
  // No edges: every order scores 0, the identity wins.
  const auto m = build_adjacency(oracle::case_from_pairs(4, {}));
  const auto r = brute_force_optimum(m);
  CHECK(r.score == 0);
  CHECK(r.sequence == ids({"n0", "n1", "n2", "n3"}));
}

TEST_CASE("reordered matrix upper triangle equals the score") {
  std::mt19937_64 gen(3);
  for (int t = 0; t < 50; ++t) {
    const auto dsm = oracle::random_case(3 + t % 8, 0.4, gen);
    const auto m = build_adjacency(dsm);
    auto s = dsm.node_ids();
    std::shuffle(s.begin(), s.end(), gen);
    const auto r = reorder_matrix(m, s);
    CHECK(upper_triangle_count(r) == score_sequence(m, s));
    CHECK(score_sequence(m, s) == oracle::naive_score(dsm, s));
    // reversing the order swaps the upper and lower triangle (no 2-cycles double counted)
    auto rev = s;
    std::reverse(rev.begin(), rev.end());
    CHECK(score_sequence(m, s) + score_sequence(m, rev) == static_cast<int>(m.edge_count()));
    for (std::size_t p = 0; p < s.size(); ++p)
      for (std::size_t q = 0; q < s.size(); ++q) CHECK(r.at(p, q) == m.at(m.index_of(s[p]), m.index_of(s[q])));
  }
}

TEST_CASE("brute force agrees with full enumeration; zero iff acyclic") {
  std::mt19937_64 gen(11);
  for (int t = 0; t < 60; ++t) {
    const std::size_t n = 2 + t % 6;
    const auto dsm = t % 3 == 0 ? oracle::random_dag(n, 0.5, gen) : oracle::random_case(n, 0.1 + 0.013 * t, gen);
    const auto m = build_adjacency(dsm);
    const auto r = brute_force_optimum(m);
    CHECK(r.score == oracle::enumerate_optimum(oracle::dense(m)));
    CHECK(score_sequence(m, r.sequence) == r.score);
    CHECK((r.score == 0) == is_acyclic(m));
  }
}

TEST_CASE("is_valid_sequence diagnostics") {
  const auto dsm = oracle::case_from_pairs(3, {{1, 0}});
  CHECK(is_valid_sequence(dsm, ids({"n2", "n0", "n1"})).valid);

  auto d = is_valid_sequence(dsm, ids({"n0", "n0", "n1"}));
  CHECK_FALSE(d.valid);
  CHECK(d.duplicated == ids({"n0"}));
  CHECK(d.missing == ids({"n2"}));

  d = is_valid_sequence(dsm, ids({"n0", "n1", "zz"}));
  CHECK_FALSE(d.valid);
  CHECK(d.unknown == ids({"zz"}));

  d = is_valid_sequence(dsm, ids({"n0", "n1"}));
  CHECK_FALSE(d.valid);
  CHECK(d.wrong_length);
  CHECK_FALSE(d.message().empty());

  const std::vector<PrecedenceConstraint> c{{NodeId("n2"), NodeId("n0")}};
  CHECK_FALSE(is_valid_sequence(dsm, ids({"n0", "n1", "n2"}), c).valid);
  CHECK(is_valid_sequence(dsm, ids({"n2", "n0", "n1"}), c).valid);
}

TEST_CASE("scoring an invalid sequence throws") {
  const auto m = build_adjacency(oracle::case_from_pairs(3, {{1, 0}}));
  CHECK_THROWS_AS(score_sequence(m, ids({"n0", "n0", "n1"})), InvalidSequence);
  CHECK_THROWS_AS(to_permutation(m, ids({"n0", "n1"})), InvalidSequence);
}

TEST_CASE("permutation round trip") {
  const auto m = build_adjacency(oracle::case_from_pairs(4, {{1, 0}, {3, 2}}));
  const auto s = ids({"n3", "n1", "n0", "n2"});
  const auto p = to_permutation(m, s);
  CHECK(p == Permutation{3, 1, 0, 2});
  CHECK(to_sequence(m, p) == s);
  CHECK(score_permutation(m, p) == score_sequence(m, s));
}
