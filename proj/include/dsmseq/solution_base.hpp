#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "json.hpp"

#include "dsmseq/evaluator.hpp"

namespace dsmseq {

enum class SolutionSource { InitialRandom, Llm, Ga, Deterministic };

std::string_view to_string(SolutionSource source);
SolutionSource solution_source_from_string(std::string_view text);

struct SolutionRecord {
  Sequence sequence;
  Score score = 0;
  int iteration_found = 0;
  SolutionSource source = SolutionSource::InitialRandom;
};

struct SamplingPolicy {
  int k_p = 5;
  int k_q = 5;
};

struct TerminationPolicy {
  int max_iterations = 20;
  std::optional<Score> optimal_threshold;
};

/// Archive of every explored sequence. Each distinct sequence is stored once;
/// `unique_count()` always equals the number of stored records.
class SolutionBase {
 public:
  /// The base validates and scores against `matrix`; it keeps a copy.
  explicit SolutionBase(AdjacencyMatrix matrix);

  /// Inserts a record whose score is recomputed from the matrix. Returns
  /// false without modifying the base when the sequence is already stored.
  /// Throws InvalidSequence for non-permutations.
  bool insert(SolutionRecord record);

  bool contains(const Sequence& s) const;
  std::size_t unique_count() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }
  const std::vector<SolutionRecord>& records() const noexcept { return records_; }

  /// Lowest score; ties by earliest iteration_found, then lexicographic sequence.
  const SolutionRecord& best() const;

  /// Kp best records plus Kq drawn uniformly without replacement from the
  /// rest, returned worst first (descending score).
  std::vector<SolutionRecord> sample_for_prompt(const SamplingPolicy& policy, std::uint64_t seed) const;

  bool should_terminate(const TerminationPolicy& policy, int iterations_done) const;

  nlohmann::json snapshot() const;

 private:
  static std::string key_of(const Sequence& s);
  /// Indices of records in best() order.
  std::vector<std::size_t> ranked_indices() const;

  AdjacencyMatrix matrix_;
  std::vector<SolutionRecord> records_;
  std::unordered_set<std::string> keys_;
};

}  // namespace dsmseq
