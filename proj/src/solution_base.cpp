#include "dsmseq/solution_base.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "dsmseq/rng.hpp"

namespace dsmseq {

std::string_view to_string(SolutionSource source) {
  switch (source) {
    case SolutionSource::InitialRandom: return "initial-random";
    case SolutionSource::Llm: return "llm";
    case SolutionSource::Ga: return "ga";
    case SolutionSource::Deterministic: return "deterministic";
  }
  return "unknown";
}

SolutionSource solution_source_from_string(std::string_view text) {
  if (text == "initial-random") return SolutionSource::InitialRandom;
  if (text == "llm") return SolutionSource::Llm;
  if (text == "ga") return SolutionSource::Ga;
  if (text == "deterministic") return SolutionSource::Deterministic;
  throw std::invalid_argument("unknown solution source '" + std::string(text) + "'");
}

SolutionBase::SolutionBase(AdjacencyMatrix matrix) : matrix_(std::move(matrix)) {}

std::string SolutionBase::key_of(const Sequence& s) {
  std::string key;
  for (const auto& id : s) {
    key += id.str();
    key.push_back('\x1f');
  }
  return key;
}

bool SolutionBase::contains(const Sequence& s) const { return keys_.contains(key_of(s)); }

bool SolutionBase::insert(SolutionRecord record) {
  record.score = score_sequence(matrix_, record.sequence);
  if (!keys_.insert(key_of(record.sequence)).second) return false;
  records_.push_back(std::move(record));
  return true;
}

namespace {

bool ranks_before(const SolutionRecord& a, const SolutionRecord& b) {
  if (a.score != b.score) return a.score < b.score;
  if (a.iteration_found != b.iteration_found) return a.iteration_found < b.iteration_found;
  return a.sequence < b.sequence;
}

}  // namespace

const SolutionRecord& SolutionBase::best() const {
  if (records_.empty()) throw std::logic_error("solution base is empty");
  return *std::min_element(records_.begin(), records_.end(), ranks_before);
}

std::vector<std::size_t> SolutionBase::ranked_indices() const {
  std::vector<std::size_t> idx(records_.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [this](std::size_t a, std::size_t b) { return ranks_before(records_[a], records_[b]); });
  return idx;
}

std::vector<SolutionRecord> SolutionBase::sample_for_prompt(const SamplingPolicy& policy, std::uint64_t seed) const {
  if (records_.empty()) throw std::logic_error("cannot sample from an empty solution base");
  if (policy.k_p < 1 || policy.k_q < 0) throw std::invalid_argument("sampling policy requires k_p >= 1 and k_q >= 0");

  auto ranked = ranked_indices();
  const auto top = std::min<std::size_t>(static_cast<std::size_t>(policy.k_p), ranked.size());
  std::vector<std::size_t> chosen(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(top));

  // Partial Fisher-Yates over the remainder yields a uniform draw without
  // replacement.
  std::vector<std::size_t> rest(ranked.begin() + static_cast<std::ptrdiff_t>(top), ranked.end());
  const auto extra = std::min<std::size_t>(static_cast<std::size_t>(policy.k_q), rest.size());
  Rng rng(seed);
  for (std::size_t i = 0; i < extra; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(rest.size() - i));
    std::swap(rest[i], rest[j]);
    chosen.push_back(rest[i]);
  }

  // Worst first; among equal scores the later insertion comes first so the
  // earliest record ends up closest to the end of the list.
  std::sort(chosen.begin(), chosen.end(), [this](std::size_t a, std::size_t b) {
    if (records_[a].score != records_[b].score) return records_[a].score > records_[b].score;
    return a > b;
  });

  std::vector<SolutionRecord> out;
  out.reserve(chosen.size());
  for (auto i : chosen) out.push_back(records_[i]);
  return out;
}

bool SolutionBase::should_terminate(const TerminationPolicy& policy, int iterations_done) const {
  if (iterations_done >= policy.max_iterations) return true;
  return policy.optimal_threshold && !records_.empty() && best().score <= *policy.optimal_threshold;
}

nlohmann::json SolutionBase::snapshot() const {
  auto out = nlohmann::json::array();
  for (const auto& r : records_) {
    auto seq = nlohmann::json::array();
    for (const auto& id : r.sequence) seq.push_back(id.str());
    out.push_back({{"sequence", std::move(seq)},
                   {"score", r.score},
                   {"iteration_found", r.iteration_found},
                   {"source", std::string(to_string(r.source))}});
  }
  return out;
}

}  // namespace dsmseq
