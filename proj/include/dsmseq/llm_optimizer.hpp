#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

#include "dsmseq/dsm_model.hpp"
#include "dsmseq/evaluator.hpp"
#include "dsmseq/llm_client.hpp"
#include "dsmseq/solution_base.hpp"

namespace dsmseq {

enum class KnowledgeMode { With, Without };

std::string_view to_string(KnowledgeMode mode);

struct HistoricalSolution {
  /// Comma-joined ids, e.g. "lzOtR, yLlKi, GV9RJ".
  std::string solution;
  Score score = 0;
};

/// Everything a prompt is rendered from.
struct PromptContext {
  std::string network_description;
  std::vector<Node> nodes_with_descriptions;
  std::vector<NodeId> node_ids;
  /// Already shuffled.
  std::vector<Edge> edge_list;
  /// Worst first.
  std::vector<HistoricalSolution> historical;
  KnowledgeMode knowledge_mode = KnowledgeMode::With;
};

/// Assembles a context from a case and sampled records. The edge list is a
/// seeded shuffle of the case's edges.
PromptContext make_prompt_context(const DsmCase& dsm, const std::vector<SolutionRecord>& historical,
                                  KnowledgeMode mode, std::uint64_t edge_shuffle_seed);

/// Renders the optimization prompt. Throws std::invalid_argument when the
/// historical list is empty.
std::string build_prompt(const PromptContext& ctx);

/// Python-literal style quoting used inside prompts ('abc', or "it's").
std::string python_quote(std::string_view text);

enum class ParseFailure { MissingTags, NotPermutation };

std::string_view to_string(ParseFailure failure);

struct ParseError {
  ParseFailure kind;
  std::string detail;
};

using ParseResult = std::variant<Sequence, ParseError>;

/// Extracts the first <order>...</order> span, splits it on commas, trims
/// whitespace (and surrounding quotes) and validates the permutation.
ParseResult parse_order_response(std::string_view raw, const DsmCase& dsm);

struct OptimizerConfig {
  SamplingPolicy sampling{5, 5};
  TerminationPolicy termination{20, std::nullopt};
  KnowledgeMode knowledge_mode = KnowledgeMode::With;
  std::uint64_t seed = 0;
  int invalid_retry_budget = 2;
  /// Replace node ids with random 5-char ids before prompting.
  bool anonymize = true;
  /// Re-shuffle the edge list every iteration instead of once per run.
  bool reshuffle_edges_each_iteration = false;
  std::string model;
  /// Passed through to the provider untouched.
  nlohmann::json model_params = nlohmann::json::object();
  /// When set, prompts and responses are written here for audit.
  std::optional<std::filesystem::path> audit_dir;

  void validate() const;
};

/// Appended to the prompt when the previous answer could not be used.
std::string correction_line(const ParseError& error);

struct IterationTrace {
  int iteration = 0;
  std::string prompt_hash;
  std::string response_hash;
  /// Present when a valid sequence was obtained (in the caller's ids).
  std::optional<Sequence> sequence;
  std::optional<ParseFailure> failure;
  std::optional<Score> score;
  int attempts = 0;
  /// Valid answer that repeated a stored sequence.
  bool duplicate = false;
  std::size_t unique_count = 0;
  Score best_so_far = 0;
  /// Best sequence after this iteration (in the caller's ids).
  Sequence best_sequence;
};

nlohmann::json trace_entry_to_json(const IterationTrace& entry);
IterationTrace trace_entry_from_json(const nlohmann::json& j);
std::string trace_to_jsonl(const std::vector<IterationTrace>& trace);
std::vector<IterationTrace> trace_from_jsonl(std::string_view text);

struct OptimizationResult {
  SolutionRecord best;  // in the caller's ids
  std::vector<IterationTrace> trace;
  /// Full solution base in the caller's ids.
  nlohmann::json snapshot;
  bool aborted = false;
  std::string error;
  IdMapping anonymized_ids;  // caller id -> prompt id (empty without anonymization)
};

/// Generate -> validate -> score -> insert loop. Iteration 0 of the trace is
/// the random initial solution; every following entry is one LLM iteration.
/// Transport failures end the run early with `aborted` set.
OptimizationResult run_optimization(const DsmCase& dsm, const OptimizerConfig& cfg, ChatProvider& client);

/// Best-so-far score after `iterations` LLM iterations (clamped to the trace).
Score best_after_iterations(const std::vector<IterationTrace>& trace, int iterations);

}  // namespace dsmseq
