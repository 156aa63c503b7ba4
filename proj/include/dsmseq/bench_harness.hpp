#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "dsmseq/baselines_deterministic.hpp"
#include "dsmseq/baselines_ga.hpp"
#include "dsmseq/llm_optimizer.hpp"

namespace dsmseq {

enum class StdKind { Population, Sample };

struct Stats {
  double mean = 0.0;
  double std = 0.0;
  double best = 0.0;
};

/// Mean, standard deviation (population by default) and minimum.
/// Throws std::invalid_argument on an empty list.
Stats aggregate_stats(std::span<const double> scores, StdKind kind = StdKind::Population);

/// "8.1±0.3" style, one decimal.
std::string format_mean_std(const Stats& stats);

struct LlmProviderSpec {
  /// "env": OpenAI-compatible provider configured from the environment.
  /// "scripted": every run replays `responses` from the start.
  std::string kind = "env";
  std::vector<std::string> responses;
  double requests_per_minute = 0.0;
};

struct ExperimentSpec {
  std::vector<std::filesystem::path> cases;
  /// llm-with-knowledge, llm-without-knowledge, ga-{exploration,exploitation,
  /// balanced}, det-{outin,eig,exp,resolvent,visibility}.
  std::vector<std::string> methods;
  int runs_per_method = 10;
  std::vector<int> trial_budgets{1, 5, 20};
  /// Run r of every cell uses seed base_seed + r.
  std::uint64_t base_seed = 0;
  std::filesystem::path output_dir = "results";
  /// Deterministic methods are reported in each listed direction; ascending
  /// rows carry an "-asc" suffix.
  std::vector<RankDirection> det_directions{RankDirection::Descending, RankDirection::Ascending};
  double resolvent_delta = 0.025;
  std::size_t ga_unique_window = 10000;
  /// Overrides the presets' 2000 generations when set (smoke tests).
  std::optional<int> ga_generations;
  StdKind std_kind = StdKind::Population;
  SamplingPolicy sampling{5, 5};
  int invalid_retry_budget = 2;
  bool use_known_optimum_threshold = true;
  LlmProviderSpec provider;
  /// LLM iterations rendered as matrix snapshots for run 0 of each LLM cell.
  std::vector<int> trajectory_iterations;
  int parallelism = 1;

  void validate() const;
};

nlohmann::json spec_to_json(const ExperimentSpec& spec);
/// Accepts a spec document or a manifest.json (whose "spec" key is used).
ExperimentSpec spec_from_json(const nlohmann::json& doc);
ExperimentSpec load_spec(const std::filesystem::path& path);

struct CellResult {
  std::string case_name;
  std::string method;
  /// LLM: iteration budget. GA: unique-solution window. Deterministic: 1.
  int budget = 1;
  std::vector<std::uint64_t> seeds;
  /// Parallel to seeds; nullopt marks a failed run.
  std::vector<std::optional<double>> scores;
  std::vector<std::string> errors;
  std::optional<Stats> stats;

  bool failed() const { return !stats.has_value(); }
  std::vector<double> valid_scores() const;
};

struct ResultTable {
  std::vector<CellResult> cells;

  const CellResult* find(const std::string& case_name, const std::string& method, int budget) const;
};

/// Builds the chat provider for one run of an LLM cell.
using ProviderFactory =
    std::function<std::unique_ptr<ChatProvider>(const std::string& case_name, const std::string& method, int run)>;

ProviderFactory provider_factory_from_spec(const LlmProviderSpec& spec);

/// Runs every (case, method, run) cell and writes results.csv, convergence/,
/// traces/, figures/ and manifest.json below spec.output_dir.
ResultTable run_experiment(const ExperimentSpec& spec, ProviderFactory factory = {});

std::string results_to_csv(const ResultTable& table);

/// Step curve of best-so-far over unique solutions from an LLM trace: one
/// point per unique-count value.
std::vector<ConvergencePoint> convergence_curve(const std::vector<IterationTrace>& trace);
/// Full best-so-far series of a GA run, truncated to `window` points.
std::vector<ConvergencePoint> convergence_curve(const GaResult& result, std::size_t window);

struct MeanCurvePoint {
  std::size_t unique_count = 0;
  double mean_best = 0.0;
};

/// Per-x mean of best-so-far across runs. A run shorter than x contributes
/// its final value.
std::vector<MeanCurvePoint> merge_curves(const std::vector<std::vector<ConvergencePoint>>& runs);

std::string curve_to_csv(const std::vector<ConvergencePoint>& curve);
std::string curve_to_csv(const std::vector<MeanCurvePoint>& curve);

struct TrajectorySnapshot {
  int iteration = 0;
  Sequence sequence;
  AdjacencyMatrix reordered;
  Score feedback = 0;
  std::string svg;
  std::string csv;
};

/// Reordered-matrix snapshots of the best sequence at each requested
/// iteration. Throws std::out_of_range for an iteration absent from the trace.
std::vector<TrajectorySnapshot> render_trajectory(const DsmCase& dsm, const std::vector<IterationTrace>& trace,
                                                  std::span<const int> iterations);

/// Writes <stem>_iter<k>.svg and .csv for every snapshot.
void write_trajectory(const std::vector<TrajectorySnapshot>& snapshots, const std::filesystem::path& dir,
                      const std::string& stem);

/// Writes `content` to `path` through a temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace dsmseq
