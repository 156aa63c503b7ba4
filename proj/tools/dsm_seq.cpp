// dsm-seq: command-line front end for DSM sequencing experiments.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "dsmseq/baselines_deterministic.hpp"
#include "dsmseq/baselines_ga.hpp"
#include "dsmseq/bench_harness.hpp"
#include "dsmseq/dsm_model.hpp"
#include "dsmseq/evaluator.hpp"
#include "dsmseq/llm_optimizer.hpp"

namespace {

using namespace dsmseq;
using nlohmann::json;

json ids_json(const Sequence& s) {
  auto out = json::array();
  for (const auto& id : s) out.push_back(id.str());
  return out;
}

Sequence parse_order(const std::string& text) {
  Sequence s;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    const auto b = tok.find_first_not_of(" \t");
    const auto e = tok.find_last_not_of(" \t");
    if (b != std::string::npos) s.emplace_back(tok.substr(b, e - b + 1));
  }
  return s;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_or_print(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::cout << content;
  } else {
    write_file_atomic(path, content);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DSM sequencing toolkit: feedback-loop minimization with LLM, GA and deterministic methods"};
  app.require_subcommand(1);

  // run
  std::string spec_path, out_override;
  auto* run = app.add_subcommand("run", "Run a seeded multi-method experiment grid");
  run->add_option("--spec", spec_path, "Experiment spec or manifest JSON")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_override, "Override the output directory");

  // score
  std::string case_path, order;
  auto* score = app.add_subcommand("score", "Count feedback loops of an order");
  score->add_option("--case", case_path, "Case JSON")->required()->check(CLI::ExistingFile);
  score->add_option("--order", order, "Comma-separated node ids")->required();

  // baseline
  std::string method;
  std::uint64_t seed = 0;
  bool ascending = false;
  double delta = 0.025;
  auto* baseline = app.add_subcommand("baseline", "Deterministic ordering (outin, eig, exp, resolvent, visibility)");
  baseline->add_option("method", method, "Method name")->required();
  baseline->add_option("--case", case_path, "Case JSON")->required()->check(CLI::ExistingFile);
  baseline->add_option("--seed", seed, "Tie-break seed");
  baseline->add_flag("--ascending", ascending, "Rank ascending instead of descending");
  baseline->add_option("--delta", delta, "Resolvent attenuation");

  // ga
  std::string preset = "balanced", convergence_out;
  std::optional<int> generations, population, tournament;
  std::optional<double> indpb, cxpb, mutpb;
  bool pmx = false;
  auto* ga = app.add_subcommand("ga", "Permutation genetic algorithm");
  ga->add_option("--case", case_path, "Case JSON")->required()->check(CLI::ExistingFile);
  ga->add_option("--preset", preset, "exploration | exploitation | balanced");
  ga->add_option("--seed", seed, "Seed");
  ga->add_option("--generations", generations);
  ga->add_option("--population", population);
  ga->add_option("--tournament", tournament);
  ga->add_option("--indpb", indpb);
  ga->add_option("--cxpb", cxpb);
  ga->add_option("--mutpb", mutpb);
  ga->add_flag("--pmx", pmx, "Use partially mapped crossover instead of ordered crossover");
  ga->add_option("--convergence", convergence_out, "Write the unique_count,best_score CSV here");

  // llm
  std::string knowledge = "on", trace_out, audit_dir, script_path, model;
  int trials = 20, kp = 5, kq = 5, retries = 2;
  bool use_threshold = false;
  bool keep_ids = false;
  auto* llm = app.add_subcommand("llm", "LLM-driven iterative optimization");
  llm->add_option("--case", case_path, "Case JSON")->required()->check(CLI::ExistingFile);
  llm->add_option("--knowledge", knowledge, "on | off")->check(CLI::IsMember({"on", "off"}));
  llm->add_option("--trials", trials, "LLM iterations");
  llm->add_option("--seed", seed, "Seed");
  llm->add_option("--kp", kp, "Top solutions per prompt");
  llm->add_option("--kq", kq, "Random solutions per prompt");
  llm->add_option("--retries", retries, "Re-prompts per iteration after an unusable answer");
  llm->add_flag("--stop-at-known-optimum", use_threshold, "Stop when the case's known_optimum is reached");
  llm->add_flag("--no-anonymize", keep_ids, "Show the case's own ids in prompts");
  llm->add_option("--model", model, "Model name (defaults to DSMSEQ_LLM_MODEL)");
  llm->add_option("--trace", trace_out, "Write the JSONL trace here");
  llm->add_option("--audit-dir", audit_dir, "Dump prompts and responses here");
  llm->add_option("--script", script_path, "JSON array of canned responses (offline replay)");

  // oracle
  auto* oracle = app.add_subcommand("oracle", "Exact optimum by exhaustive search (n <= 10)");
  oracle->add_option("--case", case_path, "Case JSON")->required()->check(CLI::ExistingFile);

  // metrics
  auto* metrics = app.add_subcommand("metrics", "Network characterization metrics");
  metrics->add_option("--case", case_path, "Case JSON")->required()->check(CLI::ExistingFile);

  // render
  std::string trace_in, out_dir = "figures";
  std::vector<int> iterations;
  auto* render = app.add_subcommand("render", "Reordered-matrix snapshots from an LLM trace");
  render->add_option("--case", case_path, "Case JSON")->required()->check(CLI::ExistingFile);
  render->add_option("--trace", trace_in, "JSONL trace")->required()->check(CLI::ExistingFile);
  render->add_option("--iterations", iterations, "Iterations to render")->required()->delimiter(',');
  render->add_option("--out", out_dir, "Output directory");

  // anonymize
  std::string case_out;
  auto* anonymize = app.add_subcommand("anonymize", "Replace node ids with random 5-char ids");
  anonymize->add_option("--case", case_path, "Case JSON")->required()->check(CLI::ExistingFile);
  anonymize->add_option("--seed", seed, "Seed");
  anonymize->add_option("--out", case_out, "Output case file (stdout if omitted)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      auto spec = load_spec(spec_path);
      if (!out_override.empty()) spec.output_dir = out_override;
      const auto table = run_experiment(spec);
      std::cout << results_to_csv(table);
      for (const auto& c : table.cells)
        if (c.failed()) std::cerr << "warning: cell " << c.case_name << "/" << c.method << " failed\n";
    } else if (*score) {
      const auto dsm = load_case(case_path);
      const auto matrix = build_adjacency(dsm);
      const auto seq = parse_order(order);
      const auto diag = is_valid_sequence(dsm, seq);
      if (!diag.valid) {
        std::cerr << "invalid order: " << diag.message() << "\n";
        return 2;
      }
      std::cout << json{{"score", score_sequence(matrix, seq)}, {"edges", dsm.edges().size()}}.dump(2) << "\n";
    } else if (*baseline) {
      const auto dsm = load_case(case_path);
      const auto matrix = build_adjacency(dsm);
      RankingOptions opts{ascending ? RankDirection::Ascending : RankDirection::Descending, delta};
      const auto ranking = deterministic_order(deterministic_method_from_string(method), matrix, seed, opts);
      auto out = ranking_to_json(ranking, matrix);
      out["score"] = score_sequence(matrix, ranking.order);
      std::cout << out.dump(2) << "\n";
    } else if (*ga) {
      const auto dsm = load_case(case_path);
      const auto matrix = build_adjacency(dsm);
      auto cfg = preset_config(ga_preset_from_string(preset), seed);
      if (generations) cfg.generations = *generations;
      if (population) cfg.population_size = *population;
      if (tournament) cfg.tournament_size = *tournament;
      if (indpb) cfg.indpb = *indpb;
      if (cxpb) cfg.cxpb = *cxpb;
      if (mutpb) cfg.mutpb = *mutpb;
      if (pmx) cfg.crossover = CrossoverKind::PartiallyMapped;
      const auto result = run_ga(matrix, cfg);
      if (!convergence_out.empty()) write_file_atomic(convergence_out, curve_to_csv(convergence_curve(result, SIZE_MAX)));
      std::cout << json{{"score", result.best.score},
                        {"sequence", ids_json(result.best.sequence)},
                        {"unique_solutions", result.unique_count()},
                        {"evaluations", result.evaluations},
                        {"score_at_10000_unique", result.best_at_unique(10000)}}
                       .dump(2)
                << "\n";
    } else if (*llm) {
      const auto dsm = load_case(case_path);
      OptimizerConfig cfg;
      cfg.sampling = {kp, kq};
      cfg.termination.max_iterations = trials;
      if (use_threshold) cfg.termination.optimal_threshold = dsm.known_optimum();
      cfg.anonymize = !keep_ids;
      cfg.knowledge_mode = knowledge == "on" ? KnowledgeMode::With : KnowledgeMode::Without;
      cfg.seed = seed;
      cfg.invalid_retry_budget = retries;
      cfg.model = model;
      if (!audit_dir.empty()) cfg.audit_dir = audit_dir;
      std::unique_ptr<ChatProvider> provider;
      if (!script_path.empty()) {
        provider = std::make_unique<ScriptedProvider>(json::parse(read_file(script_path)).get<std::vector<std::string>>());
      } else {
        provider = std::make_unique<OpenAiProvider>(provider_config_from_env());
      }
      const auto result = run_optimization(dsm, cfg, *provider);
      if (!trace_out.empty()) write_file_atomic(trace_out, trace_to_jsonl(result.trace));
      std::cout << json{{"score", result.best.score},
                        {"sequence", ids_json(result.best.sequence)},
                        {"iterations", result.trace.back().iteration},
                        {"unique_solutions", result.trace.back().unique_count},
                        {"aborted", result.aborted},
                        {"error", result.error}}
                       .dump(2)
                << "\n";
      if (result.aborted) return 3;
    } else if (*oracle) {
      const auto dsm = load_case(case_path);
      const auto best = brute_force_optimum(build_adjacency(dsm));
      std::cout << json{{"score", best.score}, {"sequence", ids_json(best.sequence)}}.dump(2) << "\n";
    } else if (*metrics) {
      const auto m = network_metrics(load_case(case_path));
      if (m.disconnected) std::cerr << "warning: graph is disconnected; path metrics use the largest component\n";
      std::cout << metrics_to_json(m).dump(2) << "\n";
    } else if (*render) {
      const auto dsm = load_case(case_path);
      const auto trace = trace_from_jsonl(read_file(trace_in));
      const auto snaps = render_trajectory(dsm, trace, iterations);
      write_trajectory(snaps, out_dir, std::filesystem::path(trace_in).stem().string());
      for (const auto& s : snaps) std::cout << "iteration " << s.iteration << ": feedback=" << s.feedback << "\n";
    } else if (*anonymize) {
      const auto anon = anonymize_ids(load_case(case_path), seed);
      write_or_print(case_out, case_to_json(anon.dsm).dump(2) + "\n");
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
