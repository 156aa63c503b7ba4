#include "dsmseq/bench_harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "dsmseq/hashing.hpp"

namespace dsmseq {

namespace fs = std::filesystem;

namespace {

std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string_view direction_name(RankDirection d) { return d == RankDirection::Descending ? "descending" : "ascending"; }

RankDirection direction_from_name(std::string_view s) {
  if (s == "descending") return RankDirection::Descending;
  if (s == "ascending") return RankDirection::Ascending;
  throw std::invalid_argument("unknown rank direction '" + std::string(s) + "'");
}

enum class MethodFamily { Llm, Ga, Det };

struct MethodInfo {
  MethodFamily family;
  KnowledgeMode knowledge = KnowledgeMode::With;
  GaPreset preset = GaPreset::Balanced;
  DeterministicMethod det = DeterministicMethod::OutInDegree;
};

MethodInfo parse_method(const std::string& name) {
  if (name == "llm-with-knowledge") return {MethodFamily::Llm, KnowledgeMode::With};
  if (name == "llm-without-knowledge") return {MethodFamily::Llm, KnowledgeMode::Without};
  if (name.rfind("ga-", 0) == 0) return {MethodFamily::Ga, KnowledgeMode::With, ga_preset_from_string(name.substr(3))};
  if (name.rfind("det-", 0) == 0) {
    return {MethodFamily::Det, KnowledgeMode::With, GaPreset::Balanced, deterministic_method_from_string(name.substr(4))};
  }
  throw std::invalid_argument("unknown method '" + name + "'");
}

// One schedulable piece of work: every run of one method on one case.
struct Unit {
  std::size_t case_index;
  std::string method;  // as listed in the spec
  MethodInfo info;
  RankDirection direction = RankDirection::Descending;
  std::string label;  // method column in results
};

struct UnitOutput {
  std::vector<CellResult> cells;
  std::map<std::string, std::string> files;  // relative path -> content
};

}  // namespace

Stats aggregate_stats(std::span<const double> scores, StdKind kind) {
  if (scores.empty()) throw std::invalid_argument("aggregate_stats needs at least one score");
  const double n = static_cast<double>(scores.size());
  const double mean = std::accumulate(scores.begin(), scores.end(), 0.0) / n;
  double ss = 0.0;
  for (double s : scores) ss += (s - mean) * (s - mean);
  const double denom = kind == StdKind::Population ? n : std::max(1.0, n - 1.0);
  return {mean, std::sqrt(ss / denom), *std::min_element(scores.begin(), scores.end())};
}

std::string format_mean_std(const Stats& stats) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f±%.1f", stats.mean, stats.std);
  return buf;
}

void ExperimentSpec::validate() const {
  if (cases.empty()) throw std::invalid_argument("experiment needs at least one case");
  if (methods.empty()) throw std::invalid_argument("experiment needs at least one method");
  if (runs_per_method < 1) throw std::invalid_argument("runs_per_method must be >= 1");
  for (const auto& m : methods) parse_method(m);
  for (int b : trial_budgets)
    if (b < 1) throw std::invalid_argument("trial budgets must be >= 1");
  if (det_directions.empty()) throw std::invalid_argument("det_directions must not be empty");
  if (ga_unique_window < 1) throw std::invalid_argument("ga_unique_window must be >= 1");
  if (ga_generations && *ga_generations < 1) throw std::invalid_argument("ga_generations must be >= 1");
  if (parallelism < 1) throw std::invalid_argument("parallelism must be >= 1");
  if (sampling.k_p < 1 || sampling.k_q < 0) throw std::invalid_argument("sampling requires k_p >= 1 and k_q >= 0");
}

nlohmann::json spec_to_json(const ExperimentSpec& spec) {
  nlohmann::json j;
  j["cases"] = nlohmann::json::array();
  for (const auto& c : spec.cases) j["cases"].push_back(c.string());
  j["methods"] = spec.methods;
  j["runs_per_method"] = spec.runs_per_method;
  j["trial_budgets"] = spec.trial_budgets;
  j["base_seed"] = spec.base_seed;
  j["output_dir"] = spec.output_dir.string();
  j["det_directions"] = nlohmann::json::array();
  for (auto d : spec.det_directions) j["det_directions"].push_back(std::string(direction_name(d)));
  j["resolvent_delta"] = spec.resolvent_delta;
  j["ga_unique_window"] = spec.ga_unique_window;
  j["ga_generations"] = spec.ga_generations ? nlohmann::json(*spec.ga_generations) : nlohmann::json(nullptr);
  j["std"] = spec.std_kind == StdKind::Population ? "population" : "sample";
  j["k_p"] = spec.sampling.k_p;
  j["k_q"] = spec.sampling.k_q;
  j["invalid_retry_budget"] = spec.invalid_retry_budget;
  j["use_known_optimum_threshold"] = spec.use_known_optimum_threshold;
  j["provider"] = {{"kind", spec.provider.kind},
                   {"responses", spec.provider.responses},
                   {"requests_per_minute", spec.provider.requests_per_minute}};
  j["trajectory_iterations"] = spec.trajectory_iterations;
  j["parallelism"] = spec.parallelism;
  return j;
}

ExperimentSpec spec_from_json(const nlohmann::json& input) {
  const auto& doc = input.contains("spec") ? input["spec"] : input;
  ExperimentSpec s;
  for (const auto& c : doc.at("cases")) s.cases.emplace_back(c.get<std::string>());
  s.methods = doc.at("methods").get<std::vector<std::string>>();
  s.runs_per_method = doc.value("runs_per_method", s.runs_per_method);
  if (doc.contains("trial_budgets")) s.trial_budgets = doc["trial_budgets"].get<std::vector<int>>();
  s.base_seed = doc.value("base_seed", s.base_seed);
  if (doc.contains("output_dir")) s.output_dir = doc["output_dir"].get<std::string>();
  if (doc.contains("det_directions")) {
    s.det_directions.clear();
    for (const auto& d : doc["det_directions"]) s.det_directions.push_back(direction_from_name(d.get<std::string>()));
  }
  s.resolvent_delta = doc.value("resolvent_delta", s.resolvent_delta);
  s.ga_unique_window = doc.value("ga_unique_window", s.ga_unique_window);
  if (doc.contains("ga_generations") && !doc["ga_generations"].is_null()) s.ga_generations = doc["ga_generations"].get<int>();
  if (doc.contains("std")) {
    const auto kind = doc["std"].get<std::string>();
    if (kind != "population" && kind != "sample") throw std::invalid_argument("std must be 'population' or 'sample'");
    s.std_kind = kind == "population" ? StdKind::Population : StdKind::Sample;
  }
  s.sampling.k_p = doc.value("k_p", s.sampling.k_p);
  s.sampling.k_q = doc.value("k_q", s.sampling.k_q);
  s.invalid_retry_budget = doc.value("invalid_retry_budget", s.invalid_retry_budget);
  s.use_known_optimum_threshold = doc.value("use_known_optimum_threshold", s.use_known_optimum_threshold);
  if (doc.contains("provider")) {
    const auto& p = doc["provider"];
    s.provider.kind = p.value("kind", s.provider.kind);
    if (p.contains("responses")) s.provider.responses = p["responses"].get<std::vector<std::string>>();
    s.provider.requests_per_minute = p.value("requests_per_minute", 0.0);
  }
  if (doc.contains("trajectory_iterations")) s.trajectory_iterations = doc["trajectory_iterations"].get<std::vector<int>>();
  s.parallelism = doc.value("parallelism", s.parallelism);
  s.validate();
  return s;
}

ExperimentSpec load_spec(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open spec " + path.string());
  auto spec = spec_from_json(nlohmann::json::parse(in));
  // Relative case paths are resolved against the spec file's directory.
  for (auto& c : spec.cases) {
    if (c.is_relative() && !fs::exists(c)) c = path.parent_path() / c;
  }
  return spec;
}

std::vector<double> CellResult::valid_scores() const {
  std::vector<double> out;
  for (const auto& s : scores)
    if (s) out.push_back(*s);
  return out;
}

const CellResult* ResultTable::find(const std::string& case_name, const std::string& method, int budget) const {
  for (const auto& c : cells)
    if (c.case_name == case_name && c.method == method && c.budget == budget) return &c;
  return nullptr;
}

ProviderFactory provider_factory_from_spec(const LlmProviderSpec& spec) {
  if (spec.kind == "scripted") {
    return [responses = spec.responses](const std::string&, const std::string&, int) -> std::unique_ptr<ChatProvider> {
      return std::make_unique<ScriptedProvider>(responses);
    };
  }
  if (spec.kind == "env") {
    return [rpm = spec.requests_per_minute](const std::string&, const std::string&, int) -> std::unique_ptr<ChatProvider> {
      auto cfg = provider_config_from_env();
      cfg.requests_per_minute = rpm;
      return std::make_unique<OpenAiProvider>(cfg);
    };
  }
  throw std::invalid_argument("unknown provider kind '" + spec.kind + "' (expected env or scripted)");
}

std::vector<ConvergencePoint> convergence_curve(const std::vector<IterationTrace>& trace) {
  std::vector<ConvergencePoint> curve;
  for (const auto& e : trace) {
    if (!curve.empty() && e.unique_count == curve.back().unique_count) continue;
    curve.push_back({e.unique_count, e.best_so_far});
  }
  return curve;
}

std::vector<ConvergencePoint> convergence_curve(const GaResult& result, std::size_t window) {
  std::vector<ConvergencePoint> curve;
  const auto n = std::min(window, result.best_so_far.size());
  curve.reserve(n);
  for (std::size_t k = 0; k < n; ++k) curve.push_back({k + 1, result.best_so_far[k]});
  return curve;
}

std::vector<MeanCurvePoint> merge_curves(const std::vector<std::vector<ConvergencePoint>>& runs) {
  std::size_t max_x = 0;
  for (const auto& r : runs)
    if (!r.empty()) max_x = std::max(max_x, r.back().unique_count);
  std::vector<MeanCurvePoint> out;
  std::vector<std::size_t> cursor(runs.size(), 0);
  for (std::size_t x = 1; x <= max_x; ++x) {
    double total = 0.0;
    std::size_t counted = 0;
    for (std::size_t r = 0; r < runs.size(); ++r) {
      const auto& run = runs[r];
      if (run.empty() || run.front().unique_count > x) continue;
      while (cursor[r] + 1 < run.size() && run[cursor[r] + 1].unique_count <= x) ++cursor[r];
      total += run[cursor[r]].best_score;
      ++counted;
    }
    if (counted > 0) out.push_back({x, total / static_cast<double>(counted)});
  }
  return out;
}

std::string curve_to_csv(const std::vector<ConvergencePoint>& curve) {
  std::string out = "unique_count,best_score\n";
  for (const auto& p : curve) out += std::to_string(p.unique_count) + "," + std::to_string(p.best_score) + "\n";
  return out;
}

std::string curve_to_csv(const std::vector<MeanCurvePoint>& curve) {
  std::string out = "unique_count,mean_best_score\n";
  for (const auto& p : curve) out += std::to_string(p.unique_count) + "," + fixed(p.mean_best) + "\n";
  return out;
}

namespace {

std::string snapshot_csv(const AdjacencyMatrix& m) {
  // 0 = no dependency, 1 = dependency on/below the diagonal, 2 = feedback.
  std::string out = "id";
  for (const auto& id : m.ids()) out += "," + csv_field(id.str());
  out += "\n";
  for (std::size_t i = 0; i < m.size(); ++i) {
    out += csv_field(m.ids()[i].str());
    for (std::size_t j = 0; j < m.size(); ++j) {
      const int v = m.at(i, j) ? (j > i ? 2 : 1) : 0;
      out += "," + std::to_string(v);
    }
    out += "\n";
  }
  return out;
}

std::string snapshot_svg(const AdjacencyMatrix& m, int iteration, Score feedback) {
  constexpr int kCell = 18;
  constexpr int kMargin = 70;
  constexpr int kTitle = 28;
  const int n = static_cast<int>(m.size());
  const int width = kMargin + n * kCell + 10;
  const int height = kTitle + kMargin + n * kCell + 10;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"monospace\" font-size=\"10\">\n";
  svg << "<text x=\"4\" y=\"18\" font-size=\"14\">iteration " << iteration << ", feedback=" << feedback << "</text>\n";
  const int ox = kMargin;
  const int oy = kTitle + kMargin;
  for (int k = 0; k < n; ++k) {
    const auto label = xml_escape(m.ids()[static_cast<std::size_t>(k)].str());
    svg << "<text x=\"" << ox - 4 << "\" y=\"" << oy + k * kCell + kCell - 5 << "\" text-anchor=\"end\">" << label
        << "</text>\n";
    svg << "<text transform=\"translate(" << ox + k * kCell + kCell - 5 << "," << oy - 4
        << ") rotate(-90)\">" << label << "</text>\n";
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const bool on = m.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) != 0;
      const char* fill = i == j ? "#bfbfbf" : on ? (j > i ? "#c00000" : "#1f4e79") : "#ffffff";
      svg << "<rect x=\"" << ox + j * kCell << "\" y=\"" << oy + i * kCell << "\" width=\"" << kCell << "\" height=\""
          << kCell << "\" fill=\"" << fill << "\" stroke=\"#d9d9d9\"/>\n";
    }
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace

std::vector<TrajectorySnapshot> render_trajectory(const DsmCase& dsm, const std::vector<IterationTrace>& trace,
                                                  std::span<const int> iterations) {
  const auto matrix = build_adjacency(dsm);
  std::vector<TrajectorySnapshot> out;
  for (int it : iterations) {
    const auto entry = std::find_if(trace.begin(), trace.end(), [it](const auto& e) { return e.iteration == it; });
    if (entry == trace.end()) throw std::out_of_range("iteration " + std::to_string(it) + " is not in the trace");
    TrajectorySnapshot snap;
    snap.iteration = it;
    snap.sequence = entry->best_sequence;
    snap.reordered = reorder_matrix(matrix, snap.sequence);
    snap.feedback = upper_triangle_count(snap.reordered);
    snap.svg = snapshot_svg(snap.reordered, it, snap.feedback);
    snap.csv = snapshot_csv(snap.reordered);
    out.push_back(std::move(snap));
  }
  return out;
}

void write_file_atomic(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
  }
  fs::rename(tmp, path);
}

void write_trajectory(const std::vector<TrajectorySnapshot>& snapshots, const fs::path& dir, const std::string& stem) {
  for (const auto& s : snapshots) {
    const auto base = stem + "_iter" + std::to_string(s.iteration);
    write_file_atomic(dir / (base + ".svg"), s.svg);
    write_file_atomic(dir / (base + ".csv"), s.csv);
  }
}

std::string results_to_csv(const ResultTable& table) {
  std::string out = "case,method,budget,runs,failed_runs,mean,std,best,formatted,scores\n";
  for (const auto& c : table.cells) {
    const auto valid = c.valid_scores();
    std::string scores;
    for (std::size_t r = 0; r < c.scores.size(); ++r) {
      if (r) scores += ";";
      scores += c.scores[r] ? fixed(*c.scores[r], 1) : "failed";
    }
    out += csv_field(c.case_name) + "," + csv_field(c.method) + "," + std::to_string(c.budget) + "," +
           std::to_string(c.scores.size()) + "," + std::to_string(c.scores.size() - valid.size()) + ",";
    if (c.stats) {
      out += fixed(c.stats->mean) + "," + fixed(c.stats->std) + "," + fixed(c.stats->best) + "," +
             format_mean_std(*c.stats);
    } else {
      out += ",,,failed";
    }
    out += "," + scores + "\n";
  }
  return out;
}

namespace {

std::string cell_stem(const std::string& case_name, const std::string& label) { return case_name + "__" + label; }

void finalize(CellResult& cell, StdKind kind) {
  const auto valid = cell.valid_scores();
  if (!valid.empty()) cell.stats = aggregate_stats(valid, kind);
}

UnitOutput run_unit(const ExperimentSpec& spec, const Unit& unit, const DsmCase& dsm, const std::string& case_name,
                    const ProviderFactory& factory) {
  UnitOutput out;
  const auto matrix = build_adjacency(dsm);
  const auto stem = cell_stem(case_name, unit.label);
  std::vector<std::uint64_t> seeds;
  for (int r = 0; r < spec.runs_per_method; ++r) seeds.push_back(spec.base_seed + static_cast<std::uint64_t>(r));

  switch (unit.info.family) {
    case MethodFamily::Det: {
      CellResult cell{case_name, unit.label, 1, seeds, {}, {}, {}};
      RankingOptions opts{unit.direction, spec.resolvent_delta};
      std::string trace;
      for (auto seed : seeds) {
        try {
          const auto ranking = deterministic_order(unit.info.det, matrix, seed, opts);
          const auto score = score_sequence(matrix, ranking.order);
          cell.scores.emplace_back(score);
          cell.errors.emplace_back();
          auto j = ranking_to_json(ranking, matrix);
          j["seed"] = seed;
          j["score"] = score;
          trace += j.dump() + "\n";
        } catch (const std::exception& e) {
          cell.scores.emplace_back(std::nullopt);
          cell.errors.emplace_back(e.what());
        }
      }
      out.files["traces/" + stem + ".jsonl"] = trace;
      finalize(cell, spec.std_kind);
      out.cells.push_back(std::move(cell));
      break;
    }
    case MethodFamily::Ga: {
      CellResult cell{case_name, unit.label, static_cast<int>(spec.ga_unique_window), seeds, {}, {}, {}};
      std::vector<std::vector<ConvergencePoint>> curves;
      for (std::size_t r = 0; r < seeds.size(); ++r) {
        auto cfg = preset_config(unit.info.preset, seeds[r]);
        if (spec.ga_generations) cfg.generations = *spec.ga_generations;
        const auto result = run_ga(matrix, cfg);
        cell.scores.emplace_back(result.best_at_unique(spec.ga_unique_window));
        cell.errors.emplace_back();
        auto curve = convergence_curve(result, spec.ga_unique_window);
        out.files["convergence/" + stem + "__run" + std::to_string(r) + ".csv"] = curve_to_csv(curve);
        std::string trace;
        for (std::size_t g = 0; g < result.generation_best.size(); ++g) {
          trace += nlohmann::json{{"generation", g}, {"population_best", result.generation_best[g]}}.dump() + "\n";
        }
        out.files["traces/" + stem + "__run" + std::to_string(r) + ".jsonl"] = trace;
        curves.push_back(std::move(curve));
      }
      out.files["convergence/" + stem + "__mean.csv"] = curve_to_csv(merge_curves(curves));
      finalize(cell, spec.std_kind);
      out.cells.push_back(std::move(cell));
      break;
    }
    case MethodFamily::Llm: {
      auto budgets = spec.trial_budgets;
      std::sort(budgets.begin(), budgets.end());
      budgets.erase(std::unique(budgets.begin(), budgets.end()), budgets.end());
      std::vector<CellResult> cells;
      for (int b : budgets) cells.push_back({case_name, unit.label, b, seeds, {}, {}, {}});
      std::vector<std::vector<ConvergencePoint>> curves;

      for (std::size_t r = 0; r < seeds.size(); ++r) {
        OptimizerConfig cfg;
        cfg.sampling = spec.sampling;
        cfg.termination.max_iterations = budgets.back();
        if (spec.use_known_optimum_threshold) cfg.termination.optimal_threshold = dsm.known_optimum();
        cfg.knowledge_mode = unit.info.knowledge;
        cfg.seed = seeds[r];
        cfg.invalid_retry_budget = spec.invalid_retry_budget;
        std::string error;
        std::optional<OptimizationResult> result;
        try {
          auto provider = factory(case_name, unit.method, static_cast<int>(r));
          result = run_optimization(dsm, cfg, *provider);
          if (result->aborted) error = result->error;
        } catch (const std::exception& e) {
          error = e.what();
        }
        if (result) {
          out.files["traces/" + stem + "__run" + std::to_string(r) + ".jsonl"] = trace_to_jsonl(result->trace);
          if (error.empty()) {
            auto curve = convergence_curve(result->trace);
            out.files["convergence/" + stem + "__run" + std::to_string(r) + ".csv"] = curve_to_csv(curve);
            curves.push_back(std::move(curve));
            if (r == 0 && !spec.trajectory_iterations.empty()) {
              std::vector<int> wanted;
              for (int it : spec.trajectory_iterations)
                if (it <= result->trace.back().iteration) wanted.push_back(it);
              for (const auto& snap : render_trajectory(dsm, result->trace, wanted)) {
                const auto base = "figures/" + stem + "__run0_iter" + std::to_string(snap.iteration);
                out.files[base + ".svg"] = snap.svg;
                out.files[base + ".csv"] = snap.csv;
              }
            }
          }
        }
        for (std::size_t b = 0; b < budgets.size(); ++b) {
          if (error.empty()) {
            cells[b].scores.emplace_back(best_after_iterations(result->trace, budgets[b]));
          } else {
            cells[b].scores.emplace_back(std::nullopt);
          }
          cells[b].errors.push_back(error);
        }
      }
      if (!curves.empty()) out.files["convergence/" + stem + "__mean.csv"] = curve_to_csv(merge_curves(curves));
      for (auto& c : cells) {
        finalize(c, spec.std_kind);
        out.cells.push_back(std::move(c));
      }
      break;
    }
  }
  return out;
}

}  // namespace

ResultTable run_experiment(const ExperimentSpec& spec, ProviderFactory factory) {
  spec.validate();
  std::vector<DsmCase> cases;
  std::vector<std::string> names;
  for (const auto& p : spec.cases) {
    cases.push_back(load_case(p));
    names.push_back(p.stem().string());
  }

  std::vector<Unit> units;
  for (std::size_t c = 0; c < cases.size(); ++c) {
    for (const auto& m : spec.methods) {
      const auto info = parse_method(m);
      if (info.family == MethodFamily::Det) {
        for (auto d : spec.det_directions) {
          units.push_back({c, m, info, d, d == RankDirection::Ascending ? m + "-asc" : m});
        }
      } else {
        units.push_back({c, m, info, RankDirection::Descending, m});
      }
    }
  }
  const bool needs_llm = std::any_of(units.begin(), units.end(), [](const Unit& u) { return u.info.family == MethodFamily::Llm; });
  if (needs_llm && !factory) factory = provider_factory_from_spec(spec.provider);

  std::vector<UnitOutput> outputs(units.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (auto i = next++; i < units.size(); i = next++) {
      const auto& u = units[i];
      outputs[i] = run_unit(spec, u, cases[u.case_index], names[u.case_index], factory);
      // Each cell's files land on disk as soon as it finishes.
      for (const auto& [rel, content] : outputs[i].files) write_file_atomic(spec.output_dir / rel, content);
    }
  };
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(spec.parallelism), units.size());
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  ResultTable table;
  nlohmann::json manifest;
  manifest["spec"] = spec_to_json(spec);
  manifest["cells"] = nlohmann::json::array();
  manifest["files"] = nlohmann::json::object();
  for (auto& o : outputs) {
    for (auto& c : o.cells) {
      manifest["cells"].push_back({{"case", c.case_name},
                                   {"method", c.method},
                                   {"budget", c.budget},
                                   {"seeds", c.seeds},
                                   {"failed", c.failed()},
                                   {"errors", c.errors}});
      table.cells.push_back(std::move(c));
    }
    for (const auto& [rel, content] : o.files) manifest["files"][rel] = sha256_hex(content);
  }
  const auto csv = results_to_csv(table);
  write_file_atomic(spec.output_dir / "results.csv", csv);
  manifest["files"]["results.csv"] = sha256_hex(csv);
  write_file_atomic(spec.output_dir / "manifest.json", manifest.dump(2) + "\n");
  return table;
}

}  // namespace dsmseq
