#include "dsmseq/llm_optimizer.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "dsmseq/hashing.hpp"
#include "dsmseq/rng.hpp"

namespace dsmseq {

namespace {

// Sub-stream numbers for derive_seed.
constexpr std::uint64_t kStreamAnonymize = 1;
constexpr std::uint64_t kStreamInitial = 2;
constexpr std::uint64_t kStreamEdges = 3;
constexpr std::uint64_t kStreamSampling = 1000;

constexpr std::string_view kRole = "You are an expert in the domain of combinational optimization.";
constexpr std::string_view kTask =
    "Please assist me to find an optimal sequential order that minimizes feedback cycles in the dependency network "
    "described below. Your task is to propose a new order that differs from previous attempts and has fewer feedback "
    "cycles than any listed.";
constexpr std::string_view kHistoryLead =
    "Below are some previous sequential orders arranged in descending order of feedback cycles (lower is better): ";
constexpr std::string_view kRequirements =
    "Please suggest a new order that:\n"
    "- Is different from all prior orders.\n"
    "- Has fewer feedback cycles than any previous order.\n"
    "- Covers all nodes exactly once.\n"
    "- Starts with <order> and ends with </order>.\n";
constexpr std::string_view kKnowledgeHint = "- You can use the descriptions of nodes and networks to support your suggestion.\n";
constexpr std::string_view kOutputFormat =
    "Output Format:\n"
    "<order> ...... </order>\n\n"
    "Please provide only the order and nothing else.";

std::string multiline_list(const std::vector<std::string>& items) {
  if (items.empty()) return "[]";
  std::string out = "[\n";
  for (std::size_t i = 0; i < items.size(); ++i) {
    out += items[i];
    out += i + 1 < items.size() ? ",\n" : "\n";
  }
  return out + "]";
}

std::string join_ids(const Sequence& s, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += sep;
    out += s[i].str();
  }
  return out;
}

std::string_view trim(std::string_view s) {
  constexpr std::string_view kJunk = " \t\r\n'\"`[]";
  const auto b = s.find_first_not_of(kJunk);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(kJunk);
  return s.substr(b, e - b + 1);
}

Sequence map_ids(const Sequence& s, const IdMapping& mapping) {
  if (mapping.empty()) return s;
  Sequence out;
  out.reserve(s.size());
  for (const auto& id : s) out.push_back(mapping.at(id));
  return out;
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

}  // namespace

std::string_view to_string(KnowledgeMode mode) { return mode == KnowledgeMode::With ? "with" : "without"; }

std::string_view to_string(ParseFailure failure) {
  return failure == ParseFailure::MissingTags ? "missing-tags" : "not-permutation";
}

std::string python_quote(std::string_view text) {
  const bool has_single = text.find('\'') != std::string_view::npos;
  const bool has_double = text.find('"') != std::string_view::npos;
  const char quote = has_single && !has_double ? '"' : '\'';
  std::string out(1, quote);
  for (char c : text) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (c == quote) out += '\\';
        out += c;
    }
  }
  out += quote;
  return out;
}

PromptContext make_prompt_context(const DsmCase& dsm, const std::vector<SolutionRecord>& historical,
                                  KnowledgeMode mode, std::uint64_t edge_shuffle_seed) {
  PromptContext ctx;
  ctx.network_description = dsm.description();
  ctx.nodes_with_descriptions = dsm.nodes();
  ctx.node_ids = dsm.node_ids();
  ctx.edge_list = dsm.edges();
  Rng rng(edge_shuffle_seed);
  rng.shuffle(std::span<Edge>(ctx.edge_list));
  for (const auto& r : historical) ctx.historical.push_back({join_ids(r.sequence, ", "), r.score});
  ctx.knowledge_mode = mode;
  return ctx;
}

std::string build_prompt(const PromptContext& ctx) {
  if (ctx.historical.empty()) throw std::invalid_argument("prompt needs at least one historical solution");
  const bool knowledge = ctx.knowledge_mode == KnowledgeMode::With;

  std::vector<std::string> edges;
  for (const auto& e : ctx.edge_list) {
    edges.push_back("{'dependent': " + python_quote(e.dependent.str()) + ", 'predecessor': " +
                    python_quote(e.predecessor.str()) + "}");
  }
  std::vector<std::string> history;
  for (const auto& h : ctx.historical) {
    history.push_back("{'solution': " + python_quote(h.solution) + ", 'score': " + std::to_string(h.score) + ".0}");
  }

  std::string out;
  out += kRole;
  out += "\n\n";
  out += kTask;
  out += "\n\n";
  if (knowledge) {
    std::vector<std::string> nodes;
    for (const auto& n : ctx.nodes_with_descriptions) {
      nodes.push_back("{'id': " + python_quote(n.id.str()) + ", 'name': " + python_quote(n.name) + "}");
    }
    out += "<Description of the Entire Network> " + ctx.network_description + " </Description of the Entire Network>\n";
    out += "<Nodes with Descriptions> " + multiline_list(nodes) + " </Nodes with Descriptions>\n";
  } else {
    std::string ids = "[";
    for (std::size_t i = 0; i < ctx.node_ids.size(); ++i) {
      if (i) ids += ", ";
      ids += python_quote(ctx.node_ids[i].str());
    }
    ids += "]";
    out += "<Nodes> " + ids + " </Nodes>\n";
  }
  out += "<Edges> " + multiline_list(edges) + " </Edges>\n\n";
  out += kHistoryLead;
  out += multiline_list(history);
  out += "\n\n";
  out += kRequirements;
  if (knowledge) out += kKnowledgeHint;
  out += "\n";
  out += kOutputFormat;
  return out;
}

ParseResult parse_order_response(std::string_view raw, const DsmCase& dsm) {
  constexpr std::string_view kOpen = "<order>";
  constexpr std::string_view kClose = "</order>";
  const auto open = raw.find(kOpen);
  if (open == std::string_view::npos) return ParseError{ParseFailure::MissingTags, "no <order> tag found"};
  const auto body_start = open + kOpen.size();
  const auto close = raw.find(kClose, body_start);
  if (close == std::string_view::npos) return ParseError{ParseFailure::MissingTags, "no closing </order> tag found"};

  const auto body = raw.substr(body_start, close - body_start);
  Sequence seq;
  std::size_t start = 0;
  while (start <= body.size()) {
    const auto comma = body.find(',', start);
    const auto token = trim(body.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (!token.empty()) seq.emplace_back(std::string(token));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }

  auto diag = is_valid_sequence(dsm, seq);
  if (!diag.valid) return ParseError{ParseFailure::NotPermutation, diag.message()};
  return seq;
}

std::string correction_line(const ParseError& error) {
  if (error.kind == ParseFailure::MissingTags) {
    return "Your previous answer could not be used: it did not contain an order between <order> and </order>. "
           "Reply again following the output format exactly.";
  }
  return "Your previous answer could not be used: it was not a permutation covering all nodes exactly once (" +
         error.detail + "). Reply again following the output format exactly.";
}

void OptimizerConfig::validate() const {
  if (sampling.k_p < 1 || sampling.k_q < 0) throw std::invalid_argument("sampling requires k_p >= 1 and k_q >= 0");
  if (termination.max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
  if (invalid_retry_budget < 0) throw std::invalid_argument("invalid_retry_budget must be >= 0");
}

namespace {

nlohmann::json ids_to_json(const Sequence& s) {
  auto out = nlohmann::json::array();
  for (const auto& id : s) out.push_back(id.str());
  return out;
}

Sequence ids_from_json(const nlohmann::json& j) {
  Sequence s;
  for (const auto& id : j) s.emplace_back(id.get<std::string>());
  return s;
}

}  // namespace

nlohmann::json trace_entry_to_json(const IterationTrace& e) {
  nlohmann::json j;
  j["iteration"] = e.iteration;
  j["prompt_hash"] = e.prompt_hash;
  j["response_hash"] = e.response_hash;
  j["sequence"] = e.sequence ? ids_to_json(*e.sequence) : nlohmann::json(nullptr);
  j["failure"] = e.failure ? nlohmann::json(std::string(to_string(*e.failure))) : nlohmann::json(nullptr);
  j["score"] = e.score ? nlohmann::json(*e.score) : nlohmann::json(nullptr);
  j["attempts"] = e.attempts;
  j["duplicate"] = e.duplicate;
  j["unique_count"] = e.unique_count;
  j["best_so_far"] = e.best_so_far;
  j["best_sequence"] = ids_to_json(e.best_sequence);
  return j;
}

IterationTrace trace_entry_from_json(const nlohmann::json& j) {
  IterationTrace e;
  e.iteration = j.at("iteration").get<int>();
  e.prompt_hash = j.value("prompt_hash", "");
  e.response_hash = j.value("response_hash", "");
  if (!j.at("sequence").is_null()) e.sequence = ids_from_json(j["sequence"]);
  if (!j.at("failure").is_null()) {
    e.failure = j["failure"].get<std::string>() == "missing-tags" ? ParseFailure::MissingTags : ParseFailure::NotPermutation;
  }
  if (!j.at("score").is_null()) e.score = j["score"].get<Score>();
  e.attempts = j.value("attempts", 0);
  e.duplicate = j.value("duplicate", false);
  e.unique_count = j.at("unique_count").get<std::size_t>();
  e.best_so_far = j.at("best_so_far").get<Score>();
  e.best_sequence = ids_from_json(j.at("best_sequence"));
  return e;
}

std::string trace_to_jsonl(const std::vector<IterationTrace>& trace) {
  std::string out;
  for (const auto& e : trace) {
    out += trace_entry_to_json(e).dump();
    out += '\n';
  }
  return out;
}

std::vector<IterationTrace> trace_from_jsonl(std::string_view text) {
  std::vector<IterationTrace> trace;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const auto line = text.substr(start, end - start);
    if (!trim(line).empty()) trace.push_back(trace_entry_from_json(nlohmann::json::parse(line)));
    start = end + 1;
  }
  return trace;
}

OptimizationResult run_optimization(const DsmCase& dsm, const OptimizerConfig& cfg, ChatProvider& client) {
  cfg.validate();
  if (cfg.knowledge_mode == KnowledgeMode::With && !dsm.has_names()) {
    throw std::invalid_argument("knowledge mode 'with' needs a name for every node");
  }

  OptimizationResult result;
  IdMapping to_caller;
  std::optional<DsmCase> anonymized;
  if (cfg.anonymize) {
    auto anon = anonymize_ids(dsm, derive_seed(cfg.seed, kStreamAnonymize));
    result.anonymized_ids = std::move(anon.forward);
    to_caller = std::move(anon.inverse);
    anonymized = std::move(anon.dsm);
  }
  const DsmCase& work = anonymized ? *anonymized : dsm;
  const auto matrix = build_adjacency(work);
  SolutionBase base(matrix);

  if (cfg.audit_dir) std::filesystem::create_directories(*cfg.audit_dir);

  auto snapshot_entry = [&](IterationTrace& entry) {
    const auto& best = base.best();
    entry.unique_count = base.unique_count();
    entry.best_so_far = best.score;
    entry.best_sequence = map_ids(best.sequence, to_caller);
    result.trace.push_back(std::move(entry));
  };

  // Iteration 0: one uniformly random permutation.
  {
    Sequence initial = work.node_ids();
    Rng rng(derive_seed(cfg.seed, kStreamInitial));
    rng.shuffle(std::span<NodeId>(initial));
    base.insert({initial, 0, 0, SolutionSource::InitialRandom});
    IterationTrace entry;
    entry.iteration = 0;
    entry.sequence = map_ids(initial, to_caller);
    entry.score = base.records().back().score;
    snapshot_entry(entry);
  }

  int iterations = 0;
  while (!base.should_terminate(cfg.termination, iterations)) {
    ++iterations;
    const auto edge_seed =
        derive_seed(cfg.seed, cfg.reshuffle_edges_each_iteration ? kStreamEdges + 100000 + iterations : kStreamEdges);
    const auto sample = base.sample_for_prompt(cfg.sampling, derive_seed(cfg.seed, kStreamSampling + iterations));
    const auto prompt = build_prompt(make_prompt_context(work, sample, cfg.knowledge_mode, edge_seed));

    IterationTrace entry;
    entry.iteration = iterations;
    entry.prompt_hash = sha256_hex(prompt);
    std::string current_prompt = prompt;
    std::optional<Sequence> parsed;
    for (int attempt = 0; attempt <= cfg.invalid_retry_budget; ++attempt) {
      entry.attempts = attempt + 1;
      ChatResponse response;
      try {
        response = client.complete(ChatRequest::single_turn(cfg.model, current_prompt, cfg.model_params));
      } catch (const LlmError& e) {
        result.aborted = true;
        result.error = e.what();
        break;
      }
      entry.response_hash = sha256_hex(response.text);
      if (cfg.audit_dir) {
        const auto stem = "iter" + std::to_string(iterations) + "_attempt" + std::to_string(attempt);
        write_text(*cfg.audit_dir / (stem + "_prompt.txt"), current_prompt);
        write_text(*cfg.audit_dir / (stem + "_response.txt"), response.text);
      }
      auto outcome = parse_order_response(response.text, work);
      if (auto* seq = std::get_if<Sequence>(&outcome)) {
        parsed = std::move(*seq);
        entry.failure.reset();
        break;
      }
      const auto& error = std::get<ParseError>(outcome);
      entry.failure = error.kind;
      current_prompt = prompt + "\n\n" + correction_line(error);
    }
    if (result.aborted) break;

    if (parsed) {
      entry.sequence = map_ids(*parsed, to_caller);
      entry.duplicate = !base.insert({*parsed, 0, iterations, SolutionSource::Llm});
      entry.score = score_sequence(matrix, *parsed);
    }
    snapshot_entry(entry);
  }

  result.best = base.best();
  result.best.sequence = map_ids(result.best.sequence, to_caller);
  auto snap = base.snapshot();
  if (!to_caller.empty()) {
    for (auto& rec : snap) {
      for (auto& id : rec["sequence"]) id = to_caller.at(NodeId(id.get<std::string>())).str();
    }
  }
  result.snapshot = std::move(snap);
  return result;
}

Score best_after_iterations(const std::vector<IterationTrace>& trace, int iterations) {
  if (trace.empty()) throw std::invalid_argument("empty trace");
  Score best = trace.front().best_so_far;
  for (const auto& e : trace) {
    if (e.iteration > iterations) break;
    best = e.best_so_far;
  }
  return best;
}

}  // namespace dsmseq
