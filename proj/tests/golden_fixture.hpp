#pragma once

// Prompt context whose rendering is stored in tests/golden/*.txt. Edges are
// given in a fixed order, not shuffled.

#include "dsmseq/llm_optimizer.hpp"

namespace golden {

using namespace dsmseq;

inline PromptContext golden_context(KnowledgeMode mode) {
  const std::vector<std::pair<const char*, const char*>> nodes{
      {"lzOtR", "Create Configuration Concepts"},
      {"yLlKi", "Prepare UCAV Conceptual DR&O"},
      {"Swvi2", "Prepare 3-View Drawing & Geometry Data"},
      {"CDcxF", "Perform Weights Analyses & Evaluation"},
      {"0KGDm", "Perform Aerodynamics Analyses & Evaluation"},
      {"4wHtv", "Perform Multidisciplinary Analyses & Evaluation"},
      {"AgIBP", "Prepare & Distribute Choice Config. Data Set"},
      {"gRtHi", "Perform S&C Characteristics Analyses & Eval."},
      {"GV9RJ", "Make Concept Assessment and Variant Decisions"},
      {"I1j2m", "Perform Performance Analyses & Evaluation"},
      {"Vzzm7", "Perform Propulsion Analyses & Evaluation"},
      {"B0BFG", "Perform Mechanical & Electrical Analyses & Eval."}};
  PromptContext ctx;
  ctx.network_description = "Synthetic activity network used as a rendering fixture.";
  for (auto [id, name] : nodes) {
    ctx.nodes_with_descriptions.push_back({NodeId(id), name});
    ctx.node_ids.emplace_back(id);
  }
  ctx.edge_list = {{NodeId("0KGDm"), NodeId("Swvi2")},
                   {NodeId("AgIBP"), NodeId("lzOtR")},
                   {NodeId("0KGDm"), NodeId("yLlKi")},
                   {NodeId("Swvi2"), NodeId("lzOtR")}};
  ctx.historical = {{"lzOtR, yLlKi, GV9RJ, AgIBP, B0BFG, Vzzm7, Swvi2, CDcxF, 0KGDm, I1j2m, gRtHi, 4wHtv", 15},
                    {"B0BFG, yLlKi, Vzzm7, lzOtR, Swvi2, CDcxF, AgIBP, 0KGDm, GV9RJ, I1j2m, gRtHi, 4wHtv", 13}};
  ctx.knowledge_mode = mode;
  return ctx;
}

}  // namespace golden
