#pragma once
// Orchestration: direct reasoning (compile, execute, confirm), stepwise
// reasoning over the subgraph, answer validation, the collaborative
// hypothesize-verify loop with its deterministic schema-mutation fallback,
// and confidence-weighted path integration.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "kgqa/cypher.hpp"
#include "kgqa/graph_store.hpp"
#include "kgqa/llm_provider.hpp"
#include "kgqa/schema.hpp"
#include "kgqa/subgraph.hpp"

namespace kgqa {

struct ReasoningStep {
    SchemaStep schema_step;
    cypher::BindingTable bindings;  // distinct (subject, object) pairs
    std::vector<Triple> evidence;   // triples behind those pairs
    double step_confidence = 1.0;   // 1 / surviving candidates for new slots
};

enum class PathOrigin { Direct, Stepwise, Collaborative };

struct ReasoningPath {
    QuerySchema schema;
    std::vector<ReasoningStep> steps;
    std::vector<EntityId> answer_candidates;  // ranked
    double confidence = 1.0;  // product of step confidences, in (0, 1]
    PathOrigin origin = PathOrigin::Direct;
};

struct Answer {
    enum class Status { Answered, Abstained };
    std::vector<EntityId> entities;      // ranked
    std::vector<double> scores;          // parallel to entities
    std::vector<ReasoningPath> support;  // paths that contributed
    Status status = Status::Abstained;
};

struct ReasonConfig {
    double relevance_threshold = 0.0;
    std::optional<int> hop_budget;  // default: schema steps + 1
    int max_iterations = 3;
    double top_weight = 1.0;   // integration weight of a path's top candidate
    double rest_weight = 0.5;  // weight of its remaining candidates
    std::string answer_prompt;      // {question} {schema} {evidence}
    std::string hypothesis_prompt;  // {question} {schema} {issues}
};

// Compile the schema, execute it on the full graph, and let the provider
// pick among the candidates (advisory: replies outside the candidate set,
// and provider errors, keep the top candidate). Per-step confidences come
// from the final joined table. Empty execution -> abstained. Throws
// ExecError when an anchor resolves to nothing.
Answer direct_reason(const std::string& question, const QuerySchema& schema,
                     const KnowledgeGraph& kg, Provider* provider,
                     const ReasonConfig& config = {});

// Iterate schema steps over the subgraph, joining each step's triples with
// the bindings accumulated so far; inconsistent bindings drop out. A step
// with no survivors ends the path with empty candidates; the completed
// prefix keeps its confidence. The provider parameter is accepted for
// interface symmetry; refinement here is purely structural.
ReasoningPath stepwise_reason(const std::string& question,
                              const QuerySchema& schema,
                              const GraphView& subgraph, Provider* provider);

// True iff the candidate is answered and every entity appears among the
// answer-slot bindings of the compiled schema query on the subgraph.
bool validate_answer(const Answer& candidate, const QuerySchema& schema,
                     const GraphView& subgraph);

// Deterministic schema repair: replace the first unknown relation with the
// KG relation sharing the most word tokens (ties: lexicographically
// smallest); with no token overlap, or no unknown relation, drop the
// endpoint step whose relation is rarest in the KG (ties: the later step),
// re-pointing the answer slot at the junction when it was on the dropped
// step. Single-step schemas are returned unchanged.
QuerySchema mutate_schema(const QuerySchema& schema, const KnowledgeGraph& kg);

// Hypothesize-verify loop, at most max_iterations rounds: ask the provider
// for a revised schema (unparseable or failing replies fall back to
// mutate_schema), build a fresh subgraph, run stepwise reasoning, stop
// early once a path validates. Returns every path produced, in order;
// never throws.
std::vector<ReasoningPath> collaborative_reason(const std::string& question,
                                                const QuerySchema& schema,
                                                const KnowledgeGraph& kg,
                                                Provider* provider,
                                                const ReasonConfig& config = {});

// Score every candidate entity as sum over paths of confidence x rank
// weight; rank by score descending, ties by canonical name ascending.
Answer integrate_paths(const std::vector<ReasoningPath>& paths,
                       const KnowledgeGraph& kg, double top_weight = 1.0,
                       double rest_weight = 0.5);

enum class Variant { Full, NoSchema, NoRetrieval, IoPrompt };

std::string_view variant_name(Variant variant);
std::optional<Variant> variant_from_name(std::string_view name);

struct PipelineConfig {
    Variant variant = Variant::Full;
    double relevance_threshold = 0.0;
    std::optional<int> hop_budget;
    int max_iterations = 3;
    int sample_triples = 20;
    double top_weight = 1.0;
    double rest_weight = 0.5;
    std::string schema_prompt;  // template overrides; empty = built-in
    std::string answer_prompt;
    std::string hypothesis_prompt;
    std::string io_prompt;
};

struct PipelineResult {
    Answer answer;
    nlohmann::json trace;  // per-stage record for `explain`
};

// The full pipeline: schema -> subgraph -> direct -> validate -> (stepwise
// + collaborative -> integrate). Variants:
//   full:         as above
//   no_schema:    schema via lexical fallback only (no provider prompt)
//   no_retrieval: schema prompt kept, but no subgraph or execution; the
//                 provider's answer is resolved against the KG
//   io_prompt:    question-only prompt, answer resolved against the KG
// Stage failures abstain (trace carries failure_stage); never throws.
PipelineResult answer_question(const std::string& question,
                               const KnowledgeGraph& kg, Provider* provider,
                               const PipelineConfig& config = {});

}  // namespace kgqa
