#include "kgqa/reasoning.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "kgqa/errors.hpp"
#include "kgqa/text.hpp"

namespace kgqa {

namespace {

using nlohmann::json;

constexpr const char* kDefaultAnswerPrompt =
    "You will act as a knowledge graph expert. Using the schema and the "
    "evidence triples, answer the question with a single entity name.\n\n"
    "Question: {question}\n\nSchema:\n{schema}\nEvidence:\n{evidence}\n"
    "Answer:";

constexpr const char* kDefaultHypothesisPrompt =
    "You will act as a knowledge graph expert. The schema below did not "
    "produce a verifiable answer. Propose a revised schema in the same "
    "format: one (<slot>) <relation> (<slot>). line per step and a final "
    "ANSWER <slot> line.\n\nQuestion: {question}\n\nFailed schema:\n{schema}\n"
    "Known problems:\n{issues}\n";

constexpr const char* kDefaultIoPrompt =
    "Answer the question with a single entity name and nothing else.\n\n"
    "Question: {question}\nAnswer:";

std::string fill(std::string prompt,
                 std::initializer_list<std::pair<const char*, std::string>>
                     substitutions) {
    for (const auto& [key, value] : substitutions) {
        auto pos = prompt.find(key);
        while (pos != std::string::npos) {
            prompt.replace(pos, std::string_view(key).size(), value);
            pos = prompt.find(key, pos + value.size());
        }
    }
    return prompt;
}

std::string evidence_text(const KnowledgeGraph& kg,
                          const std::vector<ReasoningStep>& steps) {
    std::string out;
    std::set<Triple> seen;
    for (const auto& step : steps) {
        for (const Triple& t : step.evidence) {
            if (!seen.insert(t).second) continue;
            out += "(" + kg.name(t.subject) + ", " + kg.name(t.relation) + ", " +
                   kg.name(t.object) + ")\n";
        }
    }
    return out;
}

// Rank candidate ids by canonical name, ascending.
void sort_by_name(std::vector<EntityId>& ids, const KnowledgeGraph& kg) {
    std::sort(ids.begin(), ids.end(), [&](EntityId a, EntityId b) {
        return kg.name(a) < kg.name(b);
    });
}

// Pick the candidate the provider's reply names, if any: first by
// normalized string equality against candidate names, then by entity
// resolution. Everything else keeps the ranking as-is.
std::optional<EntityId> match_reply(const std::string& reply,
                                    const std::vector<EntityId>& candidates,
                                    const KnowledgeGraph& kg) {
    std::string wanted = text::normalize(reply);
    if (wanted.empty()) return std::nullopt;
    for (EntityId c : candidates) {
        if (text::normalize(kg.name(c)) == wanted) return c;
    }
    if (auto resolved = kg.resolve_top(text::trim(reply))) {
        for (EntityId c : candidates) {
            if (c == *resolved) return c;
        }
    }
    return std::nullopt;
}

json names_json(const std::vector<EntityId>& ids, const KnowledgeGraph& kg) {
    json out = json::array();
    for (EntityId e : ids) out.push_back(kg.name(e));
    return out;
}

}  // namespace

Answer direct_reason(const std::string& question, const QuerySchema& schema,
                     const KnowledgeGraph& kg, Provider* provider,
                     const ReasonConfig& config) {
    Answer answer;
    ReasoningPath path;
    path.schema = schema;
    path.origin = PathOrigin::Direct;

    cypher::CypherQuery query = compile_schema(schema);
    cypher::BindingTable full = cypher::execute_full(kg, query);
    if (full.rows.empty()) {
        answer.support.push_back(std::move(path));
        return answer;  // abstained
    }

    auto column_of = [&](const std::string& slot) {
        for (std::size_t i = 0; i < full.columns.size(); ++i) {
            if (full.columns[i] == slot) return i;
        }
        return full.columns.size();
    };

    // Per-step confidence: 1 / distinct values the step's newly-bound slots
    // take in the final table. Anchored slots start out bound.
    std::set<std::string> bound;
    for (const auto& [slot, surface] : schema.anchors) bound.insert(slot);
    for (const auto& step : schema.steps) {
        std::vector<std::size_t> new_cols;
        for (const std::string& slot : {step.subject_slot, step.object_slot}) {
            if (bound.insert(slot).second) new_cols.push_back(column_of(slot));
        }
        ReasoningStep rstep;
        rstep.schema_step = step;
        if (!new_cols.empty()) {
            std::set<std::vector<EntityId>> distinct;
            for (const auto& row : full.rows) {
                std::vector<EntityId> key;
                for (std::size_t c : new_cols) key.push_back(row[c]);
                distinct.insert(std::move(key));
            }
            rstep.step_confidence = 1.0 / static_cast<double>(distinct.size());
        }
        std::size_t scol = column_of(step.subject_slot);
        std::size_t ocol = column_of(step.object_slot);
        RelationId rel = *kg.find_relation(step.relation);
        std::set<std::vector<EntityId>> pairs;
        std::set<Triple> evidence;
        for (const auto& row : full.rows) {
            pairs.insert({row[scol], row[ocol]});
            evidence.insert(Triple{row[scol], rel, row[ocol]});
        }
        rstep.bindings.columns = {step.subject_slot, step.object_slot};
        rstep.bindings.rows.assign(pairs.begin(), pairs.end());
        rstep.evidence.assign(evidence.begin(), evidence.end());
        path.confidence *= rstep.step_confidence;
        path.steps.push_back(std::move(rstep));
    }

    std::vector<EntityId> candidates;
    std::size_t answer_col = column_of(schema.answer_slot);
    std::set<EntityId> seen;
    for (const auto& row : full.rows) {
        if (seen.insert(row[answer_col]).second) {
            candidates.push_back(row[answer_col]);  // rows sorted: names asc
        }
    }
    path.answer_candidates = candidates;

    EntityId chosen = candidates.front();
    if (provider != nullptr) {
        try {
            std::string prompt =
                fill(config.answer_prompt.empty() ? kDefaultAnswerPrompt
                                                  : config.answer_prompt,
                     {{"{question}", question},
                      {"{schema}", schema_to_text(schema)},
                      {"{evidence}", evidence_text(kg, path.steps)}});
            CompletionRequest request{prompt, 64, 0.0, Stage::Answer};
            std::string reply = provider->complete(request).text;
            if (auto picked = match_reply(reply, candidates, kg)) {
                chosen = *picked;
            }
        } catch (const Error&) {
            // Confirmation is advisory; the top candidate stands.
        }
    }

    answer.entities.push_back(chosen);
    for (EntityId c : candidates) {
        if (c != chosen) answer.entities.push_back(c);
    }
    answer.scores.push_back(path.confidence);
    for (std::size_t i = 1; i < answer.entities.size(); ++i) {
        answer.scores.push_back(path.confidence * 0.5);
    }
    answer.status = Answer::Status::Answered;
    answer.support.push_back(std::move(path));
    return answer;
}

ReasoningPath stepwise_reason(const std::string& question,
                              const QuerySchema& schema,
                              const GraphView& subgraph, Provider* provider) {
    (void)question;
    (void)provider;
    ReasoningPath path;
    path.schema = schema;
    path.origin = PathOrigin::Stepwise;
    const KnowledgeGraph& base = subgraph.base();

    // Working table of consistent partial bindings, seeded with anchors.
    std::vector<std::string> columns;
    std::vector<std::vector<EntityId>> rows{{}};
    for (const auto& [slot, surface] : schema.anchors) {
        auto id = base.resolve_top(surface);
        if (!id) return path;  // nothing to bind; empty path
        columns.push_back(slot);
        rows[0].push_back(*id);
    }

    auto column_of = [&](const std::string& slot) -> std::optional<std::size_t> {
        for (std::size_t i = 0; i < columns.size(); ++i) {
            if (columns[i] == slot) return i;
        }
        return std::nullopt;
    };

    for (const auto& step : schema.steps) {
        ReasoningStep rstep;
        rstep.schema_step = step;
        auto rel = base.find_relation(step.relation);
        if (!rel) {
            path.steps.push_back(std::move(rstep));
            return path;  // unknown relation: dead end, keep prefix
        }
        const bool self_loop = step.subject_slot == step.object_slot;
        auto scol = column_of(step.subject_slot);
        auto ocol = column_of(step.object_slot);
        std::vector<std::vector<EntityId>> joined;
        for (const auto& row : rows) {
            for (const Triple& t : subgraph.relation_edges(*rel)) {
                if (self_loop && t.subject != t.object) continue;
                if (scol && row[*scol] != t.subject) continue;
                if (ocol && row[*ocol] != t.object) continue;
                std::vector<EntityId> extended = row;
                if (!scol) extended.push_back(t.subject);
                if (!ocol && !self_loop) extended.push_back(t.object);
                joined.push_back(std::move(extended));
            }
        }
        std::sort(joined.begin(), joined.end());
        joined.erase(std::unique(joined.begin(), joined.end()), joined.end());
        if (joined.empty()) {
            path.steps.push_back(std::move(rstep));
            return path;
        }
        std::vector<std::size_t> new_cols;
        if (!scol) {
            columns.push_back(step.subject_slot);
            new_cols.push_back(columns.size() - 1);
        }
        if (!ocol && !self_loop) {
            columns.push_back(step.object_slot);
            new_cols.push_back(columns.size() - 1);
        }
        rows = std::move(joined);
        if (!new_cols.empty()) {
            std::set<std::vector<EntityId>> distinct;
            for (const auto& row : rows) {
                std::vector<EntityId> key;
                for (std::size_t c : new_cols) key.push_back(row[c]);
                distinct.insert(std::move(key));
            }
            rstep.step_confidence = 1.0 / static_cast<double>(distinct.size());
        }
        std::size_t s_now = *column_of(step.subject_slot);
        std::size_t o_now = *column_of(step.object_slot);
        std::set<std::vector<EntityId>> pairs;
        std::set<Triple> evidence;
        for (const auto& row : rows) {
            pairs.insert({row[s_now], row[o_now]});
            evidence.insert(Triple{row[s_now], *rel, row[o_now]});
        }
        rstep.bindings.columns = {step.subject_slot, step.object_slot};
        rstep.bindings.rows.assign(pairs.begin(), pairs.end());
        rstep.evidence.assign(evidence.begin(), evidence.end());
        path.confidence *= rstep.step_confidence;
        path.steps.push_back(std::move(rstep));
    }

    if (auto col = column_of(schema.answer_slot)) {
        std::set<EntityId> distinct;
        for (const auto& row : rows) distinct.insert(row[*col]);
        path.answer_candidates.assign(distinct.begin(), distinct.end());
        sort_by_name(path.answer_candidates, base);
    }
    return path;
}

bool validate_answer(const Answer& candidate, const QuerySchema& schema,
                     const GraphView& subgraph) {
    if (candidate.status != Answer::Status::Answered ||
        candidate.entities.empty()) {
        return false;
    }
    cypher::BindingTable table;
    try {
        table = cypher::execute(subgraph, compile_schema(schema));
    } catch (const Error&) {
        return false;
    }
    std::set<EntityId> allowed;
    for (const auto& row : table.rows) allowed.insert(row[0]);
    return std::all_of(
        candidate.entities.begin(), candidate.entities.end(),
        [&](EntityId e) { return allowed.count(e) > 0; });
}

QuerySchema mutate_schema(const QuerySchema& schema, const KnowledgeGraph& kg) {
    QuerySchema out = schema;

    // Rule 1: repair the first unknown relation by token overlap.
    for (auto& step : out.steps) {
        if (kg.find_relation(step.relation)) continue;
        auto bad_tokens = text::token_set(step.relation);
        std::string best;
        std::size_t best_overlap = 0;
        for (std::uint32_t r = 0; r < kg.relation_count(); ++r) {
            const std::string& name = kg.name(RelationId{r});
            std::size_t overlap = 0;
            for (const auto& tok : text::token_set(name)) {
                if (bad_tokens.count(tok)) ++overlap;
            }
            if (overlap > best_overlap ||
                (overlap == best_overlap && overlap > 0 && name < best)) {
                best = name;
                best_overlap = overlap;
            }
        }
        if (best_overlap > 0) {
            step.relation = best;
            return out;
        }
        break;  // no lexical repair for this one; fall through to rule 2
    }

    // Rule 2: drop the rarest endpoint step. A single step is irreducible.
    if (out.steps.size() <= 1) return schema;
    std::map<std::string, int> degree;
    for (const auto& step : out.steps) {
        ++degree[step.subject_slot];
        ++degree[step.object_slot];
    }
    std::optional<std::size_t> drop;
    std::size_t drop_freq = 0;
    for (std::size_t i = 0; i < out.steps.size(); ++i) {
        const SchemaStep& step = out.steps[i];
        if (degree[step.subject_slot] != 1 && degree[step.object_slot] != 1) {
            continue;  // interior step; dropping would split the chain
        }
        std::size_t freq = 0;
        if (auto rel = kg.find_relation(step.relation)) {
            freq = kg.relation_edges(*rel).size();
        }
        if (!drop || freq <= drop_freq) {  // ties keep the later step
            drop = i;
            drop_freq = freq;
        }
    }
    SchemaStep dropped = out.steps[*drop];
    out.steps.erase(out.steps.begin() + static_cast<std::ptrdiff_t>(*drop));

    std::set<std::string> remaining;
    for (const auto& step : out.steps) {
        remaining.insert(step.subject_slot);
        remaining.insert(step.object_slot);
    }
    if (!remaining.count(out.answer_slot)) {
        out.answer_slot = remaining.count(dropped.subject_slot)
                              ? dropped.subject_slot
                              : dropped.object_slot;
    }
    for (auto it = out.anchors.begin(); it != out.anchors.end();) {
        it = remaining.count(it->first) ? std::next(it) : out.anchors.erase(it);
    }
    return out;
}

std::vector<ReasoningPath> collaborative_reason(const std::string& question,
                                                const QuerySchema& schema,
                                                const KnowledgeGraph& kg,
                                                Provider* provider,
                                                const ReasonConfig& config) {
    std::vector<ReasoningPath> paths;
    QuerySchema current = schema;
    for (int iteration = 0; iteration < config.max_iterations; ++iteration) {
        std::optional<QuerySchema> revised;
        if (provider != nullptr) {
            try {
                std::string issues;
                for (const auto& issue : validate_schema(current, kg)) {
                    issues += to_string(issue) + "\n";
                }
                std::string prompt =
                    fill(config.hypothesis_prompt.empty()
                             ? kDefaultHypothesisPrompt
                             : config.hypothesis_prompt,
                         {{"{question}", question},
                          {"{schema}", schema_to_text(current)},
                          {"{issues}", issues}});
                CompletionRequest request{prompt, 512, 0.0, Stage::Hypothesis};
                revised = parse_schema_text(provider->complete(request).text);
            } catch (const Error&) {
                // Unusable hypothesis; mutate deterministically instead.
            }
        }
        current = revised ? *revised : mutate_schema(current, kg);

        ReasoningPath path;
        path.schema = current;
        path.origin = PathOrigin::Collaborative;
        bool validated = false;
        try {
            Subgraph sub = generate_subgraph(kg, question, current,
                                             config.hop_budget,
                                             config.relevance_threshold);
            path = stepwise_reason(question, current, sub, provider);
            path.origin = PathOrigin::Collaborative;
            if (!path.answer_candidates.empty()) {
                Answer candidate;
                candidate.status = Answer::Status::Answered;
                candidate.entities = path.answer_candidates;
                validated = validate_answer(candidate, current, sub);
                if (!validated) path.answer_candidates.clear();
            }
        } catch (const Error&) {
            // No subgraph to reason over; record the empty attempt.
        }
        paths.push_back(std::move(path));
        if (validated) break;
    }
    return paths;
}

Answer integrate_paths(const std::vector<ReasoningPath>& paths,
                       const KnowledgeGraph& kg, double top_weight,
                       double rest_weight) {
    Answer answer;
    std::map<EntityId, double> score;
    for (const auto& path : paths) {
        if (path.answer_candidates.empty()) continue;
        answer.support.push_back(path);
        for (std::size_t i = 0; i < path.answer_candidates.size(); ++i) {
            score[path.answer_candidates[i]] +=
                path.confidence * (i == 0 ? top_weight : rest_weight);
        }
    }
    if (score.empty()) {
        answer.support.clear();
        return answer;  // abstained
    }
    std::vector<std::pair<EntityId, double>> ranked(score.begin(), score.end());
    std::sort(ranked.begin(), ranked.end(), [&](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return kg.name(a.first) < kg.name(b.first);
    });
    for (const auto& [id, s] : ranked) {
        answer.entities.push_back(id);
        answer.scores.push_back(s);
    }
    answer.status = Answer::Status::Answered;
    return answer;
}

std::string_view variant_name(Variant variant) {
    switch (variant) {
        case Variant::Full: return "full";
        case Variant::NoSchema: return "no_schema";
        case Variant::NoRetrieval: return "no_retrieval";
        case Variant::IoPrompt: return "io_prompt";
    }
    return "unknown";
}

std::optional<Variant> variant_from_name(std::string_view name) {
    if (name == "full") return Variant::Full;
    if (name == "no_schema") return Variant::NoSchema;
    if (name == "no_retrieval") return Variant::NoRetrieval;
    if (name == "io_prompt") return Variant::IoPrompt;
    return std::nullopt;
}

namespace {

// Resolve a free-text provider reply against the KG; used by the ablation
// variants that skip graph execution.
Answer resolve_reply(const std::string& reply, const KnowledgeGraph& kg) {
    Answer answer;
    auto hits = kg.resolve(text::trim(reply));
    if (hits.empty()) return answer;
    answer.entities.push_back(hits.front());
    answer.scores.push_back(1.0);
    answer.status = Answer::Status::Answered;
    return answer;
}

json answer_json(const Answer& answer, const KnowledgeGraph& kg) {
    json out;
    out["status"] = answer.status == Answer::Status::Answered ? "answered"
                                                              : "abstained";
    out["entities"] = names_json(answer.entities, kg);
    out["scores"] = answer.scores;
    return out;
}

}  // namespace

PipelineResult answer_question(const std::string& question,
                               const KnowledgeGraph& kg, Provider* provider,
                               const PipelineConfig& config) {
    PipelineResult result;
    json& trace = result.trace;
    trace["question"] = question;
    trace["variant"] = std::string(variant_name(config.variant));
    trace["stages"] = json::array();

    auto abstain = [&](const std::string& stage, const std::string& reason) {
        trace["failure_stage"] = stage;
        trace["stages"].push_back({{"stage", stage}, {"error", reason}});
        trace["answer"] = answer_json(result.answer, kg);
        return result;
    };

    ReasonConfig reason_config;
    reason_config.relevance_threshold = config.relevance_threshold;
    reason_config.hop_budget = config.hop_budget;
    reason_config.max_iterations = config.max_iterations;
    reason_config.top_weight = config.top_weight;
    reason_config.rest_weight = config.rest_weight;
    reason_config.answer_prompt = config.answer_prompt;
    reason_config.hypothesis_prompt = config.hypothesis_prompt;

    if (config.variant == Variant::IoPrompt) {
        if (provider == nullptr) return abstain("answer", "no provider configured");
        std::string prompt = fill(
            config.io_prompt.empty() ? kDefaultIoPrompt : config.io_prompt,
            {{"{question}", question}});
        try {
            CompletionRequest request{prompt, 64, 0.0, Stage::Answer};
            std::string reply = provider->complete(request).text;
            result.answer = resolve_reply(reply, kg);
            trace["stages"].push_back(
                {{"stage", "answer"},
                 {"reply", reply},
                 {"resolved", result.answer.status == Answer::Status::Answered}});
        } catch (const Error& e) {
            return abstain("answer", e.what());
        }
        if (result.answer.status != Answer::Status::Answered) {
            trace["failure_stage"] = "answer";
        }
        trace["answer"] = answer_json(result.answer, kg);
        return result;
    }

    if (config.variant == Variant::NoRetrieval) {
        std::string schema_text;
        try {
            SchemaGenConfig sg{true, config.sample_triples, config.schema_prompt};
            QuerySchema schema = generate_schema(question, provider, kg, sg);
            schema_text = schema_to_text(schema);
            trace["stages"].push_back(
                {{"stage", "schema"},
                 {"schema", schema_text},
                 {"source", schema.source == SchemaSource::Provider
                                ? "provider"
                                : "fallback"}});
        } catch (const Error& e) {
            trace["stages"].push_back(
                {{"stage", "schema"}, {"error", e.what()}});
        }
        if (provider == nullptr) return abstain("answer", "no provider configured");
        std::string prompt =
            fill(config.answer_prompt.empty() ? kDefaultAnswerPrompt
                                              : config.answer_prompt,
                 {{"{question}", question},
                  {"{schema}", schema_text},
                  {"{evidence}", ""}});
        try {
            CompletionRequest request{prompt, 64, 0.0, Stage::Answer};
            std::string reply = provider->complete(request).text;
            result.answer = resolve_reply(reply, kg);
            trace["stages"].push_back(
                {{"stage", "answer"},
                 {"reply", reply},
                 {"resolved", result.answer.status == Answer::Status::Answered}});
        } catch (const Error& e) {
            return abstain("answer", e.what());
        }
        if (result.answer.status != Answer::Status::Answered) {
            trace["failure_stage"] = "answer";
        }
        trace["answer"] = answer_json(result.answer, kg);
        return result;
    }

    // full / no_schema share the structured pipeline.
    QuerySchema schema;
    try {
        SchemaGenConfig sg{config.variant == Variant::Full,
                          config.sample_triples, config.schema_prompt};
        schema = generate_schema(question, provider, kg, sg);
    } catch (const Error& e) {
        return abstain("schema", e.what());
    }
    trace["stages"].push_back(
        {{"stage", "schema"},
         {"schema", schema_to_text(schema)},
         {"source",
          schema.source == SchemaSource::Provider ? "provider" : "fallback"}});

    std::optional<Subgraph> sub;
    try {
        sub.emplace(generate_subgraph(kg, question, schema, config.hop_budget,
                                      config.relevance_threshold));
        json seeds = json::array();
        for (EntityId e : sub->seeds()) seeds.push_back(kg.name(e));
        trace["stages"].push_back({{"stage", "subgraph"},
                                   {"triples", sub->triple_count()},
                                   {"seeds", seeds}});
    } catch (const Error& e) {
        trace["stages"].push_back({{"stage", "subgraph"}, {"error", e.what()}});
    }

    Answer direct;
    std::string direct_error;
    try {
        direct = direct_reason(question, schema, kg, provider, reason_config);
    } catch (const Error& e) {
        direct_error = e.what();
    }
    bool direct_valid =
        sub.has_value() && validate_answer(direct, schema, *sub);
    {
        json stage{{"stage", "direct"},
                   {"query", cypher::render(compile_schema(schema))},
                   {"candidates", names_json(direct.entities, kg)},
                   {"validated", direct_valid}};
        if (!direct_error.empty()) stage["error"] = direct_error;
        trace["stages"].push_back(std::move(stage));
    }
    if (direct_valid) {
        result.answer = std::move(direct);
        trace["answer"] = answer_json(result.answer, kg);
        return result;
    }

    std::vector<ReasoningPath> paths;
    if (sub.has_value()) {
        ReasoningPath sw = stepwise_reason(question, schema, *sub, provider);
        trace["stages"].push_back(
            {{"stage", "stepwise"},
             {"steps", sw.steps.size()},
             {"candidates", names_json(sw.answer_candidates, kg)},
             {"confidence", sw.confidence}});
        paths.push_back(std::move(sw));
    }
    {
        auto collab =
            collaborative_reason(question, schema, kg, provider, reason_config);
        json iterations = json::array();
        for (const auto& path : collab) {
            iterations.push_back(
                {{"schema", schema_to_text(path.schema)},
                 {"candidates", names_json(path.answer_candidates, kg)},
                 {"confidence", path.confidence}});
        }
        trace["stages"].push_back(
            {{"stage", "collaborative"}, {"iterations", std::move(iterations)}});
        for (auto& path : collab) paths.push_back(std::move(path));
    }

    result.answer =
        integrate_paths(paths, kg, config.top_weight, config.rest_weight);
    {
        json ranked = json::array();
        for (std::size_t i = 0; i < result.answer.entities.size(); ++i) {
            ranked.push_back({{"entity", kg.name(result.answer.entities[i])},
                              {"score", result.answer.scores[i]}});
        }
        trace["stages"].push_back({{"stage", "integrate"}, {"ranked", ranked}});
    }
    if (result.answer.status != Answer::Status::Answered) {
        trace["failure_stage"] = sub.has_value() ? "integration" : "subgraph";
    }
    trace["answer"] = answer_json(result.answer, kg);
    return result;
}

}  // namespace kgqa
