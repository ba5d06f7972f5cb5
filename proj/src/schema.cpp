#include "kgqa/schema.hpp"

#include <algorithm>
#include <set>

#include "kgqa/errors.hpp"
#include "kgqa/text.hpp"

namespace kgqa {

namespace {

constexpr const char* kDefaultSchemaPrompt =
    "You will act as a knowledge graph expert. Given a question and sample "
    "triples from the graph, emit a query schema: one line per step in the "
    "form (<slot>[=<entity>]) <relation> (<slot>[=<entity>]). and a final "
    "line ANSWER <slot>. Anchor at least one slot to an entity from the "
    "question.\n\nQuestion: {question}\n\nSample triples:\n{triples}\n";

struct SlotRef {
    std::string slot;
    std::optional<std::string> anchor;
};

// `e1` or `e1=alice corporation`, already stripped of its parentheses.
SlotRef parse_slot(const std::string& inner, std::size_t line_no) {
    SlotRef ref;
    auto eq = inner.find('=');
    if (eq == std::string::npos) {
        ref.slot = text::trim(inner);
    } else {
        ref.slot = text::trim(inner.substr(0, eq));
        ref.anchor = text::trim(inner.substr(eq + 1));
        if (ref.anchor->empty()) {
            throw SchemaTextError("line " + std::to_string(line_no) +
                                  ": empty anchor");
        }
    }
    if (ref.slot.empty()) {
        throw SchemaTextError("line " + std::to_string(line_no) +
                              ": empty slot name");
    }
    if (ref.slot.find_first_of(" \t") != std::string::npos) {
        throw SchemaTextError("line " + std::to_string(line_no) +
                              ": slot name contains whitespace");
    }
    return ref;
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t nl = text.find('\n', start);
        if (nl == std::string::npos) {
            lines.push_back(text.substr(start));
            break;
        }
        lines.push_back(text.substr(start, nl - start));
        start = nl + 1;
    }
    return lines;
}

// Slots in first-mention order (subject before object, steps in order).
std::vector<std::string> slot_order(const QuerySchema& schema) {
    std::vector<std::string> order;
    std::set<std::string> seen;
    for (const auto& step : schema.steps) {
        if (seen.insert(step.subject_slot).second) {
            order.push_back(step.subject_slot);
        }
        if (seen.insert(step.object_slot).second) {
            order.push_back(step.object_slot);
        }
    }
    return order;
}

void check_shape(const QuerySchema& schema) {
    if (schema.steps.empty()) {
        throw SchemaTextError("schema has zero steps");
    }
    std::map<std::string, int> degree;
    for (const auto& step : schema.steps) {
        if (step.subject_slot == step.object_slot) {
            throw SchemaTextError("self-loop step on slot '" +
                                  step.subject_slot + "'");
        }
        ++degree[step.subject_slot];
        ++degree[step.object_slot];
    }
    for (const auto& [slot, d] : degree) {
        if (d > 2) {
            throw SchemaTextError("slot '" + slot +
                                  "' appears in more than two steps");
        }
    }
    // Connectivity over the slot graph, from the first slot.
    std::set<std::string> reached{schema.steps[0].subject_slot};
    bool grew = true;
    while (grew) {
        grew = false;
        for (const auto& step : schema.steps) {
            bool s = reached.count(step.subject_slot) > 0;
            bool o = reached.count(step.object_slot) > 0;
            if (s != o) {
                reached.insert(s ? step.object_slot : step.subject_slot);
                grew = true;
            }
        }
    }
    if (reached.size() != degree.size()) {
        throw SchemaTextError("disconnected slot graph");
    }
    // Connected with max degree 2: a chain iff slots = steps + 1 (otherwise
    // the steps close a cycle or repeat).
    if (degree.size() != schema.steps.size() + 1) {
        throw SchemaTextError("steps do not form a chain");
    }
    if (schema.answer_slot.empty() || !degree.count(schema.answer_slot)) {
        throw SchemaTextError("ANSWER names unknown slot '" +
                              schema.answer_slot + "'");
    }
}

}  // namespace

QuerySchema parse_schema_text(const std::string& input) {
    QuerySchema schema;
    bool answered = false;
    std::size_t line_no = 0;
    for (const std::string& raw : split_lines(input)) {
        ++line_no;
        std::string line = text::trim(raw);
        if (line.empty()) continue;
        if (answered) {
            throw SchemaTextError("line " + std::to_string(line_no) +
                                  ": content after ANSWER line");
        }
        if (line.rfind("ANSWER", 0) == 0) {
            std::string rest = text::trim(line.substr(6));
            if (rest.empty() || rest.find_first_of(" \t") != std::string::npos) {
                throw SchemaTextError("line " + std::to_string(line_no) +
                                      ": ANSWER expects one slot name");
            }
            schema.answer_slot = rest;
            answered = true;
            continue;
        }
        // (<slot>[=<entity>]) <relation> (<slot>[=<entity>]).
        if (line.back() != '.') {
            throw SchemaTextError("line " + std::to_string(line_no) +
                                  ": step must end with '.'");
        }
        line.pop_back();
        line = text::trim(line);
        if (line.empty() || line.front() != '(' || line.back() != ')') {
            throw SchemaTextError("line " + std::to_string(line_no) +
                                  ": step must start and end with slot groups");
        }
        auto close1 = line.find(')');
        auto open2 = line.find('(', close1 + 1);
        if (close1 == std::string::npos || open2 == std::string::npos ||
            line.find(')', open2) != line.size() - 1) {
            throw SchemaTextError("line " + std::to_string(line_no) +
                                  ": malformed step");
        }
        SlotRef lhs = parse_slot(line.substr(1, close1 - 1), line_no);
        SlotRef rhs =
            parse_slot(line.substr(open2 + 1, line.size() - open2 - 2), line_no);
        std::string relation =
            text::trim(line.substr(close1 + 1, open2 - close1 - 1));
        if (relation.empty() ||
            relation.find_first_of(" \t") != std::string::npos) {
            throw SchemaTextError("line " + std::to_string(line_no) +
                                  ": relation must be a single token");
        }
        for (const SlotRef& ref : {lhs, rhs}) {
            if (!ref.anchor) continue;
            auto [it, inserted] = schema.anchors.emplace(ref.slot, *ref.anchor);
            if (!inserted && it->second != *ref.anchor) {
                throw SchemaTextError("line " + std::to_string(line_no) +
                                      ": conflicting anchors for slot '" +
                                      ref.slot + "'");
            }
        }
        schema.steps.push_back(SchemaStep{lhs.slot, relation, rhs.slot});
    }
    if (!answered) {
        throw SchemaTextError("missing ANSWER line");
    }
    check_shape(schema);
    return schema;
}

std::string schema_to_text(const QuerySchema& schema) {
    std::string out;
    auto slot_text = [&](const std::string& slot) {
        auto it = schema.anchors.find(slot);
        if (it == schema.anchors.end()) return "(" + slot + ")";
        return "(" + slot + "=" + it->second + ")";
    };
    for (const auto& step : schema.steps) {
        out += slot_text(step.subject_slot);
        out += ' ';
        out += step.relation;
        out += ' ';
        out += slot_text(step.object_slot);
        out += ".\n";
    }
    out += "ANSWER " + schema.answer_slot + "\n";
    return out;
}

cypher::CypherQuery compile_schema(const QuerySchema& schema) {
    check_shape(schema);
    // Pick the chain endpoint mentioned earliest and walk to the other end.
    std::map<std::string, int> degree;
    for (const auto& step : schema.steps) {
        ++degree[step.subject_slot];
        ++degree[step.object_slot];
    }
    std::string start;
    for (const auto& slot : slot_order(schema)) {
        if (degree[slot] == 1) {
            start = slot;
            break;
        }
    }

    cypher::CypherQuery query;
    cypher::PathPattern path;
    auto make_node = [&](const std::string& slot) {
        cypher::NodePattern node;
        node.variable = slot;
        if (auto it = schema.anchors.find(slot); it != schema.anchors.end()) {
            node.anchor = it->second;
        }
        return node;
    };
    path.nodes.push_back(make_node(start));
    std::vector<bool> used(schema.steps.size(), false);
    std::string current = start;
    for (std::size_t n = 0; n < schema.steps.size(); ++n) {
        for (std::size_t i = 0; i < schema.steps.size(); ++i) {
            if (used[i]) continue;
            const SchemaStep& step = schema.steps[i];
            if (step.subject_slot != current && step.object_slot != current) {
                continue;
            }
            used[i] = true;
            cypher::EdgePattern edge;
            edge.relation = step.relation;
            edge.reversed = step.object_slot == current;
            current = edge.reversed ? step.subject_slot : step.object_slot;
            path.edges.push_back(std::move(edge));
            path.nodes.push_back(make_node(current));
            break;
        }
    }
    query.patterns.push_back(std::move(path));
    query.returns.push_back(cypher::ReturnItem{schema.answer_slot, false});
    return query;
}

std::string to_string(const SchemaIssue& issue) {
    switch (issue.kind) {
        case SchemaIssueKind::UnknownRelation:
            return "unknown-relation " + issue.detail;
        case SchemaIssueKind::UnresolvableAnchor:
            return "unresolvable-anchor " + issue.detail;
    }
    return issue.detail;
}

std::vector<SchemaIssue> validate_schema(const QuerySchema& schema,
                                         const KnowledgeGraph& kg) {
    std::vector<SchemaIssue> issues;
    std::set<std::string> seen;
    for (const auto& step : schema.steps) {
        if (!seen.insert(step.relation).second) continue;
        if (!kg.find_relation(step.relation)) {
            issues.push_back(
                SchemaIssue{SchemaIssueKind::UnknownRelation, step.relation});
        }
    }
    for (const auto& slot : slot_order(schema)) {
        auto it = schema.anchors.find(slot);
        if (it == schema.anchors.end()) continue;
        if (!kg.resolve_top(it->second)) {
            issues.push_back(
                SchemaIssue{SchemaIssueKind::UnresolvableAnchor, it->second});
        }
    }
    return issues;
}

QuerySchema fallback_schema(const std::string& question,
                            const KnowledgeGraph& kg) {
    auto question_tokens = text::tokens(question);

    // Longest n-grams first, left to right within each length.
    std::optional<EntityId> anchor;
    for (std::size_t n = 3; n >= 1 && !anchor; --n) {
        if (question_tokens.size() < n) continue;
        for (std::size_t i = 0; i + n <= question_tokens.size(); ++i) {
            std::vector<std::string> gram(question_tokens.begin() + i,
                                          question_tokens.begin() + i + n);
            anchor = kg.resolve_top(text::join(gram, " "));
            if (anchor) break;
        }
    }
    if (!anchor) {
        throw SchemaGenError("no entity in the question resolves");
    }

    // Relations whose tokens all occur in the question, ordered by where
    // their first token first appears (ties by name).
    std::set<std::string> question_set(question_tokens.begin(),
                                       question_tokens.end());
    auto first_index = [&](const std::string& tok) {
        for (std::size_t i = 0; i < question_tokens.size(); ++i) {
            if (question_tokens[i] == tok) return i;
        }
        return question_tokens.size();
    };
    std::vector<std::pair<std::size_t, std::string>> matched;
    for (std::uint32_t r = 0; r < kg.relation_count(); ++r) {
        const std::string& name = kg.name(RelationId{r});
        auto rel_tokens = text::tokens(name);
        if (rel_tokens.empty()) continue;
        bool all = std::all_of(
            rel_tokens.begin(), rel_tokens.end(),
            [&](const std::string& t) { return question_set.count(t) > 0; });
        if (all) matched.emplace_back(first_index(rel_tokens[0]), name);
    }
    std::sort(matched.begin(), matched.end());
    if (matched.empty()) {
        throw SchemaGenError("no relation name matches the question");
    }

    QuerySchema schema;
    schema.source = SchemaSource::Fallback;
    schema.anchors.emplace("e1", kg.name(*anchor));
    for (std::size_t i = 0; i < matched.size(); ++i) {
        schema.steps.push_back(SchemaStep{"e" + std::to_string(i + 1),
                                          matched[i].second,
                                          "e" + std::to_string(i + 2)});
    }
    schema.answer_slot = "e" + std::to_string(matched.size() + 1);
    return schema;
}

std::vector<Triple> sample_triples(const std::string& question,
                                   const KnowledgeGraph& kg, int limit) {
    std::vector<Triple> out;
    if (limit <= 0) return out;
    auto question_tokens = text::tokens(question);
    std::vector<EntityId> found;
    std::set<EntityId> found_set;
    for (std::size_t n = 3; n >= 1; --n) {
        if (question_tokens.size() < n) continue;
        for (std::size_t i = 0; i + n <= question_tokens.size(); ++i) {
            std::vector<std::string> gram(question_tokens.begin() + i,
                                          question_tokens.begin() + i + n);
            auto hit = kg.resolve_top(text::join(gram, " "));
            if (hit && found_set.insert(*hit).second) found.push_back(*hit);
        }
    }
    std::set<Triple> taken;
    for (EntityId e : found) {
        for (const Triple& t : kg.neighbors(e, std::nullopt, Direction::Both)) {
            if (!taken.insert(t).second) continue;
            out.push_back(t);
            if (out.size() == static_cast<std::size_t>(limit)) return out;
        }
    }
    return out;
}

QuerySchema generate_schema(const std::string& question, Provider* provider,
                            const KnowledgeGraph& kg,
                            const SchemaGenConfig& config) {
    if (question.empty()) {
        throw SchemaGenError("empty question");
    }
    if (config.use_provider && provider != nullptr) {
        try {
            std::string triples_text;
            for (const Triple& t :
                 sample_triples(question, kg, config.sample_triples)) {
                triples_text += "(" + kg.name(t.subject) + ", " +
                                kg.name(t.relation) + ", " + kg.name(t.object) +
                                ")\n";
            }
            std::string prompt = config.prompt_template.empty()
                                     ? kDefaultSchemaPrompt
                                     : config.prompt_template;
            auto substitute = [&](const std::string& key,
                                  const std::string& value) {
                auto pos = prompt.find(key);
                while (pos != std::string::npos) {
                    prompt.replace(pos, key.size(), value);
                    pos = prompt.find(key, pos + value.size());
                }
            };
            substitute("{question}", question);
            substitute("{triples}", triples_text);
            CompletionRequest request{prompt, 512, 0.0, Stage::Schema};
            auto schema = parse_schema_text(provider->complete(request).text);
            if (!schema.anchors.empty()) {
                schema.source = SchemaSource::Provider;
                return schema;
            }
        } catch (const Error&) {
            // Provider or parse trouble: the lexical fallback takes over.
        }
    }
    try {
        return fallback_schema(question, kg);
    } catch (const Error& e) {
        throw SchemaGenError(std::string("schema generation failed: ") +
                             e.what());
    }
}

}  // namespace kgqa
