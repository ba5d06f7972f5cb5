#pragma once
// Query schemas: the chain of (slot, relation, slot) constraints that leads
// from anchored entities to the answer slot. Text form, one step per line:
//
//   (e1=alice) friend_of (e2).
//   (e2) works_at (e3).
//   ANSWER e3
//
// A slot written `name=entity` is anchored to that entity. Valid schemas are
// chains: connected, every slot in at most two steps, no self-loop steps.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kgqa/cypher.hpp"
#include "kgqa/graph_store.hpp"
#include "kgqa/llm_provider.hpp"

namespace kgqa {

struct SchemaStep {
    std::string subject_slot;
    std::string relation;
    std::string object_slot;
    bool operator==(const SchemaStep&) const = default;
};

enum class SchemaSource { Provider, Fallback };

struct QuerySchema {
    std::vector<SchemaStep> steps;               // never empty when valid
    std::string answer_slot;
    std::map<std::string, std::string> anchors;  // slot -> entity surface form
    SchemaSource source = SchemaSource::Provider;
    bool operator==(const QuerySchema& other) const {
        return steps == other.steps && answer_slot == other.answer_slot &&
               anchors == other.anchors;
    }
};

// Strict parser for the text form. Throws SchemaTextError on: missing or
// misplaced ANSWER line, zero steps, self-loop steps, slots in more than two
// steps, disconnected or cyclic slot graphs, conflicting anchors.
QuerySchema parse_schema_text(const std::string& text);

// Inverse of parse_schema_text: parse(schema_to_text(s)) == s.
std::string schema_to_text(const QuerySchema& schema);

// One MATCH path walking the chain from its earliest-mentioned endpoint.
// Steps traversed against their stated direction render as `<-[:r]-`.
// Anchored slots become `{name:"..."}`; RETURN names the answer slot.
cypher::CypherQuery compile_schema(const QuerySchema& schema);

enum class SchemaIssueKind { UnknownRelation, UnresolvableAnchor };

struct SchemaIssue {
    SchemaIssueKind kind;
    std::string detail;  // relation name or anchor surface form
    bool operator==(const SchemaIssue&) const = default;
};

std::string to_string(const SchemaIssue& issue);

// Unknown relations (step order, deduplicated) followed by unresolvable
// anchors (slot order). Empty means the schema can execute as-is.
std::vector<SchemaIssue> validate_schema(const QuerySchema& schema,
                                         const KnowledgeGraph& kg);

// Provider-free schema construction. Anchor: first maximal question n-gram
// (n = 3, 2, 1, left to right) with a resolve_entity hit. Relations: KG
// relation names whose word tokens all occur in the question, ordered by
// where their first token first occurs. Emits the left-to-right chain
// anchor -> e2 -> ...; answer slot is the last. Throws SchemaGenError when
// no anchor resolves or no relation matches.
QuerySchema fallback_schema(const std::string& question,
                            const KnowledgeGraph& kg);

struct SchemaGenConfig {
    bool use_provider = true;  // false: lexical fallback only
    int sample_triples = 20;   // KG triples shown in the prompt
    // Prompt template; {question} and {triples} are substituted. Empty
    // selects the built-in template.
    std::string prompt_template;
};

// Provider-backed generation with the lexical fallback behind it. The
// provider response must parse and carry at least one anchor; anything
// else (including provider errors) routes to fallback_schema. Throws
// SchemaGenError only when the fallback fails too.
QuerySchema generate_schema(const std::string& question, Provider* provider,
                            const KnowledgeGraph& kg,
                            const SchemaGenConfig& config = {});

// The K triples shown to the provider: neighbors of entities that question
// n-grams resolve to, in discovery order.
std::vector<Triple> sample_triples(const std::string& question,
                                   const KnowledgeGraph& kg, int limit);

}  // namespace kgqa
