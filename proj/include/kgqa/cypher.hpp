#pragma once
// A small deterministic Cypher dialect: MATCH paths over named relations,
// `{name:"..."}` anchors, `var.name = "..."` filters, RETURN projection,
// positive LIMIT. Grammar:
//
//   query := "MATCH" path ("," path)* ["WHERE" cond ("AND" cond)*]
//            "RETURN" item ("," item)* ["LIMIT" integer]
//   path  := node (edge node)*
//   node  := "(" [ident] ["{" "name" ":" strlit "}"] ")"
//   edge  := "-[" [ident] ":" ident "]->" | "<-[" [ident] ":" ident "]-"
//   cond  := ident "." "name" "=" strlit
//   item  := ident ["." "name"]
//
// Keywords are case-insensitive; string literals are single- or
// double-quoted with no escapes. Execution uses set semantics with rows
// sorted lexicographically by canonical entity names, so identical inputs
// always produce identical tables.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kgqa/graph_store.hpp"

namespace kgqa::cypher {

enum class TokenKind { Keyword, Identifier, StringLit, Number, Punct };

struct Token {
    TokenKind kind;
    std::string text;    // original spelling
    std::size_t offset;  // 0-based character position
};

// Throws LexError on unterminated literals or bytes outside the alphabet.
std::vector<Token> tokenize(std::string_view text);

struct NodePattern {
    std::string variable;               // empty for an anonymous node
    std::optional<std::string> anchor;  // {name:"..."} entity surface form
    bool operator==(const NodePattern&) const = default;
};

struct EdgePattern {
    std::string variable;  // empty for an anonymous edge
    std::string relation;
    bool reversed = false;  // true renders as <-[:rel]-
    bool operator==(const EdgePattern&) const = default;
};

struct PathPattern {
    std::vector<NodePattern> nodes;  // never empty
    std::vector<EdgePattern> edges;  // edges.size() == nodes.size() - 1
    bool operator==(const PathPattern&) const = default;
};

struct Condition {
    std::string variable;
    std::string value;
    bool operator==(const Condition&) const = default;
};

struct ReturnItem {
    std::string variable;
    bool with_name = false;  // written as var.name
    bool operator==(const ReturnItem&) const = default;
};

struct CypherQuery {
    std::vector<PathPattern> patterns;
    std::vector<Condition> filters;
    std::vector<ReturnItem> returns;  // never empty
    std::optional<std::uint64_t> limit;
    bool operator==(const CypherQuery&) const = default;
};

// tokenize + recursive descent + semantic checks (variables in WHERE and
// RETURN must be bound node variables; a name cannot serve as both node and
// edge variable). Throws LexError, ParseError, or SemanticError.
CypherQuery parse(std::string_view text);

// Canonical text; parse(render(q)) is structurally identical to q for any
// query obtained from parse.
std::string render(const CypherQuery& query);

struct BindingTable {
    std::vector<std::string> columns;
    std::vector<std::vector<EntityId>> rows;  // duplicate-free, sorted by names
    bool operator==(const BindingTable&) const = default;
};

// Match the query against the view. Anchors resolve through the base
// graph's alias table (top candidate; ExecError if nothing resolves); an
// unknown relation name yields an empty table. Rows are deduplicated,
// sorted lexicographically by canonical names, then truncated by LIMIT.
BindingTable execute(const GraphView& graph, const CypherQuery& query);

// Same match, but the table covers every named node variable (first-mention
// order) and ignores RETURN projection and LIMIT. Reasoning uses this to
// count surviving candidates per slot.
BindingTable execute_full(const GraphView& graph, const CypherQuery& query);

}  // namespace kgqa::cypher
