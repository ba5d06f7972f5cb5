#include <string>

#include "kgqa/cypher.hpp"

namespace kgqa::cypher {

namespace {

// Double quotes unless the value itself contains one. Values holding both
// quote characters cannot come out of parse (no escapes), so any AST the
// parser produced renders back to a parseable literal.
std::string quote(const std::string& value) {
    if (value.find('"') == std::string::npos) return '"' + value + '"';
    return '\'' + value + '\'';
}

void render_node(std::string& out, const NodePattern& node) {
    out += '(';
    out += node.variable;
    if (node.anchor) {
        if (!node.variable.empty()) out += ' ';
        out += "{name:";
        out += quote(*node.anchor);
        out += '}';
    }
    out += ')';
}

void render_edge(std::string& out, const EdgePattern& edge) {
    out += edge.reversed ? "<-[" : "-[";
    out += edge.variable;
    out += ':';
    out += edge.relation;
    out += edge.reversed ? "]-" : "]->";
}

}  // namespace

std::string render(const CypherQuery& query) {
    std::string out = "MATCH ";
    for (std::size_t p = 0; p < query.patterns.size(); ++p) {
        if (p) out += ", ";
        const PathPattern& path = query.patterns[p];
        render_node(out, path.nodes[0]);
        for (std::size_t i = 0; i < path.edges.size(); ++i) {
            render_edge(out, path.edges[i]);
            render_node(out, path.nodes[i + 1]);
        }
    }
    if (!query.filters.empty()) {
        out += " WHERE ";
        for (std::size_t i = 0; i < query.filters.size(); ++i) {
            if (i) out += " AND ";
            out += query.filters[i].variable;
            out += ".name = ";
            out += quote(query.filters[i].value);
        }
    }
    out += " RETURN ";
    for (std::size_t i = 0; i < query.returns.size(); ++i) {
        if (i) out += ", ";
        out += query.returns[i].variable;
        if (query.returns[i].with_name) out += ".name";
    }
    if (query.limit) {
        out += " LIMIT ";
        out += std::to_string(*query.limit);
    }
    return out;
}

}  // namespace kgqa::cypher
