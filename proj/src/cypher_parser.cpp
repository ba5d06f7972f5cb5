#include <cctype>
#include <charconv>
#include <set>
#include <string>

#include "kgqa/cypher.hpp"
#include "kgqa/errors.hpp"

namespace kgqa::cypher {

namespace {

std::string upper(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (unsigned char c : s) out.push_back(static_cast<char>(std::toupper(c)));
    return out;
}

// Recursive-descent parser over the token stream. Every failure throws
// ParseError with the offset of the offending token (or end of input).
class Parser {
public:
    Parser(std::vector<Token> tokens, std::size_t end_offset)
        : tokens_(std::move(tokens)), end_offset_(end_offset) {}

    CypherQuery parse_query() {
        expect_keyword("MATCH");
        CypherQuery q;
        q.patterns.push_back(parse_path());
        while (accept_punct(",")) {
            q.patterns.push_back(parse_path());
        }
        if (accept_keyword("WHERE")) {
            q.filters.push_back(parse_condition());
            while (accept_keyword("AND")) {
                q.filters.push_back(parse_condition());
            }
        }
        expect_keyword("RETURN");
        q.returns.push_back(parse_return_item());
        while (accept_punct(",")) {
            q.returns.push_back(parse_return_item());
        }
        if (accept_keyword("LIMIT")) {
            q.limit = parse_limit();
        }
        if (pos_ < tokens_.size()) {
            throw ParseError(offset(), "unexpected trailing input");
        }
        check_semantics(q);
        return q;
    }

private:
    std::size_t offset() const {
        return pos_ < tokens_.size() ? tokens_[pos_].offset : end_offset_;
    }

    const Token* peek(std::size_t ahead = 0) const {
        return pos_ + ahead < tokens_.size() ? &tokens_[pos_ + ahead] : nullptr;
    }

    bool peek_punct(std::string_view p, std::size_t ahead = 0) const {
        const Token* t = peek(ahead);
        return t != nullptr && t->kind == TokenKind::Punct && t->text == p;
    }

    bool accept_punct(std::string_view p) {
        if (!peek_punct(p)) return false;
        ++pos_;
        return true;
    }

    void expect_punct(std::string_view p) {
        if (!accept_punct(p)) {
            throw ParseError(offset(), "unexpected token",
                             {std::string("'") + std::string(p) + "'"});
        }
    }

    bool accept_keyword(std::string_view kw) {
        const Token* t = peek();
        if (t == nullptr || t->kind != TokenKind::Keyword || upper(t->text) != kw) {
            return false;
        }
        ++pos_;
        return true;
    }

    void expect_keyword(std::string_view kw) {
        if (!accept_keyword(kw)) {
            throw ParseError(offset(), "unexpected token", {std::string(kw)});
        }
    }

    std::string expect_identifier(const char* what) {
        const Token* t = peek();
        if (t == nullptr || t->kind != TokenKind::Identifier) {
            throw ParseError(offset(), std::string("expected ") + what,
                             {"identifier"});
        }
        ++pos_;
        return t->text;
    }

    // Require the property name `name`, the only property in the dialect.
    void expect_name_property() {
        const Token* t = peek();
        if (t == nullptr || t->kind != TokenKind::Identifier || t->text != "name") {
            throw ParseError(offset(), "unknown property", {"name"});
        }
        ++pos_;
    }

    std::string expect_string() {
        const Token* t = peek();
        if (t == nullptr || t->kind != TokenKind::StringLit) {
            throw ParseError(offset(), "expected string literal",
                             {"string literal"});
        }
        ++pos_;
        return t->text.substr(1, t->text.size() - 2);  // strip quotes
    }

    NodePattern parse_node() {
        expect_punct("(");
        NodePattern node;
        const Token* t = peek();
        if (t != nullptr && t->kind == TokenKind::Identifier) {
            node.variable = t->text;
            ++pos_;
        }
        if (accept_punct("{")) {
            expect_name_property();
            expect_punct(":");
            node.anchor = expect_string();
            expect_punct("}");
        }
        expect_punct(")");
        return node;
    }

    EdgePattern parse_edge_body() {
        EdgePattern edge;
        const Token* t = peek();
        if (t != nullptr && t->kind == TokenKind::Identifier && peek_punct(":", 1)) {
            edge.variable = t->text;
            ++pos_;
        }
        expect_punct(":");
        edge.relation = expect_identifier("relation name");
        expect_punct("]");
        return edge;
    }

    PathPattern parse_path() {
        PathPattern path;
        path.nodes.push_back(parse_node());
        while (peek_punct("-") || peek_punct("<")) {
            EdgePattern edge;
            if (accept_punct("<")) {
                expect_punct("-");
                expect_punct("[");
                edge = parse_edge_body();
                expect_punct("-");
                edge.reversed = true;
            } else {
                expect_punct("-");
                expect_punct("[");
                edge = parse_edge_body();
                expect_punct("-");
                expect_punct(">");
            }
            path.edges.push_back(std::move(edge));
            path.nodes.push_back(parse_node());
        }
        return path;
    }

    Condition parse_condition() {
        Condition cond;
        cond.variable = expect_identifier("variable");
        expect_punct(".");
        expect_name_property();
        expect_punct("=");
        cond.value = expect_string();
        return cond;
    }

    ReturnItem parse_return_item() {
        ReturnItem item;
        item.variable = expect_identifier("variable");
        if (accept_punct(".")) {
            expect_name_property();
            item.with_name = true;
        }
        return item;
    }

    std::uint64_t parse_limit() {
        const Token* t = peek();
        if (t == nullptr || t->kind != TokenKind::Number) {
            throw ParseError(offset(), "expected count", {"integer"});
        }
        std::uint64_t value = 0;
        auto [ptr, ec] = std::from_chars(t->text.data(),
                                         t->text.data() + t->text.size(), value);
        if (ec != std::errc() || ptr != t->text.data() + t->text.size()) {
            throw ParseError(t->offset, "LIMIT count out of range");
        }
        if (value == 0) {
            throw ParseError(t->offset, "LIMIT must be positive");
        }
        ++pos_;
        return value;
    }

    static void check_semantics(const CypherQuery& q) {
        std::set<std::string> node_vars;
        std::set<std::string> edge_vars;
        for (const auto& path : q.patterns) {
            for (const auto& node : path.nodes) {
                if (!node.variable.empty()) node_vars.insert(node.variable);
            }
            for (const auto& edge : path.edges) {
                if (!edge.variable.empty()) edge_vars.insert(edge.variable);
            }
        }
        for (const auto& var : node_vars) {
            if (edge_vars.count(var)) {
                throw SemanticError(var, "variable '" + var +
                                             "' used as both node and edge");
            }
        }
        auto check_use = [&](const std::string& var) {
            if (node_vars.count(var)) return;
            if (edge_vars.count(var)) {
                throw SemanticError(
                    var, "edge variable '" + var + "' has no name to reference");
            }
            throw SemanticError(var, "unbound variable " + var);
        };
        for (const auto& cond : q.filters) check_use(cond.variable);
        for (const auto& item : q.returns) check_use(item.variable);
    }

    std::vector<Token> tokens_;
    std::size_t end_offset_;
    std::size_t pos_ = 0;
};

}  // namespace

CypherQuery parse(std::string_view text) {
    Parser parser(tokenize(text), text.size());
    return parser.parse_query();
}

}  // namespace kgqa::cypher
