#include <array>
#include <cctype>
#include <string_view>

#include "kgqa/cypher.hpp"
#include "kgqa/errors.hpp"
#include "kgqa/text.hpp"

namespace kgqa::cypher {

namespace {

constexpr std::string_view kPunct = "()[]{}:,.-<>=";

bool is_ident_start(unsigned char c) {
    return std::isalpha(c) != 0 || c == '_';
}

bool is_ident_char(unsigned char c) {
    return std::isalnum(c) != 0 || c == '_';
}

bool is_keyword(std::string_view word) {
    static const std::array<std::string_view, 5> kw = {"MATCH", "WHERE",
                                                       "RETURN", "LIMIT", "AND"};
    std::string upper;
    upper.reserve(word.size());
    for (unsigned char c : word) {
        upper.push_back(static_cast<char>(std::toupper(c)));
    }
    for (auto k : kw) {
        if (upper == k) return true;
    }
    return false;
}

}  // namespace

std::vector<Token> tokenize(std::string_view text) {
    std::vector<Token> out;
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        unsigned char c = static_cast<unsigned char>(text[i]);
        if (std::isspace(c)) {
            ++i;
            continue;
        }
        if (c == '"' || c == '\'') {
            std::size_t open = i;
            std::size_t close = text.find(static_cast<char>(c), i + 1);
            if (close == std::string_view::npos) {
                throw LexError(open, "unterminated string literal");
            }
            out.push_back(Token{TokenKind::StringLit,
                                std::string(text.substr(open, close - open + 1)),
                                open});
            i = close + 1;
            continue;
        }
        if (std::isdigit(c)) {
            std::size_t start = i;
            while (i < n && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
            out.push_back(Token{TokenKind::Number,
                                std::string(text.substr(start, i - start)), start});
            continue;
        }
        if (is_ident_start(c)) {
            std::size_t start = i;
            while (i < n && is_ident_char(static_cast<unsigned char>(text[i]))) ++i;
            std::string word(text.substr(start, i - start));
            TokenKind kind =
                is_keyword(word) ? TokenKind::Keyword : TokenKind::Identifier;
            out.push_back(Token{kind, std::move(word), start});
            continue;
        }
        if (kPunct.find(static_cast<char>(c)) != std::string_view::npos) {
            out.push_back(Token{TokenKind::Punct, std::string(1, text[i]), i});
            ++i;
            continue;
        }
        throw LexError(i, "character outside the query alphabet");
    }
    return out;
}

}  // namespace kgqa::cypher
