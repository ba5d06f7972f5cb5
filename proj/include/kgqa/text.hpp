#pragma once
// Shared lexical helpers. One tokenizer for the whole pipeline: lowercase,
// split on every non-alphanumeric character (underscores included), so
// "friend_of" and "Alice's" both break into comparable word tokens.

#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace kgqa::text {

std::string to_lower(std::string_view s);

// Maximal runs of [a-z0-9] after lowercasing.
std::vector<std::string> tokens(std::string_view s);

std::set<std::string> token_set(std::string_view s);

// Lowercase, trim, collapse internal whitespace runs to single spaces.
// Used for answer/gold comparison in metrics.
std::string normalize(std::string_view s);

std::string trim(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace kgqa::text
