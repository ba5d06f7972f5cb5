#pragma once
// Error types shared across the library. Everything derives from kgqa::Error
// so callers can catch one base at API boundaries; the subclasses carry the
// structured payload (line numbers, character offsets, retry counts).

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace kgqa {

class Error : public std::runtime_error {
public:
    explicit Error(std::string msg) : std::runtime_error(std::move(msg)) {}
};

// Bad input while loading a TSV graph or alias file; line is 1-based.
class IngestError : public Error {
public:
    IngestError(std::size_t line, const std::string& msg)
        : Error("line " + std::to_string(line) + ": " + msg), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

// Entity or relation id outside the owning graph.
class LookupError : public Error {
public:
    using Error::Error;
};

// Lexical failure in query text; offset is a 0-based character position.
class LexError : public Error {
public:
    LexError(std::size_t offset, const std::string& msg)
        : Error(msg + " at offset " + std::to_string(offset)), offset_(offset) {}
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

// Grammar violation; carries the set of token spellings that would have
// been accepted at the failure position.
class ParseError : public Error {
public:
    ParseError(std::size_t offset, std::string msg, std::vector<std::string> expected = {})
        : Error(format(offset, msg, expected)),
          offset_(offset),
          expected_(std::move(expected)) {}
    std::size_t offset() const { return offset_; }
    const std::vector<std::string>& expected() const { return expected_; }

private:
    static std::string format(std::size_t offset, const std::string& msg,
                              const std::vector<std::string>& expected) {
        std::string out = msg;
        if (!expected.empty()) {
            out += " (expected";
            for (const auto& e : expected) out += " " + e;
            out += ")";
        }
        out += " at offset " + std::to_string(offset);
        return out;
    }
    std::size_t offset_;
    std::vector<std::string> expected_;
};

// Variable misuse detected after parsing (unbound, or wrong role).
class SemanticError : public Error {
public:
    SemanticError(std::string variable, const std::string& msg)
        : Error(msg), variable_(std::move(variable)) {}
    const std::string& variable() const { return variable_; }

private:
    std::string variable_;
};

// Query execution failure (anchors that name nothing in the graph).
class ExecError : public Error {
public:
    ExecError(std::string anchor, const std::string& msg)
        : Error(msg), anchor_(std::move(anchor)) {}
    const std::string& anchor() const { return anchor_; }

private:
    std::string anchor_;
};

// Completion backend failure after all retries.
class ProviderError : public Error {
public:
    ProviderError(int attempts, const std::string& msg)
        : Error(msg + " (after " + std::to_string(attempts) + " attempt(s))"),
          attempts_(attempts) {}
    int attempts() const { return attempts_; }

private:
    int attempts_;
};

// Scripted provider ran out of queued responses and has no default.
class ScriptExhaustedError : public Error {
public:
    using Error::Error;
};

// Schema text that does not follow the schema line grammar.
class SchemaTextError : public Error {
public:
    using Error::Error;
};

// Neither the provider path nor the lexical fallback produced a schema.
class SchemaGenError : public Error {
public:
    using Error::Error;
};

// Subgraph construction had nothing to expand from.
class SubgraphError : public Error {
public:
    using Error::Error;
};

// Bad evaluation dataset line; line is 1-based.
class DatasetError : public Error {
public:
    DatasetError(std::size_t line, const std::string& msg)
        : Error("line " + std::to_string(line) + ": " + msg), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace kgqa
