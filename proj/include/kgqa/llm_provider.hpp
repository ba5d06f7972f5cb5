#pragma once
// Text-completion backends. Two implementations:
//  - ScriptedProvider: canned responses keyed by pipeline stage, FIFO per
//    stage with an optional default. Deterministic; the workhorse for tests
//    and offline runs.
//  - HttpProvider: POST {"prompt","max_tokens","temperature"} to an
//    endpoint, expect {"text"} back; bounded retries with exponential
//    backoff.

#include <chrono>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace kgqa {

// Pipeline stage a completion belongs to; the scripted provider keys its
// response queues off this.
enum class Stage { Schema, Answer, Hypothesis, PathScore };

std::string_view stage_name(Stage stage);
std::optional<Stage> stage_from_name(std::string_view name);

struct CompletionRequest {
    std::string prompt;
    int max_tokens = 256;
    double temperature = 0.0;
    Stage tag = Stage::Schema;
};

struct CompletionResponse {
    std::string text;
    std::string provider_name;
};

class Provider {
public:
    virtual ~Provider() = default;
    virtual CompletionResponse complete(const CompletionRequest& request) = 0;
    virtual std::string name() const = 0;
};

class ScriptedProvider final : public Provider {
public:
    ScriptedProvider() = default;
    explicit ScriptedProvider(std::string default_response);

    // JSON file: {"default": str?, "responses": {"schema": [str...], ...}}
    // with stage keys schema | answer | hypothesis | path_score.
    static std::shared_ptr<ScriptedProvider> from_file(const std::string& path);

    void queue(Stage tag, std::string response);
    void set_default(std::string response);

    CompletionResponse complete(const CompletionRequest& request) override;
    std::string name() const override { return "scripted"; }

    // Copy of every request seen so far, in arrival order.
    std::vector<CompletionRequest> requests() const;

private:
    mutable std::mutex mu_;
    std::map<Stage, std::deque<std::string>> queues_;
    std::optional<std::string> default_;
    std::vector<CompletionRequest> log_;
};

struct HttpProviderConfig {
    std::string url;           // e.g. http://localhost:8080/complete
    std::string bearer_token;  // empty: no Authorization header
    int max_retries = 2;       // attempts = 1 + max_retries
    std::chrono::milliseconds backoff_base{100};
};

class HttpProvider final : public Provider {
public:
    explicit HttpProvider(HttpProviderConfig config);

    CompletionResponse complete(const CompletionRequest& request) override;
    std::string name() const override { return "http"; }

private:
    HttpProviderConfig config_;
    std::string base_;  // scheme://host[:port]
    std::string path_;
};

// spec is `scripted:<script file>` or an HTTP endpoint (`http:<url>` or a
// bare http(s) URL). The bearer token, if any, is read from `token_env`.
std::shared_ptr<Provider> make_provider(const std::string& spec,
                                        const std::string& token_env = "");

}  // namespace kgqa
