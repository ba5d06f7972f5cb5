#include "kgqa/llm_provider.hpp"

#include <cstdlib>
#include <fstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "kgqa/errors.hpp"

namespace kgqa {

namespace {

using nlohmann::json;

void validate(const CompletionRequest& request) {
    if (request.prompt.empty()) throw Error("completion request: empty prompt");
    if (request.max_tokens <= 0) {
        throw Error("completion request: max_tokens must be positive");
    }
    if (request.temperature < 0.0) {
        throw Error("completion request: negative temperature");
    }
}

}  // namespace

std::string_view stage_name(Stage stage) {
    switch (stage) {
        case Stage::Schema: return "schema";
        case Stage::Answer: return "answer";
        case Stage::Hypothesis: return "hypothesis";
        case Stage::PathScore: return "path_score";
    }
    return "unknown";
}

std::optional<Stage> stage_from_name(std::string_view name) {
    if (name == "schema") return Stage::Schema;
    if (name == "answer") return Stage::Answer;
    if (name == "hypothesis") return Stage::Hypothesis;
    if (name == "path_score") return Stage::PathScore;
    return std::nullopt;
}

ScriptedProvider::ScriptedProvider(std::string default_response)
    : default_(std::move(default_response)) {}

std::shared_ptr<ScriptedProvider> ScriptedProvider::from_file(
    const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open script file: " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("script file " + path + ": " + e.what());
    }
    if (!doc.is_object()) {
        throw ConfigError("script file " + path + ": top level must be an object");
    }
    auto provider = std::make_shared<ScriptedProvider>();
    if (doc.contains("default")) {
        if (!doc["default"].is_string()) {
            throw ConfigError("script file " + path + ": 'default' must be a string");
        }
        provider->set_default(doc["default"].get<std::string>());
    }
    if (doc.contains("responses")) {
        const json& responses = doc["responses"];
        if (!responses.is_object()) {
            throw ConfigError("script file " + path +
                              ": 'responses' must be an object");
        }
        for (const auto& [key, value] : responses.items()) {
            auto stage = stage_from_name(key);
            if (!stage) {
                throw ConfigError("script file " + path + ": unknown stage '" +
                                  key + "'");
            }
            if (!value.is_array()) {
                throw ConfigError("script file " + path + ": responses." + key +
                                  " must be an array of strings");
            }
            for (const json& item : value) {
                if (!item.is_string()) {
                    throw ConfigError("script file " + path + ": responses." +
                                      key + " must be an array of strings");
                }
                provider->queue(*stage, item.get<std::string>());
            }
        }
    }
    return provider;
}

void ScriptedProvider::queue(Stage tag, std::string response) {
    std::lock_guard lock(mu_);
    queues_[tag].push_back(std::move(response));
}

void ScriptedProvider::set_default(std::string response) {
    std::lock_guard lock(mu_);
    default_ = std::move(response);
}

CompletionResponse ScriptedProvider::complete(const CompletionRequest& request) {
    validate(request);
    std::lock_guard lock(mu_);
    log_.push_back(request);
    if (auto it = queues_.find(request.tag);
        it != queues_.end() && !it->second.empty()) {
        CompletionResponse response{it->second.front(), "scripted"};
        it->second.pop_front();
        return response;
    }
    if (default_) return CompletionResponse{*default_, "scripted"};
    throw ScriptExhaustedError("no scripted response left for stage '" +
                               std::string(stage_name(request.tag)) +
                               "' and no default configured");
}

std::vector<CompletionRequest> ScriptedProvider::requests() const {
    std::lock_guard lock(mu_);
    return log_;
}

HttpProvider::HttpProvider(HttpProviderConfig config)
    : config_(std::move(config)) {
    auto scheme_end = config_.url.find("://");
    if (scheme_end == std::string::npos) {
        throw ConfigError("provider URL must include a scheme: " + config_.url);
    }
    auto path_start = config_.url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        base_ = config_.url;
        path_ = "/";
    } else {
        base_ = config_.url.substr(0, path_start);
        path_ = config_.url.substr(path_start);
    }
}

CompletionResponse HttpProvider::complete(const CompletionRequest& request) {
    validate(request);
    json body = {{"prompt", request.prompt},
                 {"max_tokens", request.max_tokens},
                 {"temperature", request.temperature}};
    const std::string payload = body.dump();

    std::string last_failure;
    const int attempts = 1 + std::max(0, config_.max_retries);
    for (int attempt = 0; attempt < attempts; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(config_.backoff_base * (1 << (attempt - 1)));
        }
        // httplib clients are not safe for concurrent use, so each call gets
        // its own; connection setup cost is irrelevant next to the model.
        httplib::Client client(base_);
        client.set_connection_timeout(10, 0);
        client.set_read_timeout(120, 0);
        httplib::Headers headers;
        if (!config_.bearer_token.empty()) {
            headers.emplace("Authorization", "Bearer " + config_.bearer_token);
        }
        auto res = client.Post(path_, headers, payload, "application/json");
        if (!res) {
            last_failure = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status < 200 || res->status >= 300) {
            last_failure = "HTTP status " + std::to_string(res->status);
            continue;
        }
        try {
            json doc = json::parse(res->body);
            if (!doc.is_object() || !doc.contains("text") ||
                !doc["text"].is_string()) {
                last_failure = "response body lacks a string 'text' field";
                continue;
            }
            return CompletionResponse{doc["text"].get<std::string>(), "http"};
        } catch (const json::exception& e) {
            last_failure = std::string("malformed response body: ") + e.what();
            continue;
        }
    }
    throw ProviderError(attempts, "completion request to " + config_.url +
                                      " failed: " + last_failure);
}

std::shared_ptr<Provider> make_provider(const std::string& spec,
                                        const std::string& token_env) {
    if (spec.rfind("scripted:", 0) == 0) {
        return ScriptedProvider::from_file(spec.substr(9));
    }
    std::string url;
    if (spec.rfind("http://", 0) == 0 || spec.rfind("https://", 0) == 0) {
        url = spec;
    } else if (spec.rfind("http:", 0) == 0) {
        url = spec.substr(5);
    } else {
        throw ConfigError("unrecognized provider spec: " + spec);
    }
    HttpProviderConfig config;
    config.url = url;
    if (!token_env.empty()) {
        if (const char* token = std::getenv(token_env.c_str())) {
            config.bearer_token = token;
        }
    }
    return std::make_shared<HttpProvider>(config);
}

}  // namespace kgqa
