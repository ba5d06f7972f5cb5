#pragma once
// Benchmark harness: JSONL datasets, Hits@1 / exact-set accuracy / F1 with
// case- and whitespace-insensitive matching, and multi-variant comparison
// reports (markdown + JSON). Report files contain no timing, so repeated
// scripted runs are byte-identical.

#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "kgqa/graph_store.hpp"
#include "kgqa/llm_provider.hpp"
#include "kgqa/reasoning.hpp"

namespace kgqa {

struct EvalRecord {
    std::string id;
    std::string question;
    std::vector<std::string> gold;  // never empty
};

// One JSON object {"id", "question", "answers": [...]} per line. Throws
// DatasetError (with line number) on malformed JSON, missing fields, empty
// answer arrays, or duplicate ids.
std::vector<EvalRecord> load_dataset(std::istream& source);

// 1 iff the top-ranked prediction, normalized, is in gold.
int hits_at_1(const std::vector<std::string>& predicted,
              const std::vector<std::string>& gold);

// 1 iff predicted and gold are equal as normalized sets.
int accuracy(const std::vector<std::string>& predicted,
             const std::vector<std::string>& gold);

// 2PR/(P+R) over normalized set overlap; 1 when both sides are empty, 0
// when exactly one is.
double f1(const std::vector<std::string>& predicted,
          const std::vector<std::string>& gold);

struct RunConfig {
    std::string label;  // report row label; empty = variant name
    Variant variant = Variant::Full;
    std::string provider_spec;  // scripted:<file> | http:<url>; empty = none
    std::string token_env;
    double relevance_threshold = 0.0;
    std::optional<int> hop_budget;
    int max_iterations = 3;
    int sample_triples = 20;
};

struct QuestionOutcome {
    std::string id;
    std::vector<std::string> predicted;  // ranked canonical names
    bool answered = false;
    int hits = 0;
    int acc = 0;
    double f1 = 0.0;
};

struct VariantResult {
    std::string label;
    Variant variant = Variant::Full;
    double hits_at_1 = 0.0;  // means over the dataset
    double accuracy = 0.0;
    double f1 = 0.0;
    std::vector<QuestionOutcome> outcomes;
};

struct Report {
    std::vector<VariantResult> rows;       // config order
    double wall_clock_seconds = 0.0;       // not serialized
    std::string to_markdown() const;
    nlohmann::json to_json() const;
};

using ProviderFactory =
    std::function<std::shared_ptr<Provider>(const RunConfig&)>;

// Run every config over every record, sequentially and in order, with a
// fresh provider per config. A question that throws is recorded as
// abstained; the run itself never aborts. The default factory builds
// providers from RunConfig::provider_spec (none when empty).
Report run_benchmark(const KnowledgeGraph& kg,
                     const std::vector<EvalRecord>& dataset,
                     const std::vector<RunConfig>& configs,
                     const ProviderFactory& factory = {});

}  // namespace kgqa
