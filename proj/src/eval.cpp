#include "kgqa/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <istream>
#include <set>

#include "kgqa/errors.hpp"
#include "kgqa/text.hpp"

namespace kgqa {

namespace {

using nlohmann::json;

std::set<std::string> normalized_set(const std::vector<std::string>& values) {
    std::set<std::string> out;
    for (const auto& v : values) out.insert(text::normalize(v));
    return out;
}

std::string format_metric(double value) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%.3f", value);
    return buf;
}

}  // namespace

std::vector<EvalRecord> load_dataset(std::istream& source) {
    std::vector<EvalRecord> records;
    std::set<std::string> ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(source, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (text::trim(line).empty()) continue;
        json doc;
        try {
            doc = json::parse(line);
        } catch (const json::exception& e) {
            throw DatasetError(line_no, std::string("malformed JSON: ") + e.what());
        }
        if (!doc.is_object() || !doc.contains("id") || !doc["id"].is_string() ||
            !doc.contains("question") || !doc["question"].is_string() ||
            !doc.contains("answers") || !doc["answers"].is_array()) {
            throw DatasetError(line_no,
                               "expected {\"id\", \"question\", \"answers\"}");
        }
        EvalRecord record;
        record.id = doc["id"].get<std::string>();
        record.question = doc["question"].get<std::string>();
        for (const json& a : doc["answers"]) {
            if (!a.is_string()) {
                throw DatasetError(line_no, "answers must be strings");
            }
            record.gold.push_back(a.get<std::string>());
        }
        if (record.gold.empty()) {
            throw DatasetError(line_no, "empty answers array");
        }
        if (!ids.insert(record.id).second) {
            throw DatasetError(line_no, "duplicate id '" + record.id + "'");
        }
        records.push_back(std::move(record));
    }
    return records;
}

int hits_at_1(const std::vector<std::string>& predicted,
              const std::vector<std::string>& gold) {
    if (predicted.empty()) return 0;
    return normalized_set(gold).count(text::normalize(predicted.front())) ? 1 : 0;
}

int accuracy(const std::vector<std::string>& predicted,
             const std::vector<std::string>& gold) {
    return normalized_set(predicted) == normalized_set(gold) ? 1 : 0;
}

double f1(const std::vector<std::string>& predicted,
          const std::vector<std::string>& gold) {
    auto p_set = normalized_set(predicted);
    auto g_set = normalized_set(gold);
    if (p_set.empty() && g_set.empty()) return 1.0;
    if (p_set.empty() || g_set.empty()) return 0.0;
    std::size_t shared = 0;
    for (const auto& v : p_set) {
        if (g_set.count(v)) ++shared;
    }
    if (shared == 0) return 0.0;
    double precision = static_cast<double>(shared) / static_cast<double>(p_set.size());
    double recall = static_cast<double>(shared) / static_cast<double>(g_set.size());
    return 2.0 * precision * recall / (precision + recall);
}

Report run_benchmark(const KnowledgeGraph& kg,
                     const std::vector<EvalRecord>& dataset,
                     const std::vector<RunConfig>& configs,
                     const ProviderFactory& factory) {
    auto started = std::chrono::steady_clock::now();
    Report report;
    for (const RunConfig& config : configs) {
        VariantResult row;
        row.label = config.label.empty() ? std::string(variant_name(config.variant))
                                         : config.label;
        row.variant = config.variant;

        std::shared_ptr<Provider> provider;
        if (factory) {
            provider = factory(config);
        } else if (!config.provider_spec.empty()) {
            provider = make_provider(config.provider_spec, config.token_env);
        }

        PipelineConfig pipeline;
        pipeline.variant = config.variant;
        pipeline.relevance_threshold = config.relevance_threshold;
        pipeline.hop_budget = config.hop_budget;
        pipeline.max_iterations = config.max_iterations;
        pipeline.sample_triples = config.sample_triples;

        for (const EvalRecord& record : dataset) {
            QuestionOutcome outcome;
            outcome.id = record.id;
            try {
                PipelineResult result =
                    answer_question(record.question, kg, provider.get(), pipeline);
                outcome.answered =
                    result.answer.status == Answer::Status::Answered;
                for (EntityId e : result.answer.entities) {
                    outcome.predicted.push_back(kg.name(e));
                }
            } catch (const std::exception&) {
                // Recorded as abstained; the benchmark keeps going.
            }
            outcome.hits = hits_at_1(outcome.predicted, record.gold);
            outcome.acc = accuracy(outcome.predicted, record.gold);
            outcome.f1 = f1(outcome.predicted, record.gold);
            row.outcomes.push_back(std::move(outcome));
        }

        if (!row.outcomes.empty()) {
            double n = static_cast<double>(row.outcomes.size());
            for (const auto& outcome : row.outcomes) {
                row.hits_at_1 += outcome.hits;
                row.accuracy += outcome.acc;
                row.f1 += outcome.f1;
            }
            row.hits_at_1 /= n;
            row.accuracy /= n;
            row.f1 /= n;
        }
        report.rows.push_back(std::move(row));
    }
    report.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
            .count();
    return report;
}

std::string Report::to_markdown() const {
    std::string out = "| Method | Hits@1 | Acc | F1 |\n|---|---|---|---|\n";
    for (const auto& row : rows) {
        out += "| " + row.label + " | " + format_metric(row.hits_at_1) + " | " +
               format_metric(row.accuracy) + " | " + format_metric(row.f1) +
               " |\n";
    }
    return out;
}

json Report::to_json() const {
    json doc;
    doc["rows"] = json::array();
    for (const auto& row : rows) {
        json outcomes = json::array();
        for (const auto& outcome : row.outcomes) {
            outcomes.push_back({{"id", outcome.id},
                                {"predicted", outcome.predicted},
                                {"answered", outcome.answered},
                                {"hits_at_1", outcome.hits},
                                {"accuracy", outcome.acc},
                                {"f1", outcome.f1}});
        }
        doc["rows"].push_back({{"label", row.label},
                               {"variant", std::string(variant_name(row.variant))},
                               {"hits_at_1", row.hits_at_1},
                               {"accuracy", row.accuracy},
                               {"f1", row.f1},
                               {"outcomes", std::move(outcomes)}});
    }
    return doc;
}

}  // namespace kgqa
