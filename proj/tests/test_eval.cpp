#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <set>
#include <sstream>

#include "kgqa/errors.hpp"
#include "kgqa/eval.hpp"

using namespace kgqa;

namespace {

std::vector<EvalRecord> parse(const std::string& jsonl) {
    std::istringstream in(jsonl);
    return load_dataset(in);
}

KnowledgeGraph toy_kg() {
    std::ifstream triples(KGQA_DATA_DIR "/toy/kg.tsv");
    std::ifstream aliases(KGQA_DATA_DIR "/toy/aliases.tsv");
    REQUIRE(triples.good());
    REQUIRE(aliases.good());
    return KnowledgeGraph::load(triples, &aliases);
}

std::vector<EvalRecord> toy_dataset() {
    std::ifstream in(KGQA_DATA_DIR "/toy/questions.jsonl");
    REQUIRE(in.good());
    return load_dataset(in);
}

RunConfig toy_config(Variant variant) {
    RunConfig config;
    config.variant = variant;
    config.provider_spec = "scripted:" KGQA_DATA_DIR "/toy/script.json";
    return config;
}

std::set<std::string> hit_ids(const VariantResult& row) {
    std::set<std::string> ids;
    for (const auto& outcome : row.outcomes) {
        if (outcome.hits == 1) ids.insert(outcome.id);
    }
    return ids;
}

// A backend that fails with a non-pipeline exception, the way a crashed
// network stack would.
struct ExplodingProvider final : Provider {
    CompletionResponse complete(const CompletionRequest&) override {
        throw std::runtime_error("boom");
    }
    std::string name() const override { return "exploding"; }
};

}  // namespace

TEST_CASE("load_dataset parses one record per line") {
    auto records = parse(
        R"({"id": "q1", "question": "where is acme", "answers": ["paris"]})"
        "\n\n"
        R"({"id": "q2", "question": "who knows bob", "answers": ["alice", "carol"]})"
        "\n");
    REQUIRE(records.size() == 2);
    CHECK(records[0].id == "q1");
    CHECK(records[0].question == "where is acme");
    CHECK(records[0].gold == std::vector<std::string>{"paris"});
    CHECK(records[1].gold == std::vector<std::string>{"alice", "carol"});

    CHECK(parse("").empty());
    CHECK(parse("\n  \n").empty());
}

TEST_CASE("load_dataset reports the offending line") {
    const char* good = R"({"id": "q1", "question": "x", "answers": ["y"]})";

    CHECK_THROWS_WITH_AS(parse(std::string(good) + "\nnot json\n"),
                         doctest::Contains("line 2"), DatasetError);
    CHECK_THROWS_AS(parse(R"({"id": "q1", "answers": ["y"]})"), DatasetError);
    CHECK_THROWS_WITH_AS(parse(R"({"id": "q1", "question": "x", "answers": []})"),
                         doctest::Contains("empty answers"), DatasetError);
    CHECK_THROWS_AS(parse(R"({"id": "q1", "question": "x", "answers": [3]})"),
                    DatasetError);
    CHECK_THROWS_WITH_AS(parse(std::string(good) + "\n" + good + "\n"),
                         doctest::Contains("duplicate id 'q1'"), DatasetError);
}

TEST_CASE("metrics normalize case and whitespace") {
    struct Case {
        std::vector<std::string> predicted;
        std::vector<std::string> gold;
        int hits;
        int acc;
        double f1;
    };
    const Case cases[] = {
        {{"paris"}, {"paris"}, 1, 1, 1.0},
        {{}, {"paris"}, 0, 0, 0.0},
        {{"london", "paris"}, {"paris"}, 0, 0, 2.0 / 3.0},
        {{"PARIS"}, {"paris"}, 1, 1, 1.0},
        {{" Paris "}, {"paris"}, 1, 1, 1.0},
        {{"b", "a"}, {"a", "b"}, 1, 1, 1.0},
        {{"a"}, {"a", "b"}, 1, 0, 2.0 / 3.0},
        {{"a", "b", "c"}, {"a"}, 1, 0, 0.5},
        {{}, {}, 0, 1, 1.0},
        {{"x"}, {"y"}, 0, 0, 0.0},
    };
    for (const Case& c : cases) {
        CAPTURE(c.gold);
        CHECK(hits_at_1(c.predicted, c.gold) == c.hits);
        CHECK(accuracy(c.predicted, c.gold) == c.acc);
        CHECK(f1(c.predicted, c.gold) == doctest::Approx(c.f1).epsilon(1e-12));
    }
}

TEST_CASE("run_benchmark reproduces the toy ablation spread") {
    KnowledgeGraph kg = toy_kg();
    auto dataset = toy_dataset();
    REQUIRE(dataset.size() == 20);

    Report report = run_benchmark(
        kg, dataset,
        {toy_config(Variant::Full), toy_config(Variant::NoSchema),
         toy_config(Variant::NoRetrieval), toy_config(Variant::IoPrompt)});
    REQUIRE(report.rows.size() == 4);
    for (const auto& row : report.rows) CHECK(row.outcomes.size() == 20);

    CHECK(report.rows[0].label == "full");
    CHECK(report.rows[0].hits_at_1 == doctest::Approx(0.600));
    CHECK(report.rows[1].label == "no_schema");
    CHECK(report.rows[1].hits_at_1 == doctest::Approx(0.200));
    CHECK(report.rows[2].label == "no_retrieval");
    CHECK(report.rows[2].hits_at_1 == doctest::Approx(0.250));
    CHECK(report.rows[3].label == "io_prompt");
    CHECK(report.rows[3].hits_at_1 == doctest::Approx(0.250));

    // The full pipeline answers every answerable question and nothing else.
    CHECK(hit_ids(report.rows[0]) ==
          std::set<std::string>{"a01", "a02", "a03", "a04", "a05", "a06",
                                "a07", "a08", "a09", "a10", "a11", "a12"});
    CHECK(hit_ids(report.rows[1]) ==
          std::set<std::string>{"a04", "a07", "a10", "a12"});
    CHECK(hit_ids(report.rows[2]) ==
          std::set<std::string>{"a01", "a04", "a07", "a10", "a12"});
    CHECK(hit_ids(report.rows[3]) == hit_ids(report.rows[2]));

    // Row aggregates are plain means of the per-question scores.
    for (const auto& row : report.rows) {
        double hits = 0.0, acc = 0.0, f = 0.0;
        for (const auto& outcome : row.outcomes) {
            hits += outcome.hits;
            acc += outcome.acc;
            f += outcome.f1;
        }
        CHECK(row.hits_at_1 == doctest::Approx(hits / 20.0));
        CHECK(row.accuracy == doctest::Approx(acc / 20.0));
        CHECK(row.f1 == doctest::Approx(f / 20.0));
    }
    CHECK(report.wall_clock_seconds > 0.0);
}

TEST_CASE("run_benchmark honors labels and empty config lists") {
    KnowledgeGraph kg = toy_kg();
    auto dataset = toy_dataset();

    CHECK(run_benchmark(kg, dataset, {}).rows.empty());

    RunConfig named = toy_config(Variant::Full);
    named.label = "ours";
    Report report = run_benchmark(kg, {dataset[0]}, {named});
    REQUIRE(report.rows.size() == 1);
    CHECK(report.rows[0].label == "ours");
}

TEST_CASE("run_benchmark records a crashing question as abstained") {
    KnowledgeGraph kg = toy_kg();
    auto dataset = toy_dataset();

    RunConfig config;
    config.variant = Variant::IoPrompt;  // every question hits the provider
    Report report = run_benchmark(
        kg, {dataset[0], dataset[1]}, {config},
        [](const RunConfig&) { return std::make_shared<ExplodingProvider>(); });
    REQUIRE(report.rows.size() == 1);
    for (const auto& outcome : report.rows[0].outcomes) {
        CHECK_FALSE(outcome.answered);
        CHECK(outcome.predicted.empty());
    }
    CHECK(report.rows[0].hits_at_1 == 0.0);
}

TEST_CASE("reports serialize without timing") {
    KnowledgeGraph kg = toy_kg();
    auto dataset = toy_dataset();
    auto configs = std::vector<RunConfig>{toy_config(Variant::Full)};

    Report report = run_benchmark(kg, dataset, configs);
    std::string md = report.to_markdown();
    CHECK(md.find("| Method | Hits@1 | Acc | F1 |") == 0);
    CHECK(md.find("| full | 0.600 |") != std::string::npos);

    nlohmann::json doc = report.to_json();
    REQUIRE(doc.contains("rows"));
    REQUIRE(doc["rows"].size() == 1);
    const auto& row = doc["rows"][0];
    CHECK(row["label"] == "full");
    CHECK(row["variant"] == "full");
    CHECK(row["outcomes"].size() == 20);
    CHECK(row["outcomes"][0]["id"] == "a01");
    CHECK(row["outcomes"][0]["predicted"] ==
          nlohmann::json::array({"paris"}));
    CHECK(row["outcomes"][0]["answered"] == true);
    CHECK(doc.dump().find("wall_clock") == std::string::npos);

    // Scripted runs are deterministic end to end: re-running yields the
    // same bytes even though wall clock differs.
    Report again = run_benchmark(kg, dataset, configs);
    CHECK(again.to_json().dump() == doc.dump());
    CHECK(again.to_markdown() == md);
}

TEST_CASE("empty reports render as a bare table header") {
    Report report;
    CHECK(report.to_markdown() ==
          "| Method | Hits@1 | Acc | F1 |\n|---|---|---|---|\n");
    CHECK(report.to_json()["rows"].empty());
}
