// kgqa command-line front end.
//
//   kgqa ask     "question"            ranked answers; exit 0/2 answered/abstained
//   kgqa explain "question"            JSON pipeline trace to stdout
//   kgqa eval --dataset f --out dir    benchmark variants, report.md + report.json
//   kgqa query  'MATCH ... RETURN a'   run a query, TSV to stdout
//
// Data goes to stdout, diagnostics to stderr. Config precedence is flags >
// environment (KGQA_*) > config file.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kgqa/errors.hpp"
#include "kgqa/eval.hpp"
#include "kgqa/reasoning.hpp"

namespace {

struct CommonOptions {
    std::string kg_path;
    std::string aliases_path;
    std::string provider_spec;
    std::string token_env = "KGQA_API_TOKEN";
    double relevance_threshold = 0.0;
    int hop_budget = 0;  // 0: derive from the schema
    int max_iterations = 3;
    int sample_triples = 20;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
    cmd->add_option("--kg", opts.kg_path, "Triple TSV file")
        ->envname("KGQA_KG")
        ->required();
    cmd->add_option("--aliases", opts.aliases_path, "Alias TSV file")
        ->envname("KGQA_ALIASES");
    cmd->add_option("--provider", opts.provider_spec,
                    "scripted:<file> or http:<url>")
        ->envname("KGQA_PROVIDER");
    cmd->add_option("--token-env", opts.token_env,
                    "Environment variable holding the bearer token")
        ->envname("KGQA_TOKEN_ENV");
    cmd->add_option("--relevance-threshold", opts.relevance_threshold,
                    "Subgraph relevance threshold")
        ->envname("KGQA_RELEVANCE_THRESHOLD");
    cmd->add_option("--hop-budget", opts.hop_budget,
                    "Subgraph hop budget (0: schema steps + 1)")
        ->envname("KGQA_HOP_BUDGET");
    cmd->add_option("--max-iterations", opts.max_iterations,
                    "Collaborative reasoning budget")
        ->envname("KGQA_MAX_ITERATIONS");
    cmd->add_option("--sample-triples", opts.sample_triples,
                    "Triples shown in the schema prompt")
        ->envname("KGQA_SAMPLE_TRIPLES");
}

kgqa::KnowledgeGraph load_graph(const CommonOptions& opts) {
    std::ifstream triples(opts.kg_path);
    if (!triples) {
        throw kgqa::ConfigError("cannot open KG file: " + opts.kg_path);
    }
    if (opts.aliases_path.empty()) {
        return kgqa::KnowledgeGraph::load(triples);
    }
    std::ifstream aliases(opts.aliases_path);
    if (!aliases) {
        throw kgqa::ConfigError("cannot open alias file: " + opts.aliases_path);
    }
    return kgqa::KnowledgeGraph::load(triples, &aliases);
}

std::shared_ptr<kgqa::Provider> load_provider(const CommonOptions& opts) {
    if (opts.provider_spec.empty()) return nullptr;
    return kgqa::make_provider(opts.provider_spec, opts.token_env);
}

kgqa::PipelineConfig pipeline_config(const CommonOptions& opts,
                                     kgqa::Variant variant) {
    kgqa::PipelineConfig config;
    config.variant = variant;
    config.relevance_threshold = opts.relevance_threshold;
    if (opts.hop_budget > 0) config.hop_budget = opts.hop_budget;
    config.max_iterations = opts.max_iterations;
    config.sample_triples = opts.sample_triples;
    return config;
}

int run_pipeline(const CommonOptions& opts, const std::string& question,
                 const std::string& variant_name, bool print_trace) {
    auto variant = kgqa::variant_from_name(variant_name);
    if (!variant) {
        throw kgqa::ConfigError("unknown variant: " + variant_name);
    }
    kgqa::KnowledgeGraph kg = load_graph(opts);
    auto provider = load_provider(opts);
    kgqa::PipelineResult result = kgqa::answer_question(
        question, kg, provider.get(), pipeline_config(opts, *variant));
    if (print_trace) {
        std::cout << result.trace.dump(2) << "\n";
    } else {
        for (kgqa::EntityId e : result.answer.entities) {
            std::cout << kg.name(e) << "\n";
        }
    }
    return result.answer.status == kgqa::Answer::Status::Answered ? 0 : 2;
}

int run_eval(const CommonOptions& opts, const std::string& dataset_path,
             const std::vector<std::string>& variants,
             const std::string& out_dir) {
    kgqa::KnowledgeGraph kg = load_graph(opts);
    std::ifstream dataset_file(dataset_path);
    if (!dataset_file) {
        throw kgqa::ConfigError("cannot open dataset: " + dataset_path);
    }
    auto dataset = kgqa::load_dataset(dataset_file);

    std::vector<kgqa::RunConfig> configs;
    for (const std::string& name : variants) {
        if (name == "none") continue;
        auto variant = kgqa::variant_from_name(name);
        if (!variant) {
            throw kgqa::ConfigError("unknown variant: " + name);
        }
        kgqa::RunConfig config;
        config.variant = *variant;
        config.provider_spec = opts.provider_spec;
        config.token_env = opts.token_env;
        config.relevance_threshold = opts.relevance_threshold;
        if (opts.hop_budget > 0) config.hop_budget = opts.hop_budget;
        config.max_iterations = opts.max_iterations;
        config.sample_triples = opts.sample_triples;
        configs.push_back(std::move(config));
    }

    kgqa::Report report = kgqa::run_benchmark(kg, dataset, configs);

    std::filesystem::create_directories(out_dir);
    std::filesystem::path md_path = std::filesystem::path(out_dir) / "report.md";
    std::filesystem::path json_path =
        std::filesystem::path(out_dir) / "report.json";
    std::ofstream(md_path) << report.to_markdown();
    std::ofstream(json_path) << report.to_json().dump(2) << "\n";

    std::cout << report.to_markdown();
    std::cerr << "report written to " << md_path.string() << " and "
              << json_path.string() << " (" << report.wall_clock_seconds
              << "s)\n";
    return 0;
}

int run_query(const CommonOptions& opts, const std::string& query_text) {
    kgqa::KnowledgeGraph kg = load_graph(opts);
    kgqa::cypher::CypherQuery query = kgqa::cypher::parse(query_text);
    kgqa::cypher::BindingTable table = kgqa::cypher::execute(kg, query);
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
        std::cout << (i ? "\t" : "") << table.columns[i];
    }
    std::cout << "\n";
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            std::cout << (i ? "\t" : "") << kg.name(row[i]);
        }
        std::cout << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"schema-guided question answering over knowledge graphs"};
    app.require_subcommand(1);
    app.set_config("--config", "", "INI config file");
    app.get_config_ptr()->envname("KGQA_CONFIG");

    CommonOptions opts;
    std::string question;
    std::string variant = "full";
    std::string dataset_path;
    std::string out_dir = ".";
    std::vector<std::string> variants;
    std::string query_text;

    CLI::App* ask = app.add_subcommand("ask", "Answer a question");
    add_common(ask, opts);
    ask->add_option("question", question, "Question text")->required();
    ask->add_option("--variant", variant, "Pipeline variant")
        ->envname("KGQA_VARIANT");

    CLI::App* explain = app.add_subcommand("explain", "Trace a question");
    add_common(explain, opts);
    explain->add_option("question", question, "Question text")->required();
    explain->add_option("--variant", variant, "Pipeline variant")
        ->envname("KGQA_VARIANT");

    CLI::App* eval = app.add_subcommand("eval", "Run the benchmark");
    add_common(eval, opts);
    eval->add_option("--dataset", dataset_path, "JSONL dataset")->required();
    eval->add_option("--variant", variants,
                     "Variant to run (repeatable; 'none' for an empty report)")
        ->envname("KGQA_VARIANTS");
    eval->add_option("--out", out_dir, "Report output directory")
        ->envname("KGQA_OUT");

    CLI::App* query = app.add_subcommand("query", "Execute a query");
    add_common(query, opts);
    query->add_option("cypher", query_text, "Query text")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (ask->parsed()) return run_pipeline(opts, question, variant, false);
        if (explain->parsed()) return run_pipeline(opts, question, variant, true);
        if (eval->parsed()) {
            if (variants.empty()) variants.push_back("full");
            return run_eval(opts, dataset_path, variants, out_dir);
        }
        if (query->parsed()) return run_query(opts, query_text);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
