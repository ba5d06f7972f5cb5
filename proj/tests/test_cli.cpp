#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

constexpr const char* kBase =
    "--kg " KGQA_DATA_DIR "/toy/kg.tsv --aliases " KGQA_DATA_DIR
    "/toy/aliases.tsv";
constexpr const char* kScript =
    "--provider scripted:" KGQA_DATA_DIR "/toy/script.json";

struct CommandResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& path) {
    std::ifstream in(path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Runs the installed binary with stdout/stderr captured to temp files.
CommandResult run(const std::string& args) {
    fs::path out_file = fs::temp_directory_path() / "kgqa_cli_out.txt";
    fs::path err_file = fs::temp_directory_path() / "kgqa_cli_err.txt";
    std::string cmd = std::string(KGQA_BIN) + " " + args + " >" +
                      out_file.string() + " 2>" + err_file.string();
    int status = std::system(cmd.c_str());
    CommandResult result;
    if (WIFEXITED(status)) result.exit_code = WEXITSTATUS(status);
    result.out = slurp(out_file);
    result.err = slurp(err_file);
    return result;
}

}  // namespace

TEST_CASE("ask prints ranked answers and signals via the exit code") {
    CommandResult hit =
        run(std::string("ask ") + kBase + " \"who is alice friend_of\"");
    CHECK(hit.exit_code == 0);
    CHECK(hit.out == "bob\n");

    CommandResult miss =
        run(std::string("ask ") + kBase + " \"tell me about zorp\"");
    CHECK(miss.exit_code == 2);
    CHECK(miss.out.empty());
}

TEST_CASE("ask answers a multi-hop question with the scripted provider") {
    CommandResult r = run(std::string("ask ") + kBase + " " + kScript +
                          " \"Where is the company where Alice's friend works"
                          " located?\"");
    CHECK(r.exit_code == 0);
    CHECK(r.out == "paris\n");
}

TEST_CASE("explain emits the pipeline trace as JSON") {
    CommandResult r =
        run(std::string("explain ") + kBase + " \"who is alice friend_of\"");
    CHECK(r.exit_code == 0);
    nlohmann::json trace = nlohmann::json::parse(r.out);
    CHECK(trace["question"] == "who is alice friend_of");
    CHECK(trace["variant"] == "full");
    CHECK(trace["stages"].is_array());
    CHECK_FALSE(trace["stages"].empty());
    CHECK(trace.contains("answer"));
}

TEST_CASE("missing input files fail with a diagnostic") {
    CommandResult r = run("ask --kg /no/such/file.tsv \"who is alice\"");
    CHECK(r.exit_code == 1);
    CHECK(r.err.find("error:") != std::string::npos);
    CHECK(r.err.find("/no/such/file.tsv") != std::string::npos);
}

TEST_CASE("eval writes both report files") {
    fs::path out_dir = fs::temp_directory_path() / "kgqa_cli_eval";
    fs::remove_all(out_dir);

    CommandResult r = run(std::string("eval ") + kBase + " " + kScript +
                          " --dataset " KGQA_DATA_DIR "/toy/questions.jsonl" +
                          " --variant full --variant io_prompt --out " +
                          out_dir.string());
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("| Method | Hits@1 | Acc | F1 |") != std::string::npos);
    CHECK(r.out.find("| full | 0.600 |") != std::string::npos);
    CHECK(r.out.find("| io_prompt | 0.250 |") != std::string::npos);
    CHECK(r.err.find("report written to") != std::string::npos);

    CHECK(slurp(out_dir / "report.md") == r.out);
    nlohmann::json doc = nlohmann::json::parse(slurp(out_dir / "report.json"));
    REQUIRE(doc["rows"].size() == 2);
    CHECK(doc["rows"][0]["label"] == "full");
    CHECK(doc["rows"][1]["label"] == "io_prompt");
}

TEST_CASE("eval with --variant none produces an empty report") {
    fs::path out_dir = fs::temp_directory_path() / "kgqa_cli_eval_none";
    fs::remove_all(out_dir);

    CommandResult r = run(std::string("eval ") + kBase +
                          " --dataset " KGQA_DATA_DIR "/toy/questions.jsonl" +
                          " --variant none --out " + out_dir.string());
    CHECK(r.exit_code == 0);
    CHECK(slurp(out_dir / "report.md") ==
          "| Method | Hits@1 | Acc | F1 |\n|---|---|---|---|\n");
}

TEST_CASE("eval rejects malformed datasets") {
    fs::path bad = fs::temp_directory_path() / "kgqa_cli_bad.jsonl";
    std::ofstream(bad) << "not json\n";

    CommandResult r = run(std::string("eval ") + kBase + " --dataset " +
                          bad.string() + " --out " +
                          fs::temp_directory_path().string());
    CHECK(r.exit_code == 1);
    CHECK(r.err.find("line 1") != std::string::npos);
}

TEST_CASE("query prints a TSV table") {
    CommandResult r = run(
        std::string("query ") + kBase +
        " 'MATCH (a {name:\"alice\"})-[:friend_of]->(b)-[:works_at]->(c)"
        "-[:located_in]->(d) RETURN d'");
    CHECK(r.exit_code == 0);
    CHECK(r.out == "d\nparis\n");

    CommandResult empty =
        run(std::string("query ") + kBase +
            " 'MATCH (a {name:\"alice\"})-[:zzz]->(b) RETURN a, b'");
    CHECK(empty.exit_code == 0);
    CHECK(empty.out == "a\tb\n");  // header only
}

TEST_CASE("query reports parse errors with offsets") {
    CommandResult r = run(std::string("query ") + kBase + " 'MATCH ('");
    CHECK(r.exit_code == 1);
    CHECK(r.out.empty());
    CHECK(r.err.find("error:") != std::string::npos);
    CHECK(r.err.find("offset") != std::string::npos);
}
