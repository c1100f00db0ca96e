#include "granuscore/errors.hpp"
#include "granuscore/model.hpp"

#include "../support/synthetic.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>

using namespace granuscore;
using granuscore::testsupport::trained_fixture;
using nlohmann::json;

namespace {

std::string cli_path() {
    const char* env = std::getenv("GRANUSCORE_CLI");
    REQUIRE_MESSAGE(env != nullptr, "GRANUSCORE_CLI must point at the built binary");
    return env;
}

struct RunResult {
    int status = -1;
    std::string output; // stdout only
};

RunResult run(const std::string& args) {
    std::string cmd = cli_path() + " " + args + " 2>/dev/null";
    std::array<char, 4096> buf{};
    RunResult res;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) res.output.append(buf.data(), n);
    int rc = pclose(pipe);
    res.status = WEXITSTATUS(rc);
    return res;
}

struct CliFixture {
    std::filesystem::path dir;
    std::string table, model;

    CliFixture() {
        const auto& fx = trained_fixture();
        dir = std::filesystem::temp_directory_path() / "granuscore_cli_fixture";
        std::filesystem::create_directories(dir);
        table = (dir / "table.jsonl").string();
        model = (dir / "model.grsm").string();
        fx.world.table->save(table);
        save_model(*fx.model, model);
    }
};

const CliFixture& fixture() {
    static const CliFixture fx;
    return fx;
}

} // namespace

TEST_CASE("cli: unknown subcommand and flags exit 2") {
    CHECK(run("definitely-not-a-subcommand").status == 2);
    CHECK(run("score --definitely-not-a-flag").status == 2);
}

TEST_CASE("cli: validation failure exits 1 before compute") {
    const auto& fx = fixture();
    RunResult r = run("score --model /nonexistent.grsm --backend " + fx.table + " --text hi");
    CHECK(r.status == 1);
}

TEST_CASE("cli: score inline text emits a structured report") {
    const auto& fx = fixture();
    const auto& world = trained_fixture().world;
    RunResult r = run("score --model " + fx.model + " --backend " + fx.table + " --text \"" +
                      world.concept_names[0] + " of " + world.concept_names[1] + "\" --seed 9");
    REQUIRE(r.status == 0);
    json doc = json::parse(r.output);
    CHECK(doc["seed"] == 9);
    CHECK(doc["document_score"].is_number());
    CHECK(doc["fallback_used"] == false);
    CHECK(doc["aggregation"] == "sent-lqm-0.8-pool-mean");
    CHECK(doc["sentences"].size() == 1);
    CHECK(doc["sentences"][0]["units"].size() == 2);
}

TEST_CASE("cli: stop-words-only input scores 100 with the fallback flag") {
    const auto& fx = fixture();
    RunResult r =
        run("score --model " + fx.model + " --backend " + fx.table + " --text \"the of and\"");
    REQUIRE(r.status == 0);
    json doc = json::parse(r.output);
    CHECK(doc["document_score"] == 100.0);
    CHECK(doc["fallback_used"] == true);
}

TEST_CASE("cli: fine sentence scores below its coarse counterpart") {
    const auto& fx = fixture();
    auto score_of = [&](const std::string& text) {
        RunResult r =
            run("score --model " + fx.model + " --backend " + fx.table + " --text \"" + text + "\"");
        REQUIRE(r.status == 0);
        return json::parse(r.output)["document_score"].get<double>();
    };
    double fine = score_of("Tony Hawk landed the first 900 in San Diego");
    double coarse = score_of("A sportsman landed the first 900 in the United States");
    CHECK(fine < coarse);
}

TEST_CASE("cli: dry-run validates without side effects") {
    const auto& fx = fixture();
    std::string out = (fixture().dir / "should_not_exist.csv").string();
    RunResult r = run("evaluate-granola --granola /nonexistent.jsonl --backend " + fx.table +
                      " --out " + out + " --dry-run");
    CHECK(r.status == 1); // fail-fast validation still applies
    CHECK_FALSE(std::filesystem::exists(out));
}

TEST_CASE("cli: seeded runs produce byte-identical outputs") {
    const auto& fx = fixture();
    const auto& world = trained_fixture().world;
    // granola fixture file
    std::string granola = (fx.dir / "granola.jsonl").string();
    {
        std::ofstream f(granola);
        for (size_t i = 0; i < 40; ++i) {
            const auto& e = world.entries[i];
            json row;
            row["id"] = e.id;
            row["question"] = e.question;
            json answers = json::array();
            for (const auto& [text, level] : e.realizations) answers.push_back(text);
            row["answers"] = answers;
            f << row.dump() << "\n";
        }
    }
    std::string out1 = (fx.dir / "eval1.csv").string();
    std::string out2 = (fx.dir / "eval2.csv").string();
    std::string base = "evaluate-granola --granola " + granola + " --backend " + fx.table +
                       " --methods word_count,dist0 --ratios 0.5,0.25,0.25 --seed 77 --out ";
    REQUIRE(run(base + out1).status == 0);
    REQUIRE(run(base + out2).status == 0);
    std::ifstream f1(out1), f2(out2);
    std::string s1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
    std::string s2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
    CHECK(s1 == s2);
    CHECK(s1.find("seed=77") != std::string::npos);
    CHECK(s1.find("word_count") != std::string::npos);
    CHECK(s1.find("dist0") != std::string::npos);
}

TEST_CASE("cli: config file supplies defaults, flags win") {
    const auto& fx = fixture();
    std::string cfg_path = (fx.dir / "config.json").string();
    {
        json cfg = {{"common", {{"seed", 5}}},
                    {"score",
                     {{"model", fx.model}, {"backend", fx.table}, {"aggregation", "doc-pool-max"}}}};
        std::ofstream f(cfg_path);
        f << cfg.dump();
    }
    const auto& world = trained_fixture().world;
    RunResult from_cfg =
        run("score --config " + cfg_path + " --text \"" + world.concept_names[0] + "\"");
    REQUIRE(from_cfg.status == 0);
    json doc = json::parse(from_cfg.output);
    CHECK(doc["aggregation"] == "doc-pool-max");
    CHECK(doc["seed"] == 5);

    RunResult overridden = run("score --config " + cfg_path + " --aggregation sent-mean-pool-mean" +
                               " --seed 6 --text \"" + world.concept_names[0] + "\"");
    REQUIRE(overridden.status == 0);
    json doc2 = json::parse(overridden.output);
    CHECK(doc2["aggregation"] == "sent-mean-pool-mean"); // flag beats config
    CHECK(doc2["seed"] == 6);
}
