// Copyright (c) 2026, the dualtrain authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "desk_corpus.hpp"
#include "dualtrain/cli.hpp"
#include "dualtrain/corpus.hpp"
#include "temp_dir.hpp"

using namespace dualtrain;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliFixture {
    TempDir dir;
    fs::path manifest;

    CliFixture()
    {
        fixture::DeskCorpusOptions o;
        o.source_pairs = 150;
        o.target_passages = 120;
        o.target_questions = 120;
        o.dev_pairs = 15;
        o.test_pairs = 15;
        corpus::write_bundle(fixture::make_desk_corpus(o), dir.path() / "corpus");
        manifest = dir.path() / "corpus" / "manifest.json";
    }

    int run(std::vector<std::string> args) const { return cli::run(args); }
    std::string out(const std::string& name) const { return (dir.path() / name).string(); }
};

json read_json(const fs::path& p)
{
    return json::parse(read_file(p));
}

}  // namespace

TEST_CASE("unknown flags and subcommands are usage errors")
{
    CHECK(cli::run({"adapt", "--bogus"}) == cli::exit_invalid);
    CHECK(cli::run({"frobnicate"}) == cli::exit_invalid);
    CHECK(cli::run({}) == cli::exit_invalid);
    CHECK(cli::run({"--help"}) == cli::exit_ok);
    CHECK(cli::run({"adapt", "--mode", "sideways"}) == cli::exit_invalid);
}

TEST_CASE("validate and ingest")
{
    CliFixture f;
    CHECK(f.run({"validate", "--corpus", f.manifest.string()}) == cli::exit_ok);
    CHECK(f.run({"ingest", "--corpus", f.manifest.string(), "--out", f.out("ing")}) == cli::exit_ok);
    CHECK(fs::exists(f.out("ing") + "/corpus/manifest.json"));
    CHECK(read_json(f.out("ing") + "/validation.json")["ok"] == true);
    CHECK(read_json(f.out("ing") + "/run_meta.json")["subcommand"] == "ingest");
    CHECK(f.run({"validate", "--corpus", f.out("missing.json")}) == cli::exit_invalid);
}

TEST_CASE("invalid configs exit 1 and name the field")
{
    CliFixture f;
    write_file(f.dir.path() / "bad.json", R"({"decode": {"top_k": 0}})");
    CHECK(f.run({"eval", "--config", (f.dir.path() / "bad.json").string(), "--corpus", f.manifest.string(), "--out",
                 f.out("e")}) == cli::exit_invalid);
    const auto meta = read_json(f.out("e") + "/run_meta.json");
    CHECK(meta["error"].get<std::string>().find("decode") != std::string::npos);
    CHECK(meta["exit_status"] == 1);
}

TEST_CASE("output directories are write-once without --force")
{
    CliFixture f;
    const std::vector<std::string> args{"train-baseline", "--corpus", f.manifest.string(), "--out", f.out("b"),
                                        "--threads", "1"};
    CHECK(f.run(args) == cli::exit_ok);
    CHECK(fs::exists(f.out("b") + "/generator.ckpt"));
    CHECK(fs::exists(f.out("b") + "/retriever.ckpt"));
    CHECK(f.run(args) == cli::exit_invalid);
    auto forced = args;
    forced.push_back("--force");
    CHECK(f.run(forced) == cli::exit_ok);
}

TEST_CASE("eval on an empty test split names the split")
{
    CliFixture f;
    write_file(f.dir.path() / "corpus" / "test_pairs.jsonl", "");
    CHECK(f.run({"eval", "--corpus", f.manifest.string(), "--out", f.out("e")}) == cli::exit_invalid);
    const auto meta = read_json(f.out("e") + "/run_meta.json");
    CHECK(meta["error"].get<std::string>().find("target_test") != std::string::npos);
}

TEST_CASE("adapt, filter, eval and report produce their artifacts")
{
    CliFixture f;
    REQUIRE(f.run({"train-baseline", "--corpus", f.manifest.string(), "--out", f.out("base"), "--threads", "1"}) ==
            cli::exit_ok);
    REQUIRE(f.run({"adapt", "--corpus", f.manifest.string(), "--models", f.out("base"), "--out", f.out("r1"), "--mode",
                   "back", "--task", "qg", "--iters", "2", "--filter", "self", "--seed", "3", "--threads", "1"}) ==
            cli::exit_ok);
    for (const char* name : {"synthetic.jsonl", "history.json", "report.json", "run_meta.json", "generator.ckpt",
                             "retriever.ckpt", "trajectory_qg.csv", "trajectory_ir.csv"}) {
        CHECK(fs::exists(f.out("r1") + "/" + name));
    }
    const auto meta = read_json(f.out("r1") + "/run_meta.json");
    CHECK(meta["config"]["seed"] == 3);
    CHECK(meta["config"]["decode"]["seed"] == 3);
    CHECK(meta["config"]["filter"]["kind"] == "self");
    CHECK(meta["config"]["adapt"]["task"] == "qg");
    CHECK(meta["config"]["max_iters"] == 2);
    CHECK(meta.contains("versions"));

    CHECK(f.run({"filter", "--input", f.out("r1") + "/synthetic.jsonl", "--models", f.out("base"), "--out",
                 f.out("f1"), "--task", "qg", "--filter", "cross", "--accept-fraction", "0.5"}) == cli::exit_ok);
    const auto filter_report = read_json(f.out("f1") + "/filter_report.json");
    CHECK(filter_report["critic"] == "retriever");
    CHECK(filter_report["n_kept"].get<std::size_t>() * 2 >= filter_report["n_in"].get<std::size_t>());

    // same decode seed as the adapt run
    CHECK(f.run({"eval", "--corpus", f.manifest.string(), "--models", f.out("r1"), "--out", f.out("e1"), "--seed",
                 "3"}) == cli::exit_ok);
    CHECK(read_json(f.out("e1") + "/report.json") == read_json(f.out("r1") + "/report.json"));
    CHECK(f.run({"report", "--input", f.out("r1"), "--input", f.out("e1"), "--out", f.out("rep")}) == cli::exit_ok);
    const auto csv = read_file(f.out("rep") + "/summary.csv");
    CHECK(csv.rfind("run,mode,task,B1,", 0) == 0);
    CHECK(read_json(f.out("rep") + "/summary.json").size() == 2);
}

TEST_CASE("identical invocations write identical reports")
{
    CliFixture f;
    REQUIRE(f.run({"train-baseline", "--corpus", f.manifest.string(), "--out", f.out("base"), "--threads", "1"}) ==
            cli::exit_ok);
    for (const char* out : {"a", "b"}) {
        REQUIRE(f.run({"eval", "--corpus", f.manifest.string(), "--models", f.out("base"), "--out", f.out(out),
                       "--threads", std::string(out) == "a" ? "1" : "3"}) == cli::exit_ok);
    }
    CHECK(read_file(f.out("a") + "/report.json") == read_file(f.out("b") + "/report.json"));
}

TEST_CASE("analyze writes every diagnostic")
{
    CliFixture f;
    REQUIRE(f.run({"train-baseline", "--corpus", f.manifest.string(), "--out", f.out("base"), "--threads", "1"}) ==
            cli::exit_ok);
    REQUIRE(f.run({"analyze", "--corpus", f.manifest.string(), "--models", f.out("base"), "--out", f.out("an"),
                   "--iters", "1", "--threads", "1"}) == cli::exit_ok);
    for (const char* name : {"distributions.json", "trajectory.csv", "trajectory_ir.csv", "confusion.csv",
                             "pr_curve.csv", "domain_filter.json"}) {
        CHECK(fs::exists(f.out("an") + "/" + name));
    }
    const auto dist = read_json(f.out("an") + "/distributions.json");
    CHECK(dist["qg"]["self"]["n"] == 120);
    CHECK(read_file(f.out("an") + "/confusion.csv").rfind("gold,D,C,E,M,P\n", 0) == 0);
}

TEST_CASE("commands do not modify the input corpus")
{
    CliFixture f;
    const auto before = read_file(f.dir.path() / "corpus" / "source_pairs.jsonl");
    REQUIRE(f.run({"ingest", "--corpus", f.manifest.string(), "--out", f.out("i")}) == cli::exit_ok);
    CHECK(read_file(f.dir.path() / "corpus" / "source_pairs.jsonl") == before);
}
