#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <sys/wait.h>

#include "test_util.hpp"

using json = nlohmann::json;

namespace {

struct CmdResult {
    int code = -1;
    std::string out;
    std::string err;
};

CmdResult run_cli(const std::string& args, const std::filesystem::path& dir) {
    const auto out_path = dir / "stdout.txt";
    const auto err_path = dir / "stderr.txt";
    const std::string cmd = std::string(TTC_CLI_PATH) + " " + args + " > " +
                            out_path.string() + " 2> " + err_path.string();
    const int rc = std::system(cmd.c_str());
    CmdResult result;
    result.code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    result.out = tutil::read_file(out_path);
    result.err = tutil::read_file(err_path);
    return result;
}

// 2-level fixture small enough for the CLI paths to train in well under a second
const char* kTinyTaxonomy =
    R"({"levels": [["A", "B"], ["a1", "a2", "b1", "b2"]],
        "parents": {"2/a1": "A", "2/a2": "A", "2/b1": "B", "2/b2": "B"}})";

const char* kTinySpec =
    R"({"feature_dim": 6, "radii": [3.0, 1.0], "noise_sigma": 0.0,
        "instances_per_leaf": 25})";

// quick-converging optimizer settings for the tiny noiseless fixture
const char* kTinyConfig =
    R"({"learning_rate": 0.005, "batch_size": 8, "max_epochs": 60,
        "early_stop_patience": 60, "seed": 3})";

struct Workspace {
    tutil::TempDir dir;
    explicit Workspace(const std::string& tag) : dir(tag) {
        tutil::write_file(dir.path() / "tax.json", kTinyTaxonomy);
        tutil::write_file(dir.path() / "spec.json", kTinySpec);
        tutil::write_file(dir.path() / "config.json", kTinyConfig);
    }
    std::string arg(const std::string& file) const {
        return (dir.path() / file).string();
    }
};

std::vector<std::string> csv_lines_without_seconds(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto cut = line.rfind(',');
        lines.push_back(line.substr(0, cut));
    }
    return lines;
}

} // namespace

TEST_CASE("validate: exit codes and output") {
    Workspace ws("validate");
    const CmdResult ok = run_cli("validate --taxonomy " + ws.arg("tax.json"), ws.dir.path());
    CHECK(ok.code == 0);
    CHECK(ok.out == "ok\n");

    tutil::write_file(ws.dir.path() / "skip.json",
                      R"({"levels": [["r"], ["m"], ["x"]],
                          "parents": {"2/m": "r", "3/x": "r"}})");
    const CmdResult bad =
        run_cli("validate --taxonomy " + ws.arg("skip.json"), ws.dir.path());
    CHECK(bad.code == 2);
    CHECK(bad.err.find("one level above") != std::string::npos);
    CHECK(bad.err.find("'x'") != std::string::npos);

    const CmdResult missing =
        run_cli("validate --taxonomy " + ws.arg("nope.json"), ws.dir.path());
    CHECK(missing.code == 1);
}

TEST_CASE("generate: writes a deterministic dataset") {
    Workspace ws("generate");
    const std::string args = "generate --taxonomy " + ws.arg("tax.json") +
                             " --synthetic " + ws.arg("spec.json") + " --seed 5 --out ";
    CHECK(run_cli(args + ws.arg("a.jsonl"), ws.dir.path()).code == 0);
    CHECK(run_cli(args + ws.arg("b.jsonl"), ws.dir.path()).code == 0);
    const std::string a = tutil::read_file(ws.dir.path() / "a.jsonl");
    CHECK(a == tutil::read_file(ws.dir.path() / "b.jsonl"));
    CHECK(std::count(a.begin(), a.end(), '\n') == 100);
}

TEST_CASE("train: writes checkpoint and history, deterministically") {
    Workspace ws("train");
    const std::string gen = "generate --taxonomy " + ws.arg("tax.json") +
                            " --synthetic " + ws.arg("spec.json") + " --seed 5 --out " +
                            ws.arg("data.jsonl");
    REQUIRE(run_cli(gen, ws.dir.path()).code == 0);

    const std::string train = "train --taxonomy " + ws.arg("tax.json") + " --data " +
                              ws.arg("data.jsonl") + " --config " +
                              ws.arg("config.json") + " --mode ttc --out ";
    const CmdResult first = run_cli(train + ws.arg("m1.json"), ws.dir.path());
    CHECK(first.code == 0);
    const json summary = json::parse(first.out);
    CHECK(summary["mode"] == "ttc");
    CHECK(summary["epochs"].get<std::size_t>() <= 60);

    CHECK(std::filesystem::exists(ws.dir.path() / "m1.json"));
    CHECK(std::filesystem::exists(ws.dir.path() / "m1.history.csv"));
    const auto history = tutil::read_file(ws.dir.path() / "m1.history.csv");
    CHECK(std::count(history.begin(), history.end(), '\n') <= 61);

    const CmdResult second = run_cli(train + ws.arg("m2.json"), ws.dir.path());
    CHECK(second.code == 0);
    CHECK(tutil::read_file(ws.dir.path() / "m1.json") ==
          tutil::read_file(ws.dir.path() / "m2.json"));
    // every column but the wall-clock one is reproducible
    CHECK(csv_lines_without_seconds(history) ==
          csv_lines_without_seconds(
              tutil::read_file(ws.dir.path() / "m2.history.csv")));

    const std::string flat = "train --taxonomy " + ws.arg("tax.json") + " --data " +
                             ws.arg("data.jsonl") + " --config " +
                             ws.arg("config.json") + " --mode flat --out " +
                             ws.arg("flat.json");
    CHECK(run_cli(flat, ws.dir.path()).code == 0);
    const json ttc_ckpt = json::parse(tutil::read_file(ws.dir.path() / "m1.json"));
    const json flat_ckpt = json::parse(tutil::read_file(ws.dir.path() / "flat.json"));
    REQUIRE(ttc_ckpt["levels"].size() == flat_ckpt["levels"].size());
    for (std::size_t i = 0; i < ttc_ckpt["levels"].size(); ++i)
        CHECK(ttc_ckpt["levels"][i]["W"].size() ==
              flat_ckpt["levels"][i]["W"].size());
    CHECK(ttc_ckpt["levels"][0]["W"] != flat_ckpt["levels"][0]["W"]);

    // missing inputs
    const CmdResult no_data = run_cli("train --taxonomy " + ws.arg("tax.json") +
                                          " --out " + ws.arg("x.json"),
                                      ws.dir.path());
    CHECK(no_data.code == 1);
}

TEST_CASE("eval: report, hash mismatch, empty data") {
    Workspace ws("eval");
    const std::string gen = "generate --taxonomy " + ws.arg("tax.json") +
                            " --synthetic " + ws.arg("spec.json") + " --seed 5 --out " +
                            ws.arg("data.jsonl");
    REQUIRE(run_cli(gen, ws.dir.path()).code == 0);
    const std::string train = "train --taxonomy " + ws.arg("tax.json") + " --data " +
                              ws.arg("data.jsonl") + " --config " +
                              ws.arg("config.json") + " --mode ttc --out " +
                              ws.arg("model.json");
    REQUIRE(run_cli(train, ws.dir.path()).code == 0);

    const CmdResult eval = run_cli("eval " + ws.arg("model.json") + " --taxonomy " +
                                       ws.arg("tax.json") + " --data " +
                                       ws.arg("data.jsonl"),
                                   ws.dir.path());
    CHECK(eval.code == 0);
    const json report = json::parse(eval.out);
    CHECK(report["instance_count"] == 100);
    CHECK(report["exact_match"].get<double>() >= 0.99); // its own noiseless train set
    CHECK(report["consistency"].get<double>() >= 0.99);

    // reordered classes: structurally fine, different identity
    tutil::write_file(ws.dir.path() / "other.json",
                      R"({"levels": [["B", "A"], ["a1", "a2", "b1", "b2"]],
                          "parents": {"2/a1": "A", "2/a2": "A",
                                      "2/b1": "B", "2/b2": "B"}})");
    const CmdResult mismatch = run_cli("eval " + ws.arg("model.json") + " --taxonomy " +
                                           ws.arg("other.json") + " --data " +
                                           ws.arg("data.jsonl"),
                                       ws.dir.path());
    CHECK(mismatch.code == 3);
    CHECK(mismatch.err.find("mismatch") != std::string::npos);

    tutil::write_file(ws.dir.path() / "empty.jsonl", "");
    const CmdResult empty = run_cli("eval " + ws.arg("model.json") + " --taxonomy " +
                                        ws.arg("tax.json") + " --data " +
                                        ws.arg("empty.jsonl"),
                                    ws.dir.path());
    CHECK(empty.code != 0);
    CHECK(empty.err.find("empty dataset") != std::string::npos);
}

TEST_CASE("compare: near-perfect on separable data, usage checks") {
    Workspace ws("compare");
    const std::string compare = "compare --taxonomy " + ws.arg("tax.json") +
                                " --synthetic " + ws.arg("spec.json") + " --config " +
                                ws.arg("config.json") + " --seeds 1 --out " +
                                ws.arg("cmp.csv");
    const CmdResult result = run_cli(compare, ws.dir.path());
    CHECK(result.code == 0);
    const json doc = json::parse(result.out);
    CHECK(doc["seeds"].size() == 1);
    for (const char* metric : {"hf1", "consistency", "exact_match"}) {
        const double delta = doc["delta"][metric].get<double>();
        CHECK(std::abs(delta) <= 0.02);
        CHECK(doc["delta"][metric].get<double>() ==
              doctest::Approx(doc["ttc"][metric].get<double>() -
                              doc["flat"][metric].get<double>())
                  .epsilon(1e-12));
    }
    CHECK(doc["config"]["batch_size"] == 8);
    CHECK(std::filesystem::exists(ws.dir.path() / "cmp.csv"));

    const CmdResult zero = run_cli("compare --taxonomy " + ws.arg("tax.json") +
                                       " --synthetic " + ws.arg("spec.json") +
                                       " --seeds 0 --out " + ws.arg("z.csv"),
                                   ws.dir.path());
    CHECK(zero.code == 1);
}

TEST_CASE("log level gates stderr chatter") {
    Workspace ws("logs");
    const std::string gen = "generate --taxonomy " + ws.arg("tax.json") +
                            " --synthetic " + ws.arg("spec.json") + " --seed 1 --out " +
                            ws.arg("d.jsonl");
    const CmdResult quiet = run_cli(gen, ws.dir.path());
    CHECK(quiet.err.empty());

    const std::string chatty = "TTC_LOG_LEVEL=info " + std::string(TTC_CLI_PATH) +
                               " generate --taxonomy " + ws.arg("tax.json") +
                               " --synthetic " + ws.arg("spec.json") +
                               " --seed 1 --out " + ws.arg("d2.jsonl") +
                               " > /dev/null 2> " + ws.arg("err2.txt");
    REQUIRE(std::system(chatty.c_str()) == 0);
    const std::string err2 = tutil::read_file(ws.dir.path() / "err2.txt");
    CHECK(err2.find("generated 100 instances") != std::string::npos);
}
