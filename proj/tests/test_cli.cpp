#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#ifndef HARLOG_CLI_PATH
#error "HARLOG_CLI_PATH must point at the CLI binary"
#endif

namespace {

namespace fs = std::filesystem;

struct RunResult {
    int exit_code;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path work_dir() {
    static fs::path dir = [] {
        auto d = fs::temp_directory_path() / "harlog_cli_test";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

RunResult run_cli(const std::string& args) {
    auto out = work_dir() / "stdout.txt";
    auto err = work_dir() / "stderr.txt";
    std::string cmd = std::string(HARLOG_CLI_PATH) + " " + args + " > " + out.string() + " 2> " +
                      err.string();
    int status = std::system(cmd.c_str());
    int code = (status >= 0 && WIFEXITED(status)) ? WEXITSTATUS(status) : -1;
    return {code, slurp(out), slurp(err)};
}

std::string path_of(const std::string& name) { return (work_dir() / name).string(); }

}  // namespace

TEST_CASE("help and usage errors") {
    CHECK(run_cli("--help").exit_code == 0);
    CHECK(run_cli("train --help").exit_code == 0);

    auto unknown = run_cli("frobnicate");
    CHECK(unknown.exit_code == 2);
    CHECK(unknown.err.rfind("usage-error:", 0) == 0);

    auto bad_flag = run_cli("synth latent --no-such-flag 3 -o x.csv");
    CHECK(bad_flag.exit_code == 2);
    CHECK(bad_flag.err.rfind("usage-error:", 0) == 0);
}

TEST_CASE("missing input file") {
    auto r = run_cli("train --data " + path_of("missing.csv") + " --model " + path_of("m.json"));
    CHECK(r.exit_code == 1);
    CHECK(r.err.rfind("input-error:", 0) == 0);
}

TEST_CASE("schema errors are distinguished from missing files") {
    auto bad = path_of("bad.csv");
    std::ofstream(bad) << "not,a,latent,header\n1,2,3,4\n";
    auto r = run_cli("train --data " + bad + " --model " + path_of("m.json"));
    CHECK(r.exit_code == 1);
    CHECK(r.err.rfind("schema-error:", 0) == 0);
}

TEST_CASE("full scripted pipeline on seed 7") {
    // latent side: synth -> train -> eval
    auto latent = path_of("latent.csv");
    REQUIRE(run_cli("synth latent --mode delayed --per-class 200 --sep 4.0 --seed 7 -o " + latent)
                .exit_code == 0);
    auto model = path_of("model.json");
    auto report = path_of("report.json");
    REQUIRE(run_cli("train --data " + latent + " --mode delayed --seed 7 --model " + model +
                    " --report " + report + " --loss-curve " + path_of("loss.csv"))
                .exit_code == 0);
    auto rj = nlohmann::json::parse(slurp(report));
    CHECK(rj.at("metrics").at("accuracy").get<double>() >= 0.90);
    CHECK(rj.at("config").at("subcommand") == "train");
    CHECK(rj.at("seed").get<int>() == 7);

    // video side: synth keypoints -> features -> tree -> program -> logic check
    std::string feature_flags;
    for (const char* activity : {"walk", "run", "squat", "jump", "wave", "clap", "wipe"}) {
        auto jsonl = path_of(std::string(activity) + ".jsonl");
        auto csv = path_of(std::string(activity) + ".csv");
        REQUIRE(run_cli(std::string("synth keypoints --activity ") + activity +
                        " --seconds 20 --seed 7 -o " + jsonl)
                    .exit_code == 0);
        REQUIRE(run_cli("features extract --keypoints " + jsonl + " --stride 5 --label " + activity +
                        " -o " + csv)
                    .exit_code == 0);
        feature_flags += " --features " + csv;
    }
    auto tree = path_of("tree.json");
    REQUIRE(run_cli("tree fit" + feature_flags + " -o " + tree).exit_code == 0);
    auto tree_report = path_of("tree_report.json");
    REQUIRE(run_cli("tree eval" + feature_flags + " --tree " + tree + " --report " + tree_report)
                .exit_code == 0);
    CHECK(nlohmann::json::parse(slurp(tree_report)).at("metrics").at("accuracy").get<double>() >= 0.95);

    auto program = path_of("program.npl");
    REQUIRE(run_cli("program emit --tree " + tree + " -o " + program).exit_code == 0);
    auto check = run_cli("logic check " + program);
    CHECK(check.exit_code == 0);
    CHECK(check.out.rfind("ok:", 0) == 0);

    SECTION("logic infer with uniform probabilities partitions mass") {
        auto infer = run_cli("logic infer " + program);
        REQUIRE(infer.exit_code == 0);
        auto probs = nlohmann::json::parse(infer.out);
        double total = 0.0;
        for (const auto& [key, value] : probs.items()) total += value.get<double>();
        CHECK(total == Catch::Approx(1.0).margin(1e-9));
    }

    SECTION("saved model reloads to the same report (round-trip stability)") {
        auto eval1 = path_of("eval1.json");
        auto eval2 = path_of("eval2.json");
        REQUIRE(run_cli("eval --model " + model + " --data " + latent + " --report " + eval1)
                    .exit_code == 0);
        REQUIRE(run_cli("eval --model " + model + " --data " + latent + " --report " + eval2)
                    .exit_code == 0);
        auto body1 = slurp(eval1);
        CHECK(body1 == slurp(eval2));
        CHECK(!body1.empty());
    }

    SECTION("baseline, specialists and independence analysis run end to end") {
        auto base_report = path_of("baseline.json");
        REQUIRE(run_cli("baseline --data " + latent + " --mode delayed --kind small --seed 7 --report " +
                        base_report)
                    .exit_code == 0);
        CHECK(nlohmann::json::parse(slurp(base_report)).at("config").at("param_count").get<int>() == 271);

        auto spec_report = path_of("specialists.json");
        REQUIRE(run_cli("specialists --data " + latent + " --mode delayed --seed 7 --report " +
                        spec_report)
                    .exit_code == 0);

        auto indep = run_cli("analyze independence --report " + report);
        REQUIRE(indep.exit_code == 0);
        auto aj = nlohmann::json::parse(indep.out);
        CHECK(aj.at("predicted_overall").get<double>() > 0.5);

        auto grid = run_cli("report confusion --report " + report);
        REQUIRE(grid.exit_code == 0);
        CHECK(grid.out.find("walk") != std::string::npos);
    }

    SECTION("two same-seed train runs write byte-identical artifacts") {
        auto model2 = path_of("model2.json");
        auto report2 = path_of("report2.json");
        REQUIRE(run_cli("train --data " + latent + " --mode delayed --seed 7 --model " + model2 +
                        " --report " + report2)
                    .exit_code == 0);
        CHECK(slurp(model) == slurp(model2));
        CHECK(slurp(report) == slurp(report2));
    }
}
