#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Run {
    int exit_code;
    std::string out;  // stdout followed by stderr
};

Run run(const std::string& args) {
    const std::string cmd = std::string(CAUSALQA_CLI) + " " + args + " 2>&1";
    FILE* pipe = ::popen(cmd.c_str(), "r");
    REQUIRE(pipe);
    std::string out;
    std::array<char, 4096> buf;
    while (const std::size_t n = std::fread(buf.data(), 1, buf.size(), pipe)) out.append(buf.data(), n);
    const int status = ::pclose(pipe);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const char* name) {
    const fs::path dir = fs::temp_directory_path() / ("causalqa_cli_" + std::to_string(::getpid())) / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

}  // namespace

TEST_CASE("help documents every flag") {
    for (const char* sub : {"ask", "datagen", "bench", "eval"}) {
        const Run r = run(std::string(sub) + " --help");
        CHECK(r.exit_code == 0);
        for (const char* flag : {"--seed", "--alpha", "--n", "--tasks", "--trace", "--json", "--llm-endpoint", "--out"})
            CHECK_MESSAGE(r.out.find(flag) != std::string::npos, sub << " lacks " << flag);
    }
}

TEST_CASE("unknown flags fail fast") {
    CHECK(run("bench --no-such-flag").exit_code == 2);
    CHECK(run("").exit_code == 2);
}

TEST_CASE("datagen") {
    const fs::path dir = scratch("datagen");
    Run r = run("datagen --task CGL --nodes 5 --n 2000 --seed 4 --out " + q(dir));
    REQUIRE(r.exit_code == 0);
    const std::string csv = slurp(dir / "CGL.csv");
    CHECK(csv.substr(0, csv.find('\n')) == "x1,x2,x3,x4,x5");
    CHECK(slurp(dir / "CGL.golden.json").find("\"edges\"") != std::string::npos);
    REQUIRE(run("datagen --task CGL --nodes 5 --n 2000 --seed 4 --out " + q(dir)).exit_code == 0);
    CHECK(slurp(dir / "CGL.csv") == csv);

    r = run("datagen --task MA --beta-m 0 --out " + q(dir));
    REQUIRE(r.exit_code == 0);
    CHECK(slurp(dir / "MA.golden.json").find("\"indirect\":0.0") != std::string::npos);

    r = run("datagen --task CGL --nodes 1 --out " + q(dir));
    CHECK(r.exit_code == 2);
    CHECK(r.out.find("data stage") != std::string::npos);
    CHECK(run("datagen --task XYZ --out " + q(dir)).exit_code == 2);
}

TEST_CASE("ask") {
    const fs::path dir = scratch("ask");
    REQUIRE(run("datagen --task ATE --topic employment --seed 3 --out " + q(dir)).exit_code == 0);
    const fs::path csv = dir / "employment.csv";
    const std::string header = slurp(csv).substr(0, slurp(csv).find('\n'));
    REQUIRE(header.find("labor_participation_rate") != std::string::npos);
    REQUIRE(header.find("minimum_wage_level") != std::string::npos);
    const std::string question =
        "'What is the average treatment effect of labor_participation_rate on minimum_wage_level in employment.csv?'";

    Run r = run("ask " + question + " --data " + q(csv));
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("average treatment effect") != std::string::npos);

    r = run("ask " + question + " --data " + q(csv) + " --trace");
    CHECK(r.out.find("intent: {\"causal_problem\"") != std::string::npos);
    CHECK(r.out.find("result: {\"type\":\"effect\"") != std::string::npos);

    r = run("ask " + question + " --data " + q(csv) + " --json");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("\"intent\"") != std::string::npos);
    CHECK(r.out.find("\"result\"") != std::string::npos);
    CHECK(r.out.find("\"interpretation\"") != std::string::npos);

    r = run("ask hello --data " + q(csv));
    CHECK(r.exit_code == 2);
    CHECK(r.out.find("interpretation stage") != std::string::npos);

    r = run("ask 'What is the average treatment effect of wage_increase on minimum_wage_level in employment.csv?' "
            "--data " + q(csv));
    CHECK(r.exit_code == 3);
    CHECK(r.out.find("estimation stage") != std::string::npos);

    r = run("ask " + question + " --data " + q(dir / "missing.csv"));
    CHECK(r.exit_code == 3);
    CHECK(r.out.find((dir / "missing.csv").string()) != std::string::npos);
}

TEST_CASE("bench and eval") {
    const fs::path a = scratch("run_a");
    const fs::path b = scratch("run_b");
    REQUIRE(run("bench --seed 5 --out " + q(a)).exit_code == 0);
    const std::string bench = slurp(a / "bench.jsonl");
    CHECK(std::count(bench.begin(), bench.end(), '\n') == 150);

    REQUIRE(run("eval --seed 5 --n 2000 --tasks ATE --bench " + q(a / "bench.jsonl") + " --out " + q(a)).exit_code ==
            0);
    const std::string table = slurp(a / "report.txt");
    CHECK(table.find("ATE") != std::string::npos);
    CHECK(table.find("CGL") == std::string::npos);
    CHECK(slurp(a / "report.json").find("\"end_to_end\"") != std::string::npos);

    REQUIRE(run("bench --seed 5 --out " + q(b)).exit_code == 0);
    REQUIRE(run("eval --seed 5 --n 2000 --tasks ATE --bench " + q(b / "bench.jsonl") + " --out " + q(b)).exit_code ==
            0);
    CHECK(slurp(b / "bench.jsonl") == bench);
    CHECK(slurp(b / "report.json") == slurp(a / "report.json"));

    CHECK(run("eval --bench " + q(a / "nope.jsonl") + " --out " + q(a)).exit_code == 3);
}
