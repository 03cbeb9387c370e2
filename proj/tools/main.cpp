// causalqa command-line tool. Talks to the engine only through the C API.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "causalqa/causalqa.h"

#ifndef CAUSALQA_HIERARCHY
#define CAUSALQA_HIERARCHY "data/topics.json"
#endif

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInterpretation = 2;
constexpr int kExitEstimation = 3;

struct Failure {
    int exit_code;
    std::string message;
};

// Bad input (question, query, parameters, bench hierarchy) exits 2; data,
// estimation, narration and evaluation failures exit 3.
int exit_code_for(cqa_status s) {
    switch (s) {
        case CQA_MALFORMED_HIERARCHY:
        case CQA_UNKNOWN_TEMPLATE:
        case CQA_BAD_DIMS:
        case CQA_INVALID_ARGUMENT:
            return kExitInterpretation;
        default:
            break;
    }
    const cqa_stage stage = cqa_status_stage(s);
    return stage == CQA_STAGE_INTENT || stage == CQA_STAGE_INTERPRETATION ? kExitInterpretation : kExitEstimation;
}

void check(cqa_status s) {
    if (s == CQA_OK) return;
    std::string msg = std::string(cqa_stage_name(cqa_status_stage(s))) + " stage failed: " + cqa_last_error();
    throw Failure{exit_code_for(s), std::move(msg)};
}

struct CStringDeleter {
    void operator()(char* p) const { cqa_string_free(p); }
};
using CString = std::unique_ptr<char, CStringDeleter>;

template <class T, void (*Free)(T*)>
struct HandleDeleter {
    void operator()(T* p) const { Free(p); }
};
using Config = std::unique_ptr<cqa_config, HandleDeleter<cqa_config, cqa_config_free>>;
using Dataset = std::unique_ptr<cqa_dataset, HandleDeleter<cqa_dataset, cqa_dataset_free>>;
using Hierarchy = std::unique_ptr<cqa_hierarchy, HandleDeleter<cqa_hierarchy, cqa_hierarchy_free>>;
using Answer = std::unique_ptr<cqa_answer, HandleDeleter<cqa_answer, cqa_answer_free>>;

void write_atomic(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << content;
        if (!out.flush()) throw Failure{kExitEstimation, "data stage failed: cannot write " + tmp.string()};
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw Failure{kExitEstimation, "data stage failed: cannot write " + path.string()};
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Failure{kExitEstimation, "data stage failed: cannot read " + path.string()};
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Common {
    std::uint64_t seed = 1;
    double alpha = 0.01;
    int n = 10000;
    std::string tasks;
    bool trace = false;
    bool json = false;
    std::string llm_endpoint;
    std::string out = ".";
    std::string hierarchy = CAUSALQA_HIERARCHY;
};

Config make_config(const Common& c) {
    cqa_config* raw = nullptr;
    check(cqa_config_new(&raw));
    Config cfg(raw);
    check(cqa_config_set_seed(raw, c.seed));
    check(cqa_config_set_alpha(raw, c.alpha));
    check(cqa_config_set_rows(raw, c.n));
    check(cqa_config_set_tasks(raw, c.tasks.c_str()));
    check(cqa_config_set_llm_endpoint(raw, c.llm_endpoint.c_str()));
    return cfg;
}

Hierarchy load_hierarchy(const std::string& path) {
    cqa_hierarchy* raw = nullptr;
    check(cqa_hierarchy_load(path.c_str(), &raw));
    return Hierarchy(raw);
}

int cmd_ask(const Common& c, const std::string& question, const std::string& data_path) {
    const Config cfg = make_config(c);
    cqa_dataset* raw_data = nullptr;
    check(cqa_dataset_read_csv(data_path.c_str(), &raw_data));
    const Dataset data(raw_data);

    cqa_answer* raw_answer = nullptr;
    char* partial = nullptr;
    const cqa_status s = cqa_ask(cfg.get(), question.c_str(), data.get(), &raw_answer, &partial);
    const CString partial_intent(partial);
    if (s != CQA_OK) {
        if (c.trace && partial_intent) std::cerr << "intent: " << partial_intent.get() << "\n";
        check(s);
    }
    const Answer answer(raw_answer);

    if (c.json) {
        char* env = nullptr;
        check(cqa_answer_envelope_json(answer.get(), &env));
        const CString envelope(env);
        std::cout << envelope.get() << "\n";
        return kExitOk;
    }
    if (c.trace) {
        std::cout << "intent: " << cqa_answer_intent_json(answer.get()) << "\n";
        std::cout << "method: " << cqa_answer_method(answer.get()) << "\n";
        std::cout << "result: " << cqa_answer_result_json(answer.get()) << "\n";
        std::cout << "source: " << cqa_answer_source(answer.get()) << "\n";
    }
    std::cout << cqa_answer_interpretation(answer.get()) << "\n";
    return kExitOk;
}

struct DatagenArgs {
    std::string task;
    std::string name;
    cqa_datagen_params params{};
    std::optional<double> beta_m;
    std::string treatment, response, mediator, conditions, topic;
};

int cmd_datagen(const Common& c, DatagenArgs& a) {
    const Config cfg = make_config(c);
    Hierarchy h;
    cqa_datagen_params& p = a.params;
    p.task = a.task.c_str();
    p.has_beta_m = a.beta_m.has_value();
    p.beta_m = a.beta_m.value_or(0.0);
    auto opt = [](const std::string& s) { return s.empty() ? nullptr : s.c_str(); };
    p.treatment = opt(a.treatment);
    p.response = opt(a.response);
    p.mediator = opt(a.mediator);
    p.conditions = opt(a.conditions);
    p.topic = opt(a.topic);
    if (!a.topic.empty()) {
        h = load_hierarchy(c.hierarchy);
        p.hierarchy = h.get();
    }
    const std::string stem = a.name.empty() ? (a.topic.empty() ? a.task : a.topic) : a.name;
    const fs::path dir = c.out;
    fs::create_directories(dir);
    const fs::path csv = dir / (stem + ".csv");
    const fs::path sidecar = dir / (stem + ".golden.json");
    char* raw = nullptr;
    check(cqa_datagen(cfg.get(), &p, csv.c_str(), sidecar.c_str(), &raw));
    const CString summary(raw);
    std::cout << summary.get() << "\n";
    return kExitOk;
}

int cmd_bench(const Common& c, int per_task, bool with_interpret) {
    Config cfg = make_config(c);
    check(cqa_config_set_bench_size(cfg.get(), per_task));
    const Hierarchy h = load_hierarchy(c.hierarchy);
    char* raw = nullptr;
    check(cqa_bench_generate(cfg.get(), h.get(), &raw));
    const CString bench(raw);
    const fs::path dir = c.out;
    write_atomic(dir / "bench.jsonl", bench.get());
    std::cout << "wrote " << (dir / "bench.jsonl").string() << "\n";
    if (with_interpret) {
        char* raw_i = nullptr;
        check(cqa_interpret_bench_generate(cfg.get(), h.get(), bench.get(), &raw_i));
        const CString interp(raw_i);
        write_atomic(dir / "interpret_bench.jsonl", interp.get());
        std::cout << "wrote " << (dir / "interpret_bench.jsonl").string() << "\n";
    }
    return kExitOk;
}

int cmd_eval(const Common& c, int per_task, const std::string& bench_path) {
    Config cfg = make_config(c);
    check(cqa_config_set_bench_size(cfg.get(), per_task));
    const Hierarchy h = load_hierarchy(c.hierarchy);
    const std::optional<std::string> bench =
        bench_path.empty() ? std::nullopt : std::optional<std::string>(read_file(bench_path));
    char* raw_json = nullptr;
    char* raw_table = nullptr;
    check(cqa_eval(cfg.get(), h.get(), bench ? bench->c_str() : nullptr, &raw_json, &raw_table));
    const CString report_json(raw_json);
    const CString report_table(raw_table);
    const fs::path dir = c.out;
    write_atomic(dir / "report.json", report_json.get());
    write_atomic(dir / "report.txt", report_table.get());
    std::cout << (c.json ? report_json.get() : report_table.get());
    return kExitOk;
}

void add_common(CLI::App* app, Common& c) {
    app->add_option("--seed", c.seed, "Root seed for every random draw")->capture_default_str();
    app->add_option("--alpha", c.alpha, "Significance level for graph learning")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    app->add_option("--n", c.n, "Rows per generated dataset")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--tasks", c.tasks, "Comma-separated subset of CGL,ATE,HTE,MA,OPO");
    app->add_option("--llm-endpoint", c.llm_endpoint,
                    "http://host[:port]/path of a model server; token read from CAUSALQA_LLM_TOKEN");
    app->add_option("--out", c.out, "Output directory")->capture_default_str();
    app->add_option("--hierarchy", c.hierarchy, "Topic hierarchy JSON")->capture_default_str();
    app->add_flag("--trace", c.trace, "Also print the intent and the tool result");
    app->add_flag("--json", c.json, "Machine-readable output");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Answer causal questions about tabular data"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(cqa_version()));

    Common common;

    auto* ask = app.add_subcommand("ask", "Answer one question about a CSV file");
    std::string question, data_path;
    ask->add_option("question", question, "The question")->required();
    ask->add_option("--data", data_path, "CSV file the question is about")->required();
    add_common(ask, common);

    auto* datagen = app.add_subcommand("datagen", "Write a synthetic CSV and its golden label");
    DatagenArgs dg;
    cqa_datagen_params_init(&dg.params);
    datagen->add_option("--task", dg.task, "CGL, ATE, HTE, MA or OPO")->required();
    datagen->add_option("--name", dg.name, "File stem; defaults to the topic or task");
    datagen->add_option("--nodes", dg.params.nodes, "CGL variable count")->capture_default_str();
    datagen->add_option("--covariates", dg.params.covariates, "ATE/HTE/OPO covariate count")->capture_default_str();
    datagen->add_option("--stages", dg.params.stages, "OPO decision stages")->capture_default_str();
    datagen->add_option("--p-mask", dg.params.p_mask, "CGL edge mask probability")->capture_default_str();
    datagen->add_option("--beta-m", dg.beta_m, "MA treatment-to-mediator coefficient");
    datagen->add_option("--treatment", dg.treatment, "Treatment column name");
    datagen->add_option("--response", dg.response, "Response column name");
    datagen->add_option("--mediator", dg.mediator, "Mediator column name");
    datagen->add_option("--condition", dg.conditions, "Condition covariates, name=value[,name=value]");
    datagen->add_option("--topic", dg.topic, "Sample the query and column names from this topic");
    add_common(datagen, common);

    auto* bench = app.add_subcommand("bench", "Write a retrieval bench as JSONL");
    int bench_per_task = 30;
    bool with_interpret = false;
    bench->add_option("--n-per-task", bench_per_task, "Questions per task")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    bench->add_flag("--interpret", with_interpret, "Also write interpretation pairs");
    add_common(bench, common);

    auto* eval = app.add_subcommand("eval", "Run the pipeline over a bench and write report.json and report.txt");
    int eval_per_task = 30;
    std::string bench_path;
    eval->add_option("--bench", bench_path, "Bench JSONL; generated from --seed when omitted");
    eval->add_option("--n-per-task", eval_per_task, "Questions per task for a generated bench")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    add_common(eval, common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitInterpretation;
    }

    try {
        if (*ask) return cmd_ask(common, question, data_path);
        if (*datagen) return cmd_datagen(common, dg);
        if (*bench) return cmd_bench(common, bench_per_task, with_interpret);
        if (*eval) return cmd_eval(common, eval_per_task, bench_path);
    } catch (const Failure& f) {
        std::cerr << "causalqa: " << f.message << "\n";
        return f.exit_code;
    } catch (const std::exception& e) {
        std::cerr << "causalqa: " << e.what() << "\n";
        return kExitEstimation;
    }
    return kExitOk;
}
