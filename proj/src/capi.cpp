#include "causalqa/causalqa.h"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "causalqa/bench.hpp"
#include "causalqa/datagen.hpp"
#include "causalqa/eval.hpp"
#include "causalqa/pipeline.hpp"
#include "causalqa/text.hpp"

using namespace causalqa;
using ordered_json = nlohmann::ordered_json;

struct cqa_config {
    std::uint64_t seed = 1;
    double alpha = kDefaultAlpha;
    int rows = kDefaultCaseRows;
    int bench_size = 30;
    std::set<Task> tasks;  // empty: all
    std::optional<LlmBackendConfig> llm;
    std::string token_env = "CAUSALQA_LLM_TOKEN";
    int timeout_s = 30;
};

struct cqa_dataset {
    TabularDataset data;
};

struct cqa_hierarchy {
    TopicHierarchy h;
};

struct cqa_answer {
    std::string intent_json;
    std::string result_json;
    std::string interpretation;
    std::string method;
    std::string source;
};

namespace {

thread_local std::string g_last_error;

struct InvalidArgument {
    std::string message;
};

[[noreturn]] void invalid(std::string message) { throw InvalidArgument{std::move(message)}; }

template <class T>
void require(const T* p, const char* what) {
    if (!p) invalid(std::string(what) + " is NULL");
}

cqa_status status_of(ErrorCode code) { return static_cast<cqa_status>(static_cast<int>(code) + 1); }

template <class F>
cqa_status guard(F&& f) {
    try {
        f();
        g_last_error.clear();
        return CQA_OK;
    } catch (const Error& e) {
        g_last_error = e.what();
        return status_of(e.code());
    } catch (const InvalidArgument& e) {
        g_last_error = "invalid argument: " + e.message;
        return CQA_INVALID_ARGUMENT;
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return CQA_INTERNAL;
    } catch (const std::exception& e) {
        g_last_error = std::string("internal error: ") + e.what();
        return CQA_INTERNAL;
    } catch (...) {
        g_last_error = "internal error";
        return CQA_INTERNAL;
    }
}

char* dup(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

void set_out(char** out, const std::string& s) {
    if (out) *out = dup(s);
}

Task parse_task(const char* name) {
    require(name, "task");
    if (auto t = task_from_string(trim(name))) return *t;
    throw Error(ErrorCode::UnknownTask, "unknown task '" + std::string(name) + "'");
}

PipelineOptions pipeline_options(const cqa_config& cfg) {
    PipelineOptions opt;
    opt.engine.alpha = cfg.alpha;
    if (cfg.llm) {
        opt.interpreter = cfg.llm;
        opt.narrator = NarrateBackend::language_model(*cfg.llm);
    }
    return opt;
}

std::vector<QueryBenchRecord> filter_tasks(std::vector<QueryBenchRecord> records, const cqa_config& cfg) {
    if (cfg.tasks.empty()) return records;
    std::erase_if(records, [&](const QueryBenchRecord& r) { return !cfg.tasks.count(r.golden.task); });
    return records;
}

std::vector<QueryBenchRecord> bench_for(const cqa_config& cfg, const TopicHierarchy& h) {
    return filter_tasks(generate_retrieval_bench(static_cast<std::size_t>(cfg.bench_size), h, cfg.seed), cfg);
}

std::vector<ConditionClause> parse_conditions(const char* text) {
    std::vector<ConditionClause> out;
    if (!text) return out;
    const std::string s = text;
    std::size_t start = 0;
    while (start <= s.size()) {
        std::size_t end = s.find(',', start);
        if (end == std::string::npos) end = s.size();
        const std::string part(trim(std::string_view(s).substr(start, end - start)));
        start = end + 1;
        if (part.empty()) continue;
        const auto eq = part.find('=');
        if (eq == std::string::npos) throw Error(ErrorCode::BadDims, "condition '" + part + "' has no '='");
        ConditionClause c{std::string(trim(std::string_view(part).substr(0, eq))),
                          make_scalar(trim(std::string_view(part).substr(eq + 1)))};
        if (!is_identifier(c.variable)) throw Error(ErrorCode::BadDims, "bad condition variable '" + c.variable + "'");
        if (!std::holds_alternative<double>(c.value))
            throw Error(ErrorCode::BadDims, "condition value for '" + c.variable + "' is not numeric");
        out.push_back(std::move(c));
    }
    return out;
}

std::string name_or(const char* name, const char* fallback) {
    if (!name || !*name) return fallback;
    if (!is_identifier(name)) throw Error(ErrorCode::BadDims, "bad column name '" + std::string(name) + "'");
    return name;
}

struct Generated {
    TabularDataset data;
    GoldenLabel truth;
    std::optional<CausalQuery> query;
};

// Data for a query sampled from one topic, named after its variables.
Generated datagen_topic(const cqa_config& cfg, const cqa_datagen_params& p, Task task) {
    require(p.hierarchy, "hierarchy");
    const TopicNode* topic = p.hierarchy->h.find(p.topic);
    if (!topic) throw Error(ErrorCode::BadDims, "unknown topic '" + std::string(p.topic) + "'");
    TopicHierarchy one;
    one.topics.push_back(*topic);
    Rng rng = make_rng(cfg.seed, "datagen/query/" + std::string(to_string(task)));
    Generated g;
    g.query = sample_query(task, one, rng);
    CaseData cd = make_case_data(*g.query, &one, derive_seed(cfg.seed, "datagen/data"), cfg.rows);
    g.data = std::move(cd.data);
    g.truth = std::move(cd.truth);
    return g;
}

Generated datagen_plain(const cqa_config& cfg, const cqa_datagen_params& p, Task task) {
    Rng rng = make_rng(cfg.seed, "datagen/" + std::string(to_string(task)));
    Generated g;
    const auto conditions = parse_conditions(p.conditions);
    switch (task) {
        case Task::CGL: {
            auto d = gen_cgl(p.nodes, cfg.rows, p.p_mask, rng);
            g.data = std::move(d.data);
            g.truth = std::move(d.truth);
            break;
        }
        case Task::MA: {
            MediationColumns cols{name_or(p.treatment, "a"), name_or(p.mediator, "m"), name_or(p.response, "y")};
            auto d = gen_mediation(cfg.rows, rng, cols, p.has_beta_m ? std::optional<double>(p.beta_m) : std::nullopt);
            g.data = std::move(d.data);
            g.truth = d.truth;
            break;
        }
        case Task::OPO:
            if (p.stages > 1) {
                if ((p.treatment && *p.treatment) || (p.response && *p.response))
                    throw Error(ErrorCode::BadDims, "multi-stage data uses fixed column names");
                auto d = gen_opo(p.covariates, cfg.rows, p.stages, rng);
                g.data = std::move(d.data);
                g.truth = multi_stage_policy(d.params, conditions);
                break;
            }
            [[fallthrough]];
        case Task::ATE:
        case Task::HTE: {
            if (p.stages < 1) throw Error(ErrorCode::BadDims, "stages must be at least 1");
            if (p.covariates < 1) throw Error(ErrorCode::BadDims, "covariates must be at least 1");
            EffectColumns cols;
            cols.treatment = name_or(p.treatment, "a");
            cols.response = name_or(p.response, "y");
            for (const auto& c : conditions)
                if (std::find(cols.covariates.begin(), cols.covariates.end(), c.variable) == cols.covariates.end())
                    cols.covariates.push_back(c.variable);
            for (int k = 1; static_cast<int>(cols.covariates.size()) < p.covariates; ++k) {
                const std::string s = "s" + std::to_string(k);
                if (std::find(cols.covariates.begin(), cols.covariates.end(), s) == cols.covariates.end())
                    cols.covariates.push_back(s);
            }
            if (static_cast<int>(cols.covariates.size()) > p.covariates)
                throw Error(ErrorCode::BadDims, "more condition variables than covariates");
            auto d = gen_effect(p.covariates, cfg.rows, rng, cols);
            g.data = std::move(d.data);
            if (task == Task::ATE)
                g.truth = AteTruth{true_ate(d.params)};
            else if (task == Task::HTE)
                g.truth = HteTruth{conditions, true_hte(d.params, conditions)};
            else
                g.truth = single_stage_policy(d.params, conditions);
            break;
        }
    }
    return g;
}

}  // namespace

extern "C" {

const char* cqa_version(void) { return "0.1.0"; }

const char* cqa_status_name(cqa_status status) {
    switch (status) {
        case CQA_OK: return "Ok";
        case CQA_INVALID_ARGUMENT: return "InvalidArgument";
        case CQA_INTERNAL: return "Internal";
        default: break;
    }
    const int i = static_cast<int>(status) - 1;
    if (i < 0 || i > static_cast<int>(ErrorCode::LengthMismatch)) return "Unknown";
    return to_string(static_cast<ErrorCode>(i)).data();
}

cqa_stage cqa_status_stage(cqa_status status) {
    switch (status) {
        case CQA_OK: return CQA_STAGE_NONE;
        case CQA_INVALID_ARGUMENT:
        case CQA_INTERNAL: return CQA_STAGE_INTERFACE;
        default: break;
    }
    const int i = static_cast<int>(status) - 1;
    if (i < 0 || i > static_cast<int>(ErrorCode::LengthMismatch)) return CQA_STAGE_INTERFACE;
    return static_cast<cqa_stage>(static_cast<int>(stage_of(static_cast<ErrorCode>(i))) + 1);
}

const char* cqa_stage_name(cqa_stage stage) {
    switch (stage) {
        case CQA_STAGE_NONE: return "none";
        case CQA_STAGE_INTERFACE: return "interface";
        default: break;
    }
    const int i = static_cast<int>(stage) - 1;
    if (i < 0 || i > static_cast<int>(Stage::Evaluation)) return "unknown";
    return to_string(static_cast<Stage>(i)).data();
}

const char* cqa_last_error(void) { return g_last_error.c_str(); }

void cqa_string_free(char* s) { std::free(s); }

cqa_status cqa_config_new(cqa_config** out) {
    return guard([&] {
        require(out, "out");
        *out = new cqa_config;
    });
}

void cqa_config_free(cqa_config* cfg) { delete cfg; }

cqa_status cqa_config_set_seed(cqa_config* cfg, uint64_t seed) {
    return guard([&] {
        require(cfg, "config");
        cfg->seed = seed;
    });
}

cqa_status cqa_config_set_alpha(cqa_config* cfg, double alpha) {
    return guard([&] {
        require(cfg, "config");
        if (!(alpha > 0.0 && alpha < 1.0)) invalid("alpha must lie in (0, 1)");
        cfg->alpha = alpha;
    });
}

cqa_status cqa_config_set_rows(cqa_config* cfg, int rows) {
    return guard([&] {
        require(cfg, "config");
        if (rows < 1) invalid("rows must be positive");
        cfg->rows = rows;
    });
}

cqa_status cqa_config_set_bench_size(cqa_config* cfg, int per_task) {
    return guard([&] {
        require(cfg, "config");
        if (per_task < 1) invalid("bench size must be positive");
        cfg->bench_size = per_task;
    });
}

cqa_status cqa_config_set_tasks(cqa_config* cfg, const char* tasks) {
    return guard([&] {
        require(cfg, "config");
        std::set<Task> chosen;
        if (tasks) {
            const std::string s = tasks;
            std::size_t start = 0;
            while (start <= s.size()) {
                std::size_t end = s.find(',', start);
                if (end == std::string::npos) end = s.size();
                const std::string name(trim(std::string_view(s).substr(start, end - start)));
                start = end + 1;
                if (!name.empty()) chosen.insert(parse_task(name.c_str()));
            }
        }
        cfg->tasks = std::move(chosen);
    });
}

cqa_status cqa_config_set_llm_endpoint(cqa_config* cfg, const char* endpoint) {
    return guard([&] {
        require(cfg, "config");
        if (!endpoint || !*endpoint) {
            cfg->llm.reset();
            return;
        }
        parse_http_endpoint(endpoint);
        LlmBackendConfig llm;
        llm.endpoint = endpoint;
        llm.token_env = cfg->token_env;
        llm.timeout = std::chrono::seconds(cfg->timeout_s);
        cfg->llm = llm;
    });
}

cqa_status cqa_config_set_llm_timeout(cqa_config* cfg, int seconds) {
    return guard([&] {
        require(cfg, "config");
        if (seconds < 1) invalid("timeout must be positive");
        cfg->timeout_s = seconds;
        if (cfg->llm) cfg->llm->timeout = std::chrono::seconds(seconds);
    });
}

cqa_status cqa_config_set_llm_token_env(cqa_config* cfg, const char* name) {
    return guard([&] {
        require(cfg, "config");
        require(name, "name");
        cfg->token_env = name;
        if (cfg->llm) cfg->llm->token_env = name;
    });
}

cqa_status cqa_dataset_read_csv(const char* path, cqa_dataset** out) {
    return guard([&] {
        require(path, "path");
        require(out, "out");
        *out = nullptr;
        auto d = std::make_unique<cqa_dataset>();
        d->data = read_csv(path);
        *out = d.release();
    });
}

void cqa_dataset_free(cqa_dataset* data) { delete data; }
size_t cqa_dataset_rows(const cqa_dataset* data) { return data ? data->data.rows() : 0; }
size_t cqa_dataset_cols(const cqa_dataset* data) { return data ? data->data.cols() : 0; }

cqa_status cqa_hierarchy_load(const char* path, cqa_hierarchy** out) {
    return guard([&] {
        require(path, "path");
        require(out, "out");
        *out = nullptr;
        auto h = std::make_unique<cqa_hierarchy>();
        h->h = load_hierarchy(path);
        *out = h.release();
    });
}

void cqa_hierarchy_free(cqa_hierarchy* h) { delete h; }
size_t cqa_hierarchy_topic_count(const cqa_hierarchy* h) { return h ? h->h.topics.size() : 0; }

cqa_status cqa_interpret(const char* question, char** intent_json) {
    return guard([&] {
        require(question, "question");
        require(intent_json, "intent_json");
        *intent_json = nullptr;
        *intent_json = dup(serialize_query(interpret(question)));
    });
}

cqa_status cqa_ask(const cqa_config* cfg, const char* question, const cqa_dataset* data, cqa_answer** out,
                   char** partial_intent_json) {
    if (partial_intent_json) *partial_intent_json = nullptr;
    return guard([&] {
        require(cfg, "config");
        require(question, "question");
        require(data, "dataset");
        require(out, "out");
        *out = nullptr;
        try {
            const PipelineOutput r = run_pipeline(question, data->data, pipeline_options(*cfg));
            auto a = std::make_unique<cqa_answer>();
            a->intent_json = serialize_query(r.intent);
            a->result_json = tool_result_to_json(r.result);
            a->interpretation = r.interpretation.text;
            a->method = std::string(to_string(r.method));
            a->source = r.interpretation.source == Interpretation::Source::Llm ? "llm" : "template";
            *out = a.release();
        } catch (const PipelineError& e) {
            if (partial_intent_json) *partial_intent_json = dup(serialize_query(e.intent()));
            throw;
        }
    });
}

void cqa_answer_free(cqa_answer* answer) { delete answer; }
const char* cqa_answer_intent_json(const cqa_answer* a) { return a ? a->intent_json.c_str() : ""; }
const char* cqa_answer_result_json(const cqa_answer* a) { return a ? a->result_json.c_str() : ""; }
const char* cqa_answer_interpretation(const cqa_answer* a) { return a ? a->interpretation.c_str() : ""; }
const char* cqa_answer_method(const cqa_answer* a) { return a ? a->method.c_str() : ""; }
const char* cqa_answer_source(const cqa_answer* a) { return a ? a->source.c_str() : ""; }

cqa_status cqa_answer_envelope_json(const cqa_answer* answer, char** json) {
    return guard([&] {
        require(answer, "answer");
        require(json, "json");
        ordered_json j;
        j["intent"] = ordered_json::parse(answer->intent_json);
        j["result"] = ordered_json::parse(answer->result_json);
        j["interpretation"] = answer->interpretation;
        *json = dup(j.dump(2));
    });
}

void cqa_datagen_params_init(cqa_datagen_params* p) {
    if (!p) return;
    *p = cqa_datagen_params{};
    p->nodes = 5;
    p->covariates = 3;
    p->stages = 1;
    p->p_mask = kDefaultMaskProbability;
}

cqa_status cqa_datagen(const cqa_config* cfg, const cqa_datagen_params* params, const char* csv_path,
                       const char* sidecar_path, char** summary_json) {
    if (summary_json) *summary_json = nullptr;
    return guard([&] {
        require(cfg, "config");
        require(params, "params");
        require(csv_path, "csv_path");
        require(sidecar_path, "sidecar_path");
        const Task task = parse_task(params->task);
        const Generated g =
            params->topic && *params->topic ? datagen_topic(*cfg, *params, task) : datagen_plain(*cfg, *params, task);
        const std::string golden = golden_to_json(g.truth);
        write_text_atomic(csv_path, to_csv(g.data));
        write_text_atomic(sidecar_path, golden + "\n");
        if (summary_json) {
            ordered_json j;
            if (g.query) j["query"] = ordered_json::parse(serialize_query(*g.query));
            j["golden"] = ordered_json::parse(golden);
            j["columns"] = g.data.names();
            j["rows"] = g.data.rows();
            *summary_json = dup(j.dump(2));
        }
    });
}

cqa_status cqa_bench_generate(const cqa_config* cfg, const cqa_hierarchy* h, char** jsonl) {
    if (jsonl) *jsonl = nullptr;
    return guard([&] {
        require(cfg, "config");
        require(h, "hierarchy");
        require(jsonl, "jsonl");
        *jsonl = dup(to_jsonl(bench_for(*cfg, h->h)));
    });
}

cqa_status cqa_interpret_bench_generate(const cqa_config* cfg, const cqa_hierarchy* h, const char* bench_jsonl,
                                        char** jsonl) {
    if (jsonl) *jsonl = nullptr;
    return guard([&] {
        require(cfg, "config");
        require(h, "hierarchy");
        require(bench_jsonl, "bench_jsonl");
        require(jsonl, "jsonl");
        const auto records = filter_tasks(parse_bench_jsonl(bench_jsonl), *cfg);
        *jsonl = dup(to_jsonl(generate_interpret_bench(records, h->h, cfg->seed)));
    });
}

cqa_status cqa_eval(const cqa_config* cfg, const cqa_hierarchy* h, const char* bench_jsonl, char** report_json,
                    char** report_table) {
    if (report_json) *report_json = nullptr;
    if (report_table) *report_table = nullptr;
    return guard([&] {
        require(cfg, "config");
        std::vector<QueryBenchRecord> records;
        if (bench_jsonl) {
            records = filter_tasks(parse_bench_jsonl(bench_jsonl), *cfg);
        } else {
            if (!h) invalid("a hierarchy is needed to generate the bench");
            records = bench_for(*cfg, h->h);
        }
        const PipelineOptions options = pipeline_options(*cfg);
        const PipelineFn fn = [&](const std::string& q, const TabularDataset& d) {
            return run_pipeline(q, d, options);
        };
        EndToEndConfig ec;
        ec.seed = cfg->seed;
        ec.rows = cfg->rows;
        ec.hierarchy = h ? &h->h : nullptr;
        const EvalReport report = end_to_end(records, fn, ec);
        set_out(report_json, report_to_json(report));
        set_out(report_table, causalqa::report_table(report));
    });
}

}  // extern "C"
