/* C interface to the causal question-answering engine.
 *
 * Every call returns a cqa_status. On failure a human-readable message is
 * available from cqa_last_error() on the same thread until the next call.
 * Strings returned through char** out-parameters are owned by the caller
 * and released with cqa_string_free(). Handles are released with their
 * matching *_free function; passing NULL to any *_free is a no-op.
 */
#ifndef CAUSALQA_H
#define CAUSALQA_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define CQA_API __declspec(dllexport)
#else
#define CQA_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cqa_status {
    CQA_OK = 0,
    /* intent */
    CQA_INVALID_QUERY,
    CQA_MALFORMED_JSON,
    CQA_UNKNOWN_TASK,
    CQA_MISSING_REQUIRED_KEY,
    /* interpretation */
    CQA_EMPTY_QUESTION,
    CQA_DATASET_NOT_FOUND,
    CQA_ROLE_AMBIGUITY,
    CQA_INTERPRETATION_FAILED,
    /* bench and data generation */
    CQA_MALFORMED_HIERARCHY,
    CQA_UNKNOWN_TEMPLATE,
    CQA_BAD_DIMS,
    CQA_UNKNOWN_CONDITION_VARIABLE,
    /* data and estimation */
    CQA_IO,
    CQA_MALFORMED_CSV,
    CQA_COLUMN_NOT_FOUND,
    CQA_AMBIGUOUS_COLUMN,
    CQA_NON_BINARY_TREATMENT,
    CQA_TOO_MANY_LEVELS,
    CQA_MALFORMED_STAGE_SCHEMA,
    CQA_RANK_DEFICIENT,
    CQA_SEPARATION_DETECTED,
    CQA_INSUFFICIENT_SAMPLES,
    CQA_ESTIMATION_FAILED,
    /* narration */
    CQA_FORMAT_MISMATCH,
    CQA_BACKEND_UNREACHABLE,
    /* evaluation */
    CQA_LENGTH_MISMATCH,
    /* interface misuse (NULL handle, bad argument) and unexpected failures */
    CQA_INVALID_ARGUMENT = 100,
    CQA_INTERNAL = 101
} cqa_status;

typedef enum cqa_stage {
    CQA_STAGE_NONE = 0,
    CQA_STAGE_INTENT,
    CQA_STAGE_INTERPRETATION,
    CQA_STAGE_DATA,
    CQA_STAGE_ESTIMATION,
    CQA_STAGE_NARRATION,
    CQA_STAGE_EVALUATION,
    CQA_STAGE_INTERFACE
} cqa_stage;

typedef struct cqa_config cqa_config;
typedef struct cqa_dataset cqa_dataset;
typedef struct cqa_hierarchy cqa_hierarchy;
typedef struct cqa_answer cqa_answer;

CQA_API const char* cqa_version(void);
CQA_API const char* cqa_status_name(cqa_status status);
CQA_API cqa_stage cqa_status_stage(cqa_status status);
CQA_API const char* cqa_stage_name(cqa_stage stage);
CQA_API const char* cqa_last_error(void);
CQA_API void cqa_string_free(char* s);

/* Run configuration. Defaults: seed 1, alpha 0.01, 10000 rows per generated
 * dataset, 30 bench questions per task, all tasks, no model backend. */
CQA_API cqa_status cqa_config_new(cqa_config** out);
CQA_API void cqa_config_free(cqa_config* cfg);
CQA_API cqa_status cqa_config_set_seed(cqa_config* cfg, uint64_t seed);
CQA_API cqa_status cqa_config_set_alpha(cqa_config* cfg, double alpha);
CQA_API cqa_status cqa_config_set_rows(cqa_config* cfg, int rows);
CQA_API cqa_status cqa_config_set_bench_size(cqa_config* cfg, int per_task);
/* Comma-separated task names ("ATE,HTE"); NULL or "" selects all. */
CQA_API cqa_status cqa_config_set_tasks(cqa_config* cfg, const char* tasks);
/* http://host[:port]/path used for both interpretation and narration;
 * NULL or "" turns the model backend off. */
CQA_API cqa_status cqa_config_set_llm_endpoint(cqa_config* cfg, const char* endpoint);
CQA_API cqa_status cqa_config_set_llm_timeout(cqa_config* cfg, int seconds);
/* Name of the environment variable holding the bearer token. */
CQA_API cqa_status cqa_config_set_llm_token_env(cqa_config* cfg, const char* name);

CQA_API cqa_status cqa_dataset_read_csv(const char* path, cqa_dataset** out);
CQA_API void cqa_dataset_free(cqa_dataset* data);
CQA_API size_t cqa_dataset_rows(const cqa_dataset* data);
CQA_API size_t cqa_dataset_cols(const cqa_dataset* data);

CQA_API cqa_status cqa_hierarchy_load(const char* path, cqa_hierarchy** out);
CQA_API void cqa_hierarchy_free(cqa_hierarchy* h);
CQA_API size_t cqa_hierarchy_topic_count(const cqa_hierarchy* h);

/* Question -> canonical query JSON with the rule parser. */
CQA_API cqa_status cqa_interpret(const char* question, char** intent_json);

/* Full pipeline on one dataset. On failure after interpretation the intent
 * is still reported through *partial_intent_json when that pointer is
 * non-NULL (set to NULL otherwise). */
CQA_API cqa_status cqa_ask(const cqa_config* cfg, const char* question, const cqa_dataset* data, cqa_answer** out,
                           char** partial_intent_json);
CQA_API void cqa_answer_free(cqa_answer* answer);
CQA_API const char* cqa_answer_intent_json(const cqa_answer* answer);
CQA_API const char* cqa_answer_result_json(const cqa_answer* answer);
CQA_API const char* cqa_answer_interpretation(const cqa_answer* answer);
CQA_API const char* cqa_answer_method(const cqa_answer* answer);
/* "template" or "llm". */
CQA_API const char* cqa_answer_source(const cqa_answer* answer);
/* Envelope {intent, result, interpretation}. */
CQA_API cqa_status cqa_answer_envelope_json(const cqa_answer* answer, char** json);

typedef struct cqa_datagen_params {
    const char* task;          /* CGL, ATE, HTE, MA or OPO */
    int nodes;                 /* CGL variables, default 5 */
    int covariates;            /* ATE/HTE/OPO covariates, default 3 */
    int stages;                /* OPO stages, default 1 */
    double p_mask;             /* CGL edge mask probability, default 0.5 */
    int has_beta_m;            /* MA: use beta_m below instead of sampling it */
    double beta_m;
    const char* treatment;     /* column names; NULL keeps a / y / m */
    const char* response;
    const char* mediator;
    const char* conditions;    /* "name=value,name=value" for HTE/OPO labels */
    const char* topic;         /* sample names and the query from this topic */
    const cqa_hierarchy* hierarchy; /* required with topic */
} cqa_datagen_params;

CQA_API void cqa_datagen_params_init(cqa_datagen_params* p);

/* Writes the CSV and the golden sidecar. *summary_json (optional) receives
 * {query?, golden, columns, rows}. */
CQA_API cqa_status cqa_datagen(const cqa_config* cfg, const cqa_datagen_params* params, const char* csv_path,
                               const char* sidecar_path, char** summary_json);

/* Retrieval bench as JSONL for the configured seed, size and tasks. */
CQA_API cqa_status cqa_bench_generate(const cqa_config* cfg, const cqa_hierarchy* h, char** jsonl);
/* Interpretation pairs for a retrieval bench. */
CQA_API cqa_status cqa_interpret_bench_generate(const cqa_config* cfg, const cqa_hierarchy* h,
                                                const char* bench_jsonl, char** jsonl);

/* End-to-end evaluation of a bench (NULL: generate one from cfg). The
 * hierarchy may be NULL; then covariates get generic names. */
CQA_API cqa_status cqa_eval(const cqa_config* cfg, const cqa_hierarchy* h, const char* bench_jsonl,
                            char** report_json, char** report_table);

#ifdef __cplusplus
}
#endif

#endif /* CAUSALQA_H */
