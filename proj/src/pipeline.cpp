#include "causalqa/pipeline.hpp"

#include <nlohmann/json.hpp>

#include "causalqa/text.hpp"

namespace causalqa {
namespace {

using json = nlohmann::json;

struct FunctionSpec {
    const char* name;
    Task task;
    const char* description;
};

constexpr FunctionSpec kFunctions[] = {
    {"causal_graph_learning", Task::CGL, "Return the causal structure among the variables of a dataset"},
    {"average_treatment_effect", Task::ATE, "Estimate the average effect of a treatment on a response"},
    {"heterogeneous_treatment_effect", Task::HTE,
     "Estimate the effect of a treatment on a response for units meeting a condition"},
    {"mediation_analysis", Task::MA, "Split the effect of a treatment on a response into direct and mediated parts"},
    {"policy_optimization", Task::OPO, "Recommend the treatment level that maximizes a response under a condition"},
};

json string_param(const char* description) { return {{"type", "string"}, {"description", description}}; }

[[noreturn]] void unusable(const std::string& why) {
    throw Error(ErrorCode::InterpretationFailed, "model reply is unusable: " + why);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        std::size_t end = s.find(',', start);
        if (end == std::string::npos) end = s.size();
        const auto item = trim(std::string_view(s).substr(start, end - start));
        if (!item.empty()) out.emplace_back(item);
        start = end + 1;
    }
    return out;
}

std::string arg_string(const json& args, const char* key) {
    if (!args.contains(key)) return {};
    const auto& v = args[key];
    if (v.is_string()) return v.get<std::string>();
    if (v.is_array() && !v.empty() && v[0].is_string()) {
        std::string joined;
        for (const auto& x : v) joined += (joined.empty() ? "" : ",") + x.get<std::string>();
        return joined;
    }
    return {};
}

// "x=0.5, z=2" -> clauses.
std::vector<ConditionClause> parse_condition_arg(const std::string& s) {
    std::vector<ConditionClause> out;
    for (const auto& part : split_list(s)) {
        const auto eq = part.find('=');
        if (eq == std::string::npos) unusable("condition '" + part + "' has no '='");
        out.push_back({std::string(trim(std::string_view(part).substr(0, eq))),
                       make_scalar(std::string_view(part).substr(eq + 1))});
    }
    return out;
}

// Digs the {name, arguments} pair out of the common reply shapes.
std::optional<std::pair<std::string, json>> find_call(const json& j) {
    if (!j.is_object()) return std::nullopt;
    if (j.contains("name") && j["name"].is_string() && j.contains("arguments")) {
        json args = j["arguments"];
        if (args.is_string()) {
            args = json::parse(args.get<std::string>(), nullptr, false);
            if (args.is_discarded()) unusable("arguments are not JSON");
        }
        return std::make_pair(j["name"].get<std::string>(), args);
    }
    for (const char* key : {"function", "function_call", "message"})
        if (j.contains(key))
            if (auto c = find_call(j[key])) return c;
    for (const char* key : {"tool_calls", "choices"})
        if (j.contains(key) && j[key].is_array() && !j[key].empty())
            if (auto c = find_call(j[key][0])) return c;
    return std::nullopt;
}

}  // namespace

std::string interpretation_tools_json() {
    json tools = json::array();
    for (const auto& f : kFunctions) {
        json props = {{"dataset", string_param("The name of the input dataset")}};
        json required = {"dataset"};
        if (f.task == Task::CGL) {
            props["nodes"] = string_param(
                "Names of the variables of interest separated by commas, or all_variables when none are named");
            required.push_back("nodes");
        } else {
            props["treatment"] = string_param("The treatment variable");
            props["response"] = string_param("The response variable");
            required.push_back("treatment");
            required.push_back("response");
            if (f.task == Task::MA) {
                props["mediator"] = string_param("The mediator variable");
                required.push_back("mediator");
            }
            if (f.task == Task::HTE || f.task == Task::OPO) {
                props["condition"] = string_param("Conditions as name=value pairs separated by commas");
                required.push_back("condition");
            }
        }
        tools.push_back({{"type", "function"},
                         {"function",
                          {{"name", f.name},
                           {"description", f.description},
                           {"parameters", {{"type", "object"}, {"properties", props}, {"required", required}}}}}});
    }
    return tools.dump();
}

CausalQuery query_from_function_call(std::string_view reply) {
    const json j = json::parse(reply, nullptr, false);
    if (j.is_discarded()) unusable("not JSON");
    if (j.is_object() && j.contains("causal_problem")) {
        try {
            return parse_query_json(reply);
        } catch (const Error& e) {
            unusable(e.what());
        }
    }
    const auto call = find_call(j);
    if (!call) unusable("no function call found");
    const auto& [name, args] = *call;
    const FunctionSpec* spec = nullptr;
    for (const auto& f : kFunctions)
        if (name == f.name) spec = &f;
    if (!spec) unusable("unknown function '" + name + "'");

    CausalQuery q;
    q.task = spec->task;
    q.dataset = arg_string(args, "dataset");
    if (q.task == Task::CGL) {
        q.nodes = split_list(arg_string(args, "nodes"));
        if (q.nodes.empty()) q.nodes = {std::string(kAllVariables)};
    } else {
        q.treatment = arg_string(args, "treatment");
        q.response = arg_string(args, "response");
        if (q.task == Task::MA) q.mediator = arg_string(args, "mediator");
        if (q.task == Task::HTE || q.task == Task::OPO) q.conditions = parse_condition_arg(arg_string(args, "condition"));
    }
    if (const auto v = validate_query(q); !v.empty()) unusable("slot '" + v.front().slot + "': " + v.front().rule);
    return q;
}

CausalQuery interpret_with_llm(std::string_view question, const LlmBackendConfig& cfg) {
    const json body = {{"question", std::string(question)}, {"tools", json::parse(interpretation_tools_json())}};
    const std::string reply = post_json(cfg, body.dump());
    // The call may sit in the raw body or inside a text field.
    try {
        return query_from_function_call(reply);
    } catch (const Error&) {
        return query_from_function_call(reply_text(reply));
    }
}

PipelineOutput run_pipeline(std::string_view question, const TabularDataset& data, const PipelineOptions& options,
                            const MethodRegistry& registry) {
    PipelineOutput out;
    if (options.interpreter) {
        out.intent = interpret_with_llm(question, *options.interpreter);
    } else {
        ParseContext ctx;
        ctx.known_columns = data.names();
        out.intent = interpret(question, ctx);
    }
    try {
        out.method = registry.method_for(out.intent.task);
        out.result = dispatch(out.intent, data, options.engine, registry);
        NarrationContext nctx{std::string(question), out.intent, out.method, out.result};
        out.interpretation = narrate(nctx, options.narrator);
    } catch (const Error& e) {
        throw PipelineError(e, out.intent);
    }
    return out;
}

}  // namespace causalqa
