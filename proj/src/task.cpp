#include "gasp/task.hpp"

#include <fstream>

namespace gasp {

using nlohmann::json;

const char* to_string(TaskKind k) {
    switch (k) {
        case TaskKind::induction: return "induction";
        case TaskKind::deduction: return "deduction";
        case TaskKind::abduction: return "abduction";
    }
    return "?";
}

const char* to_string(TaskStage s) {
    switch (s) {
        case TaskStage::goalpost: return "goalpost";
        case TaskStage::lemma: return "lemma";
        case TaskStage::lift: return "lift";
        case TaskStage::real_data: return "real_data";
        case TaskStage::seed: return "seed";
    }
    return "?";
}

const char* to_string(DifficultyAxis a) {
    switch (a) {
        case DifficultyAxis::io: return "io";
        case DifficultyAxis::f: return "f";
        case DifficultyAxis::none: return "none";
    }
    return "?";
}

TaskKind task_kind_from_string(const std::string& s) {
    if (s == "induction") return TaskKind::induction;
    if (s == "deduction") return TaskKind::deduction;
    if (s == "abduction") return TaskKind::abduction;
    throw StructuralError("unknown task kind: " + s);
}

TaskStage task_stage_from_string(const std::string& s) {
    if (s == "goalpost") return TaskStage::goalpost;
    if (s == "lemma") return TaskStage::lemma;
    if (s == "lift") return TaskStage::lift;
    if (s == "real_data") return TaskStage::real_data;
    if (s == "seed") return TaskStage::seed;
    throw StructuralError("unknown task stage: " + s);
}

DifficultyAxis axis_from_string(const std::string& s) {
    if (s == "io") return DifficultyAxis::io;
    if (s == "f") return DifficultyAxis::f;
    if (s == "none") return DifficultyAxis::none;
    throw StructuralError("unknown difficulty axis: " + s);
}

std::span<const Example> TaskSpec::public_examples() const {
    const auto n = std::min<std::size_t>(public_count, examples.size());
    return {examples.data(), n};
}

std::span<const Example> TaskSpec::private_examples() const {
    const auto n = std::min<std::size_t>(public_count, examples.size());
    return {examples.data() + n, examples.size() - n};
}

json TaskSpec::to_json() const {
    json ex = json::array();
    for (const Example& e : examples) ex.push_back({{"input", e.input}, {"output", e.output}});
    json j{{"id", id},
           {"kind", to_string(kind)},
           {"statement", statement},
           {"examples", std::move(ex)},
           {"public_count", public_count},
           {"stage", to_string(stage)},
           {"axis", to_string(axis)}};
    if (!function_source.empty()) j["function_source"] = function_source;
    if (parent_id) j["parent_id"] = *parent_id;
    if (!metadata.is_null()) j["metadata"] = metadata;
    return j;
}

TaskSpec TaskSpec::from_json(const json& j) {
    if (!j.is_object()) throw StructuralError("task record must be an object");
    TaskSpec t;
    try {
        t.id = j.at("id").get<std::string>();
        t.kind = task_kind_from_string(j.at("kind").get<std::string>());
        t.statement = j.at("statement").get<std::string>();
        if (j.contains("function_source"))
            t.function_source = j["function_source"].get<std::string>();
        for (const json& e : j.at("examples"))
            t.examples.push_back({e.at("input"), e.at("output")});
        t.public_count = j.at("public_count").get<int>();
        if (j.contains("stage")) t.stage = task_stage_from_string(j["stage"].get<std::string>());
        if (j.contains("axis")) t.axis = axis_from_string(j["axis"].get<std::string>());
        if (j.contains("parent_id")) t.parent_id = j["parent_id"].get<std::string>();
        if (j.contains("metadata")) t.metadata = j["metadata"];
    } catch (const json::exception& e) {
        throw StructuralError(std::string("bad task record: ") + e.what());
    }
    return t;
}

json TaskSpec::solver_view() const {
    json v{{"id", id}, {"kind", to_string(kind)}, {"statement", statement}};
    switch (kind) {
        case TaskKind::induction: {
            json ex = json::array();
            for (const Example& e : public_examples())
                ex.push_back({{"input", e.input}, {"output", e.output}});
            v["public_examples"] = std::move(ex);
            break;
        }
        case TaskKind::deduction:
            v["function_source"] = function_source;
            v["input"] = examples.at(0).input;
            break;
        case TaskKind::abduction:
            v["function_source"] = function_source;
            v["output"] = examples.at(0).output;
            break;
    }
    return v;
}

TaskSpec make_induction_task(std::string id, std::string statement,
                             std::string function_source,
                             std::vector<Example> examples, int public_count,
                             Executor* consistency, int timeout_ms) {
    if (statement.empty()) throw StructuralError("task statement is empty");
    if (public_count < 0) throw StructuralError("public_count must be >= 0");
    if (examples.size() < static_cast<std::size_t>(public_count) + 1)
        throw StructuralError("induction task needs at least one private example");
    if (consistency != nullptr) {
        if (function_source.empty())
            throw ValidityError("consistency check requested without a program");
        for (std::size_t i = 0; i < examples.size(); ++i) {
            ExecResult r = consistency->run({function_source, examples[i].input, timeout_ms});
            if (!r.ok())
                throw ValidityError("example " + std::to_string(i) +
                                    " failed to execute: " + r.message);
            if (!values_equal(r.output, examples[i].output))
                throw ValidityError("example " + std::to_string(i) +
                                    " disagrees with the program");
        }
    }
    TaskSpec t;
    t.id = std::move(id);
    t.kind = TaskKind::induction;
    t.statement = std::move(statement);
    t.function_source = std::move(function_source);
    t.examples = std::move(examples);
    t.public_count = public_count;
    return t;
}

namespace {

TaskSpec convert(const TaskSpec& task, Rng& rng, TaskKind kind) {
    if (task.kind != TaskKind::induction)
        throw ConversionError("only induction tasks can be converted");
    if (!task.has_function_source())
        throw ConversionError("conversion needs the task's program");
    if (task.examples.empty()) throw ConversionError("task has no examples");
    TaskSpec out = task;
    out.kind = kind;
    const std::size_t pick = rng.uniform_int(task.examples.size());
    out.examples = {task.examples[pick]};
    out.public_count = 0;
    out.metadata = task.metadata;
    return out;
}

}  // namespace

TaskSpec to_deduction(const TaskSpec& task, Rng& rng) {
    return convert(task, rng, TaskKind::deduction);
}

TaskSpec to_abduction(const TaskSpec& task, Rng& rng) {
    return convert(task, rng, TaskKind::abduction);
}

TaskSpec randomize_format(const TaskSpec& task, Rng& rng) {
    if (task.kind != TaskKind::induction)
        throw ConversionError("randomize_format expects an induction task");
    if (!task.has_function_source()) return task;  // conversion impossible
    switch (rng.uniform_int(3)) {
        case 0: return task;
        case 1: return to_deduction(task, rng);
        default: return to_abduction(task, rng);
    }
}

DifficultyAxis sample_axis(Rng& rng, AxisMode mode) {
    if (mode == AxisMode::f_only) return DifficultyAxis::f;
    return rng.uniform_int(2) == 0 ? DifficultyAxis::io : DifficultyAxis::f;
}

std::vector<TaskSpec> load_task_corpus(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open task corpus: " + path.string());
    std::vector<TaskSpec> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded())
            throw StructuralError("task corpus line " + std::to_string(lineno) +
                                  " is not valid JSON");
        out.push_back(TaskSpec::from_json(j));
    }
    return out;
}

void save_task_corpus(const std::filesystem::path& path,
                      std::span<const TaskSpec> tasks) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write task corpus: " + path.string());
    for (const TaskSpec& t : tasks) out << t.to_json().dump() << '\n';
}

}  // namespace gasp
