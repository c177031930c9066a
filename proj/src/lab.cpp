#include "gasp/lab.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace gasp {

using nlohmann::json;

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

bool scripted_student_attempt(double skill, double difficulty, double steepness,
                              Rng& rng) {
    return rng.bernoulli(logistic(steepness * (skill - difficulty)));
}

std::optional<double> task_difficulty(const TaskSpec& task) {
    if (task.metadata.contains("lab") && task.metadata["lab"].contains("difficulty"))
        return task.metadata["lab"]["difficulty"].get<double>();
    return std::nullopt;
}

namespace {

constexpr const char* kWords[] = {
    "amber",   "basalt",  "cinder",  "dune",    "ember",    "fjord",   "garnet",
    "harbor",  "icicle",  "jasper",  "krill",   "lagoon",   "mesa",    "nectar",
    "onyx",    "prairie", "quartz",  "reef",    "sierra",   "tundra",  "umber",
    "vortex",  "willow",  "xenon",   "yarrow",  "zephyr",   "anvil",   "beacon",
    "cobalt",  "delta",   "estuary", "flint",   "glacier",  "hollow",  "ingot",
    "juniper", "kelp",    "lichen",  "moraine", "nickel",   "obsidian","pumice",
    "quarry",  "ripple",  "shale",   "talus",   "uplands",  "verge",   "wharf",
    "yucca",   "zinc",    "arbor",   "burrow",  "cascade",  "drift",   "eddy",
    "fathom",  "grotto",  "heath",   "inlet",   "knoll",    "ledge",   "marsh",
    "notch"};
constexpr std::size_t kWordCount = sizeof(kWords) / sizeof(kWords[0]);

struct ProgramPlan {
    std::string source;
    bool list_input = false;
    int list_len = 0;
};

// Operator chain of the requested depth over the (possibly reduced) input.
ProgramPlan build_program(double d_f, double d_io, Rng& rng) {
    ProgramPlan plan;
    plan.list_input = d_io >= 1.5;
    plan.list_len = plan.list_input
                        ? static_cast<int>(std::clamp(std::lround(d_io), 2l, 8l))
                        : 0;
    const int depth = static_cast<int>(std::clamp(std::lround(d_f) + 1, 1l, 9l));

    // A wide affine base layer keeps the program space large enough that
    // independently drawn proposals practically never collide verbatim.
    std::string expr = plan.list_input ? "(sum x)" : "x";
    expr = "(+ (* " + expr + " " + std::to_string(2 + rng.uniform_int(8)) + ") " +
           std::to_string(1 + rng.uniform_int(997)) + ")";
    for (int i = 1; i < depth; ++i) {
        switch (rng.uniform_int(5)) {
            case 0:
                expr = "(+ " + expr + " " + std::to_string(1 + rng.uniform_int(997)) + ")";
                break;
            case 1:
                expr = "(- " + expr + " " + std::to_string(1 + rng.uniform_int(997)) + ")";
                break;
            case 2:
                expr = "(* " + expr + " " + std::to_string(2 + rng.uniform_int(5)) + ")";
                break;
            case 3:
                expr = "(max " + expr + " " + std::to_string(rng.uniform_int(500)) + ")";
                break;
            default:
                expr = "(abs (- " + expr + " " + std::to_string(1 + rng.uniform_int(997)) + "))";
                break;
        }
    }
    plan.source = expr;
    return plan;
}

Value draw_input(const ProgramPlan& plan, Rng& rng) {
    if (!plan.list_input)
        return Value(static_cast<std::int64_t>(rng.uniform_int(120)) - 10);
    Value list = Value::array();
    for (int i = 0; i < plan.list_len; ++i)
        list.push_back(static_cast<std::int64_t>(rng.uniform_int(40)) - 5);
    return list;
}

}  // namespace

TaskSpec synthesize_task(const SynthesisParams& params, Rng& rng,
                         Executor& executor) {
    const ProgramPlan plan = build_program(params.d_f, params.d_io, rng);

    std::vector<Example> examples;
    for (int i = 0; i < 5; ++i) {
        Value input = draw_input(plan, rng);
        ExecResult r = executor.run({plan.source, input, 2000});
        if (!r.ok()) throw std::runtime_error("lab program failed: " + r.message);
        examples.push_back({std::move(input), std::move(r.output)});
    }

    std::ostringstream statement;
    const auto word = [&] { return kWords[rng.uniform_int(kWordCount)]; };
    statement << "Task " << std::hex << rng.next_u64() << std::dec << ": given "
              << (plan.list_input
                      ? "a list of " + std::to_string(plan.list_len) + " integers"
                      : "one integer")
              << ", trace the " << word() << " " << word()
              << " pipeline of depth " << std::lround(params.d_f) + 1
              << " and report the " << word() << " value under the " << word()
              << " " << word() << " rule.";

    TaskSpec task = make_induction_task("", statement.str(), plan.source,
                                        std::move(examples), 2);
    task.id = params.id;
    task.stage = params.stage;
    task.axis = params.axis;
    task.parent_id = params.parent_id;
    task.metadata["lab"] = {{"d_f", params.d_f},
                            {"d_io", params.d_io},
                            {"difficulty", params.d_f + params.d_io},
                            {"answer_program", plan.source}};
    return task;
}

void scripted_trainer_update(SkillState& skill, double& teacher_estimate,
                             TrainPhase phase, std::span<const TrainItem> items,
                             const LabScenario& scenario) {
    if (phase == TrainPhase::solver) {
        double gain = 0.0;
        for (const TrainItem& item : items) {
            if (item.reward <= 0.0) continue;
            if (!item.payload.contains("difficulty")) continue;
            const double d = item.payload["difficulty"].get<double>();
            if (std::abs(d - skill.skill) <= scenario.boundary_margin)
                gain += item.reward;
        }
        skill.skill += scenario.eta * gain;
        const long idx = skill.history.empty() ? 1 : skill.history.back().first + 1;
        skill.history.emplace_back(idx, skill.skill);
        return;
    }
    // Teacher phases track the student: observed pass rates above the target
    // peak mean the estimate lags the real skill.
    double delta = 0.0;
    int counted = 0;
    for (const TrainItem& item : items) {
        if (!item.payload.contains("p") || item.payload["p"].is_null()) continue;
        const double p = item.payload["p"].get<double>();
        const double target = item.payload.value("target_peak", 0.5);
        delta += p - target;
        ++counted;
    }
    if (counted > 0)
        teacher_estimate += scenario.estimate_gain * delta / counted;
}

struct SyntheticLab::Impl {
    LabScenario scenario;
    std::uint64_t seed;
    ExprExecutor executor;
    SkillState skill;
    double teacher_estimate;
    std::vector<std::string> teacher_memory;  // emitted proposal texts

    struct Teacher final : PolicyHandle {
        Impl* lab;
        explicit Teacher(Impl* l) : lab(l) {}
        GenerateResponse generate(const GenerateRequest& req) override {
            return lab->teacher_generate(req);
        }
        bool concurrent_safe() const override { return false; }
    } teacher_handle{this};

    struct Student final : PolicyHandle {
        Impl* lab;
        explicit Student(Impl* l) : lab(l) {}
        GenerateResponse generate(const GenerateRequest& req) override {
            return lab->student_generate(req);
        }
        bool concurrent_safe() const override { return true; }
    } student_handle{this};

    struct Trainer final : TrainerHook {
        Impl* lab;
        explicit Trainer(Impl* l) : lab(l) {}
        TrainAck update(TrainPhase phase, std::span<const TrainItem> items) override {
            scripted_trainer_update(lab->skill, lab->teacher_estimate, phase, items,
                                    lab->scenario);
            return {true, "lab-1"};
        }
    } trainer_hook{this};

    Impl(LabScenario s, std::uint64_t sd)
        : scenario(s), seed(sd), teacher_estimate(s.initial_teacher_estimate) {
        skill.skill = s.initial_skill;
    }

    // Difficulty at which the student's expected pass rate equals `peak`.
    double difficulty_for_peak(double peak) const {
        return teacher_estimate - std::log(peak / (1.0 - peak)) / scenario.steepness;
    }

    GenerateResponse teacher_generate(const GenerateRequest& req) {
        Rng rng(req.sampling.seed);
        if (rng.bernoulli(scenario.malformed_rate)) {
            return {"(((broken proposal " + std::to_string(rng.next_u64()) + ""};
        }
        if (!teacher_memory.empty() && rng.bernoulli(scenario.duplicate_rate)) {
            return {teacher_memory[rng.uniform_int(teacher_memory.size())]};
        }

        SynthesisParams params;
        double total;
        if (req.template_id == "lift_from_lemma") {
            const TaskSpec parent = TaskSpec::from_json(req.variables.at("lemma"));
            const double parent_d = task_difficulty(parent).value_or(teacher_estimate);
            const double bump =
                scenario.lift_increment + 0.2 * scenario.lemma_noise * rng.normal();
            total = std::max(parent_d + 0.05, parent_d + bump);
            params.axis = parent.axis;
            params.stage = TaskStage::lift;
            params.parent_id = parent.id;
        } else {
            // lemma_from_goalpost / one_step_from_goalpost: aim the proposal at
            // the pass-rate peak the phase rewards.
            const double peak = req.variables.value("target_peak", 0.5);
            total = difficulty_for_peak(peak) + scenario.lemma_noise * rng.normal();
            params.axis = axis_from_string(req.variables.value("axis", "f"));
            params.stage = TaskStage::lemma;
            if (req.variables.contains("goalpost"))
                params.parent_id =
                    req.variables["goalpost"].value("id", std::string());
        }
        total = std::max(total, 0.2);
        const double io_share = params.axis == DifficultyAxis::io ? 0.6 : 0.35;
        params.d_io = total * io_share;
        params.d_f = total - params.d_io;

        TaskSpec task = synthesize_task(params, rng, executor);
        std::string text = task.to_json().dump();
        teacher_memory.push_back(text);
        return {std::move(text)};
    }

    GenerateResponse student_generate(const GenerateRequest& req) {
        Rng rng(req.sampling.seed);
        if (!req.variables.contains("lab") || !req.variables["lab"].contains("difficulty"))
            return {"(+ x 987654321)"};  // nothing known about this task
        const json& lab = req.variables["lab"];
        const double difficulty = lab["difficulty"].get<double>();
        const bool pass =
            scripted_student_attempt(skill.skill, difficulty, scenario.steepness, rng);
        const std::string kind = req.variables["task"].value("kind", "induction");
        if (!pass) {
            if (kind == "deduction") return {"987654321"};
            if (kind == "abduction") return {"\"wrong\""};
            return {"(+ x 987654321)"};
        }
        if (kind == "deduction") return {lab.at("example").at("output").dump()};
        if (kind == "abduction") return {lab.at("example").at("input").dump()};
        return {lab.at("answer_program").get<std::string>()};
    }
};

SyntheticLab::SyntheticLab(LabScenario scenario, std::uint64_t seed)
    : impl_(std::make_unique<Impl>(scenario, seed)) {}
SyntheticLab::~SyntheticLab() = default;

PolicyHandle& SyntheticLab::teacher() { return impl_->teacher_handle; }
PolicyHandle& SyntheticLab::student() { return impl_->student_handle; }
TrainerHook& SyntheticLab::trainer() { return impl_->trainer_hook; }
double SyntheticLab::skill() const { return impl_->skill.skill; }
double SyntheticLab::teacher_estimate() const { return impl_->teacher_estimate; }
const SkillState& SyntheticLab::skill_state() const { return impl_->skill; }
const LabScenario& SyntheticLab::scenario() const { return impl_->scenario; }

std::vector<TaskSpec> SyntheticLab::make_goalposts() {
    std::vector<TaskSpec> out;
    Rng rng = Rng(impl_->seed).derive("goalposts");
    for (std::size_t i = 0; i < impl_->scenario.goalpost_difficulties.size(); ++i) {
        const double d = impl_->scenario.goalpost_difficulties[i];
        SynthesisParams p;
        p.id = "goalpost-" + std::to_string(i);
        p.stage = TaskStage::goalpost;
        p.axis = DifficultyAxis::none;
        p.d_io = d * 0.5;
        p.d_f = d - p.d_io;
        Rng task_rng = rng.derive(i);
        out.push_back(synthesize_task(p, task_rng, impl_->executor));
    }
    return out;
}

std::vector<TaskSpec> SyntheticLab::make_real_corpus() {
    std::vector<TaskSpec> out;
    Rng rng = Rng(impl_->seed).derive("real_corpus");
    const LabScenario& s = impl_->scenario;
    for (int i = 0; i < s.real_data_count; ++i) {
        const double d =
            s.real_data_lo + (s.real_data_hi - s.real_data_lo) * rng.uniform01();
        SynthesisParams p;
        p.id = "real-" + std::to_string(i);
        p.stage = TaskStage::real_data;
        p.axis = DifficultyAxis::none;
        p.d_io = d * 0.5;
        p.d_f = d - p.d_io;
        Rng task_rng = rng.derive(static_cast<std::uint64_t>(i) + 1000);
        out.push_back(synthesize_task(p, task_rng, impl_->executor));
    }
    return out;
}

}  // namespace gasp
