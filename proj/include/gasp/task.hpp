#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gasp/executor.hpp"
#include "gasp/rng.hpp"

namespace gasp {

// Proposal/task violates its structural contract (counts, missing fields).
struct StructuralError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
// Task content is inconsistent (declared examples disagree with the program).
struct ValidityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
// Conversion between task kinds is impossible for this task.
struct ConversionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class TaskKind { induction, deduction, abduction };
enum class TaskStage { goalpost, lemma, lift, real_data, seed };
enum class DifficultyAxis { io, f, none };

const char* to_string(TaskKind k);
const char* to_string(TaskStage s);
const char* to_string(DifficultyAxis a);
TaskKind task_kind_from_string(const std::string& s);
TaskStage task_stage_from_string(const std::string& s);
DifficultyAxis axis_from_string(const std::string& s);

struct Example {
    Value input;
    Value output;
};

// One coding task. For induction the mapping is hidden and the first
// public_count examples are shown; deduction exposes (program, one input)
// and hides the output; abduction exposes (program, one output) and accepts
// any input the program maps onto it.
struct TaskSpec {
    std::string id;
    TaskKind kind = TaskKind::induction;
    std::string statement;
    std::string function_source;  // empty = absent
    std::vector<Example> examples;
    int public_count = 0;
    TaskStage stage = TaskStage::seed;
    DifficultyAxis axis = DifficultyAxis::none;
    std::optional<std::string> parent_id;
    nlohmann::json metadata;  // open extension point (lab difficulty, hints)

    bool has_function_source() const { return !function_source.empty(); }
    std::span<const Example> public_examples() const;
    std::span<const Example> private_examples() const;

    nlohmann::json to_json() const;
    static TaskSpec from_json(const nlohmann::json& j);

    // What the solver is shown: statement plus the kind-specific exposed
    // fields; hidden fields (private tests, the mapping for induction, the
    // answer side for deduction/abduction) are stripped.
    nlohmann::json solver_view() const;
};

// Builds and checks an induction task. At least one private example must
// remain after the public split. When `consistency` is given, every example
// is executed and a disagreement raises ValidityError.
TaskSpec make_induction_task(std::string id, std::string statement,
                             std::string function_source,
                             std::vector<Example> examples, int public_count,
                             Executor* consistency = nullptr,
                             int timeout_ms = 2000);

// Kind conversions select one example via the seeded source and preserve
// lineage; the hidden side of the chosen example becomes the answer key.
TaskSpec to_deduction(const TaskSpec& task, Rng& rng);
TaskSpec to_abduction(const TaskSpec& task, Rng& rng);

// Keeps induction or converts to deduction/abduction, one third each.
// Tasks without a program cannot be converted and stay induction.
TaskSpec randomize_format(const TaskSpec& task, Rng& rng);

enum class AxisMode { both, f_only };
DifficultyAxis sample_axis(Rng& rng, AxisMode mode = AxisMode::both);

// Line-delimited task corpus (one task JSON object per line).
std::vector<TaskSpec> load_task_corpus(const std::filesystem::path& path);
void save_task_corpus(const std::filesystem::path& path,
                      std::span<const TaskSpec> tasks);

}  // namespace gasp
