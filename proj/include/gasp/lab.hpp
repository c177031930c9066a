#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "gasp/config.hpp"
#include "gasp/executor.hpp"
#include "gasp/policy.hpp"
#include "gasp/rng.hpp"
#include "gasp/task.hpp"

namespace gasp {

struct SkillState {
    double skill = 0.0;
    std::vector<std::pair<long, double>> history;  // (update index, skill)
};

double logistic(double x);

// Pass/fail draw for a scripted attempt: success probability
// sigma(steepness * (skill - difficulty)).
bool scripted_student_attempt(double skill, double difficulty, double steepness,
                              Rng& rng);

// Scalar-difficulty task generator: the f component sets the operator-chain
// depth, the io component sets the input schema (scalar vs list length), and
// the statement/program carry enough varied tokens that distinct proposals
// embed apart while duplicates embed identically.
struct SynthesisParams {
    std::string id;
    TaskStage stage = TaskStage::lemma;
    DifficultyAxis axis = DifficultyAxis::none;
    double d_f = 1.0;
    double d_io = 1.0;
    std::optional<std::string> parent_id;
};
TaskSpec synthesize_task(const SynthesisParams& params, Rng& rng, Executor& executor);

// Difficulty encoded in task metadata by the lab; nullopt for real tasks.
std::optional<double> task_difficulty(const TaskSpec& task);

// Scripted trainer core. Solver batches raise skill by eta per positive
// reward earned near the boundary (|difficulty - skill| <= margin); far-away
// or failed items carry no signal. Teacher batches steer the difficulty
// estimate toward observed pass rates.
void scripted_trainer_update(SkillState& skill, double& teacher_estimate,
                             TrainPhase phase, std::span<const TrainItem> items,
                             const LabScenario& scenario);

// Deterministic scripted teacher/student/trainer sharing one scenario state.
// Policy draws depend only on (state, request seed); the teacher keeps a
// memory of emitted proposals to inject duplicates at the configured rate.
class SyntheticLab {
public:
    SyntheticLab(LabScenario scenario, std::uint64_t seed);
    ~SyntheticLab();

    PolicyHandle& teacher();
    PolicyHandle& student();
    TrainerHook& trainer();

    double skill() const;
    double teacher_estimate() const;
    const SkillState& skill_state() const;

    std::vector<TaskSpec> make_goalposts();
    std::vector<TaskSpec> make_real_corpus();

    const LabScenario& scenario() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Test double with a fixed success probability, independent of any task.
class FixedProbabilityStudent final : public PolicyHandle {
public:
    FixedProbabilityStudent(double success_prob, std::string correct,
                            std::string wrong)
        : prob_(success_prob), correct_(std::move(correct)), wrong_(std::move(wrong)) {}

    GenerateResponse generate(const GenerateRequest& req) override {
        Rng rng(req.sampling.seed);
        return {rng.bernoulli(prob_) ? correct_ : wrong_};
    }
    bool concurrent_safe() const override { return true; }

private:
    double prob_;
    std::string correct_;
    std::string wrong_;
};

}  // namespace gasp
