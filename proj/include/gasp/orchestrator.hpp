#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "gasp/buffers.hpp"
#include "gasp/config.hpp"
#include "gasp/embedding.hpp"
#include "gasp/evaluation.hpp"
#include "gasp/events.hpp"
#include "gasp/executor.hpp"
#include "gasp/goalpost.hpp"
#include "gasp/policy.hpp"
#include "gasp/reward.hpp"
#include "gasp/task.hpp"

namespace gasp {

// A failure the loop cannot absorb (trainer gone, endpoint misbehaving
// beyond retries). The failed iteration is rolled back before this is
// thrown.
struct OrchestratorError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PhaseOutcome {
    std::vector<TaskSpec> accepted;          // local buffer, |.| <= M
    std::vector<double> accepted_rates;      // pass estimate per accepted task
    std::vector<BufferEntry> accepted_entries;
    std::vector<TrainItem> reward_batch;     // every attempt, rejected included
    int attempts_used = 0;
    bool exhausted = false;                  // attempts ran out below target
};

struct SolverReport {
    std::vector<TrainItem> items;
    int passes = 0;
    double mean_induction_rate = -1.0;  // -1 when no induction-format tasks
};

struct OrchestratorDeps {
    PolicyHandle& teacher;
    PolicyHandle& student;
    TrainerHook& trainer;
    Executor& executor;
    Embedder& embedder;
};

// Drives one seeded run: lemma phase, lift phase, solver phase per global
// iteration (or the one-step variants), goalpost pass@N evaluations on the
// configured cadence, novelty-filtered global buffers, and the event log.
class Orchestrator {
public:
    Orchestrator(const RunConfig& config, OrchestratorDeps deps,
                 std::vector<TaskSpec> goalposts, std::vector<TaskSpec> real_corpus,
                 EventLog* log, int seed);

    // Executes the configured number of global iterations, including the
    // checkpoint-0 goalpost evaluation. Throws OrchestratorError on a hard
    // failure after rolling back the iteration in flight.
    void run();

    // Individual pieces, exposed for tests and for the one-step loops.
    PhaseOutcome run_lemma_phase();
    PhaseOutcome run_lift_phase(std::span<const TaskSpec> lemma_buffer);
    PhaseOutcome run_one_step_phase(OneStepVariant variant);
    SolverReport run_solver_phase(std::span<const TaskSpec> tasks);
    void global_iteration();
    void evaluate_goalposts(long checkpoint);

    const GlobalBuffers& buffers() const { return buffers_; }
    const SolveMatrix& matrix() const { return matrix_; }
    const std::map<std::string, MetricSeries>& metrics() const { return metrics_; }
    long step() const { return step_; }

private:
    enum class ProposalMode { lemma, lift, one_step };

    PhaseOutcome run_proposal_phase(ProposalMode mode, const RewardSpec& spec,
                                    TrainPhase train_phase,
                                    std::span<const TaskSpec> parents,
                                    OneStepVariant variant);
    GenerateResponse generate_with_retry(PolicyHandle& policy,
                                         const GenerateRequest& req);
    TrainAck trainer_update(TrainPhase phase, std::span<const TrainItem> items);
    void append_to_buffer(ProposalBuffer& buffer, const char* name,
                          PhaseOutcome& outcome);
    void emit(std::string phase, std::string kind, nlohmann::json payload);
    void emit_metric(const std::string& name, double value);
    void run_real_data_batch();

    RunConfig config_;
    OrchestratorDeps deps_;
    std::vector<TaskSpec> goalposts_;
    std::vector<TaskSpec> real_corpus_;
    EventLog* log_;
    int seed_;
    Rng rng_;
    long step_ = 0;
    GlobalBuffers buffers_;
    SolveMatrix matrix_;
    std::map<std::string, MetricSeries> metrics_;
    std::string current_phase_;
};

}  // namespace gasp
