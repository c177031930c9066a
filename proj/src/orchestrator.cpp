#include "gasp/orchestrator.hpp"

#include <algorithm>
#include <numeric>

#include "gasp/lab.hpp"

namespace gasp {

using nlohmann::json;

namespace {

std::vector<std::string> ids_of(std::span<const TaskSpec> tasks) {
    std::vector<std::string> ids;
    ids.reserve(tasks.size());
    for (const TaskSpec& t : tasks) ids.push_back(t.id);
    return ids;
}

}  // namespace

Orchestrator::Orchestrator(const RunConfig& config, OrchestratorDeps deps,
                           std::vector<TaskSpec> goalposts,
                           std::vector<TaskSpec> real_corpus, EventLog* log,
                           int seed)
    : config_(config),
      deps_(deps),
      goalposts_(std::move(goalposts)),
      real_corpus_(std::move(real_corpus)),
      log_(log),
      seed_(seed),
      rng_(Rng(static_cast<std::uint64_t>(seed)).derive("orchestrator")),
      matrix_(ids_of(goalposts_)) {
    config_.validate();
    if (goalposts_.empty()) throw ConfigError("orchestrator needs a goalpost set");
    if (config_.joint_real_data && real_corpus_.empty())
        throw ConfigError("joint_real_data is set but the real corpus is empty");
}

void Orchestrator::emit(std::string phase, std::string kind, json payload) {
    if (log_ != nullptr)
        log_->emit({step_, std::move(phase), std::move(kind), std::move(payload), ""});
}

void Orchestrator::emit_metric(const std::string& name, double value) {
    auto& series = metrics_[name];
    series.name = name;
    if (!series.points.empty() && series.points.back().first >= step_)
        throw OrchestratorError("metric '" + name + "' emitted twice at step " +
                                std::to_string(step_));
    series.points.emplace_back(step_, value);
    emit(current_phase_, "metric", {{"name", name}, {"value", value}});
}

GenerateResponse Orchestrator::generate_with_retry(PolicyHandle& policy,
                                                   const GenerateRequest& req) {
    for (int attempt = 0;; ++attempt) {
        try {
            return policy.generate(req);
        } catch (const TransportError&) {
            if (attempt >= config_.transport_retries) throw;
        }
    }
}

TrainAck Orchestrator::trainer_update(TrainPhase phase,
                                      std::span<const TrainItem> items) {
    TrainAck ack;
    try {
        for (int attempt = 0;; ++attempt) {
            try {
                ack = deps_.trainer.update(phase, items);
                break;
            } catch (const TransportError&) {
                if (attempt >= config_.transport_retries) throw;
            }
        }
    } catch (const TransportError& e) {
        throw OrchestratorError(std::string("trainer unreachable: ") + e.what());
    }
    if (!ack.ok) throw OrchestratorError("trainer rejected the update");
    double mean = 0.0;
    for (const TrainItem& it : items) mean += it.reward;
    if (!items.empty()) mean /= static_cast<double>(items.size());
    emit(current_phase_, "trainer_update",
         {{"phase", to_string(phase)},
          {"items", items.size()},
          {"mean_reward", mean},
          {"version", ack.version}});
    return ack;
}

PhaseOutcome Orchestrator::run_proposal_phase(ProposalMode mode,
                                              const RewardSpec& spec,
                                              TrainPhase train_phase,
                                              std::span<const TaskSpec> parents,
                                              OneStepVariant variant) {
    if (parents.empty())
        throw std::invalid_argument("proposal phase needs a nonempty parent set");
    spec.validate();

    const char* phase_name = mode == ProposalMode::lemma   ? "lemma"
                             : mode == ProposalMode::lift  ? "lift"
                                                           : "one_step";
    current_phase_ = phase_name;

    PhaseOutcome out;
    Rng phase_rng(rng_.next_u64());
    const int max_attempts = config_.effective_max_attempts();
    const int target = config_.valid_count_target;

    ValidityOptions validity_opts;
    validity_opts.deny_list = config_.deny_list;
    validity_opts.repeats = config_.validity_repeats;
    validity_opts.timeout_ms = config_.timeout_ms;

    EstimateOptions estimate_opts;
    estimate_opts.timeout_ms = config_.timeout_ms;
    estimate_opts.temperature = config_.train_temperature;
    estimate_opts.transport_retries = config_.transport_retries;
    estimate_opts.parallelism = config_.parallelism;

    while (static_cast<int>(out.accepted.size()) < target &&
           out.attempts_used < max_attempts) {
        ++out.attempts_used;
        const std::string proposal_id = "s" + std::to_string(step_) + "-" +
                                        phase_name + "-a" +
                                        std::to_string(out.attempts_used);

        const TaskSpec& parent = parents[phase_rng.uniform_int(parents.size())];
        GenerateRequest req;
        req.role = PolicyRole::teacher;
        req.sampling = {config_.train_temperature, phase_rng.next_u64()};

        DifficultyAxis axis = DifficultyAxis::none;
        TaskStage stage = TaskStage::lemma;
        if (mode == ProposalMode::lift) {
            // Conditioned only on the lemma; the goalpost is withheld.
            req.template_id = "lift_from_lemma";
            req.variables = {{"lemma", parent.to_json()}, {"target_peak", spec.peak}};
            axis = parent.axis;
            stage = TaskStage::lift;
        } else {
            req.template_id = mode == ProposalMode::lemma ? "lemma_from_goalpost"
                                                          : "one_step_from_goalpost";
            axis = sample_axis(phase_rng, config_.axis_mode);
            req.variables = {{"goalpost", parent.to_json()},
                             {"axis", to_string(axis)},
                             {"target_peak", spec.peak}};
            if (mode == ProposalMode::one_step)
                req.variables["variant"] =
                    variant == OneStepVariant::medium ? "medium" : "hard";
        }

        std::string text;
        try {
            text = generate_with_retry(deps_.teacher, req).text;
        } catch (const TransportError& e) {
            emit(phase_name, "rejection",
                 {{"proposal_id", proposal_id},
                  {"reason", "transport"},
                  {"detail", e.what()}});
            continue;
        }
        emit(phase_name, "proposal",
             {{"proposal_id", proposal_id},
              {"parent_id", parent.id},
              {"request", req.to_json()},
              {"response_text", text}});

        ProposalCheck check = check_proposal(text, deps_.executor, validity_opts);

        if (check.validity.kind == ValidityKind::malformed) {
            const RewardOutcome outcome = apply_format_penalty(true, std::nullopt, spec);
            emit(phase_name, "reward",
                 {{"proposal_id", proposal_id},
                  {"p", nullptr},
                  {"value", outcome.value},
                  {"region", "format_error"}});
            out.reward_batch.push_back(
                {{{"proposal_id", proposal_id},
                  {"phase", phase_name},
                  {"p", nullptr},
                  {"target_peak", spec.peak},
                  {"malformed", true}},
                 outcome.value});
            emit(phase_name, "rejection",
                 {{"proposal_id", proposal_id},
                  {"reason", "malformed"},
                  {"detail", check.validity.detail}});
            continue;
        }
        if (check.validity.kind == ValidityKind::indeterminate) {
            // Infrastructure could not certify the proposal: rejected without
            // reward so an outage cannot shape training.
            emit(phase_name, "rejection",
                 {{"proposal_id", proposal_id},
                  {"reason", "indeterminate"},
                  {"detail", check.validity.detail}});
            continue;
        }

        TaskSpec task = std::move(*check.task);
        task.id = proposal_id;
        task.stage = stage;
        task.axis = axis;
        task.parent_id = parent.id;

        EstimateResult est = estimate_pass_rate(deps_.student, task,
                                                config_.proposal_trials, phase_rng,
                                                deps_.executor, estimate_opts);
        if (!est.ok()) {
            emit(phase_name, "rejection",
                 {{"proposal_id", proposal_id},
                  {"reason", est.error == EstimateErrorKind::transport
                                 ? "estimate_transport"
                                 : "estimate_executor"},
                  {"detail", est.message}});
            continue;
        }
        const double p = est.estimate->rate;
        const RewardOutcome outcome = apply_format_penalty(false, p, spec);
        emit(phase_name, "reward",
             {{"proposal_id", proposal_id},
              {"p", p},
              {"value", outcome.value},
              {"region", outcome.region == RewardRegion::in_band ? "in_band"
                                                                 : "out_of_band"}});
        json item_payload{{"proposal_id", proposal_id},
                          {"phase", phase_name},
                          {"p", p},
                          {"target_peak", spec.peak},
                          {"stage", to_string(stage)},
                          {"parent_id", parent.id}};
        if (auto d = task_difficulty(task)) item_payload["difficulty"] = *d;
        out.reward_batch.push_back({std::move(item_payload), outcome.value});

        if (!check.validity.ok()) {
            emit(phase_name, "rejection",
                 {{"proposal_id", proposal_id},
                  {"reason", to_string(check.validity.kind)},
                  {"detail", check.validity.detail},
                  {"p", p}});
            continue;
        }
        if (outcome.region != RewardRegion::in_band) {
            emit(phase_name, "rejection",
                 {{"proposal_id", proposal_id}, {"reason", "band"}, {"p", p}});
            continue;
        }

        BufferEntry entry;
        entry.proposal_id = proposal_id;
        entry.statement_embedding = deps_.embedder.embed(task.statement);
        entry.code_embedding = deps_.embedder.embed(task.function_source);
        entry.global_step = step_;

        if (config_.novelty_filter) {
            const NoveltyVerdict nv = novelty_check(entry, buffers_,
                                                    config_.similarity_threshold,
                                                    out.accepted_entries);
            if (!nv.accepted) {
                emit(phase_name, "rejection",
                     {{"proposal_id", proposal_id},
                      {"reason", "novelty"},
                      {"max_similarity", nv.max_similarity},
                      {"offending_id", nv.offending_id ? json(*nv.offending_id) : json()},
                      {"p", p}});
                continue;
            }
        }

        emit(phase_name, "acceptance",
             {{"proposal_id", proposal_id}, {"p", p}, {"task", task.to_json()}});
        out.accepted.push_back(std::move(task));
        out.accepted_rates.push_back(p);
        out.accepted_entries.push_back(std::move(entry));
    }

    if (static_cast<int>(out.accepted.size()) < target) {
        out.exhausted = true;
        emit(phase_name, "warning",
             {{"message", "attempts exhausted; phase continues with partial buffer"},
              {"accepted", out.accepted.size()},
              {"target", target}});
    }

    trainer_update(train_phase, out.reward_batch);
    return out;
}

void Orchestrator::append_to_buffer(ProposalBuffer& buffer, const char* name,
                                    PhaseOutcome& outcome) {
    const std::vector<BufferEntry> prior = buffer.snapshot();
    const auto dis = buffer_dissimilarity(outcome.accepted_entries, prior);
    if (dis.has_value()) {
        emit_metric(std::string("buffer_dissimilarity_") + name, *dis);
    } else {
        emit(current_phase_, "warning",
             {{"message", "buffer dissimilarity undefined (empty batch or buffer)"},
              {"buffer", name}});
    }
    buffer.append(outcome.accepted_entries, step_);
    json ids = json::array();
    for (const BufferEntry& e : outcome.accepted_entries) ids.push_back(e.proposal_id);
    emit(current_phase_, "buffer_append", {{"buffer", name}, {"ids", std::move(ids)}});

    emit_metric(std::string("acceptance_rate_") + name,
                outcome.attempts_used > 0
                    ? static_cast<double>(outcome.accepted.size()) /
                          static_cast<double>(outcome.attempts_used)
                    : 0.0);
    double mean = 0.0;
    for (const TrainItem& it : outcome.reward_batch) mean += it.reward;
    if (!outcome.reward_batch.empty())
        mean /= static_cast<double>(outcome.reward_batch.size());
    emit_metric(std::string("mean_reward_") + name, mean);
}

PhaseOutcome Orchestrator::run_lemma_phase() {
    RewardSpec spec{0.5, 5.0, config_.lemma_band[0], config_.lemma_band[1]};
    PhaseOutcome out = run_proposal_phase(ProposalMode::lemma, spec,
                                          TrainPhase::lemma, goalposts_,
                                          OneStepVariant::medium);
    append_to_buffer(buffers_.lemma, "lemma", out);
    return out;
}

PhaseOutcome Orchestrator::run_lift_phase(std::span<const TaskSpec> lemma_buffer) {
    if (lemma_buffer.empty())
        throw std::invalid_argument("lift phase needs a nonempty lemma buffer");
    RewardSpec spec{0.1, 1.0, config_.lift_band[0], config_.lift_band[1]};
    PhaseOutcome out = run_proposal_phase(ProposalMode::lift, spec, TrainPhase::lift,
                                          lemma_buffer, OneStepVariant::medium);
    append_to_buffer(buffers_.lift, "lift", out);
    return out;
}

PhaseOutcome Orchestrator::run_one_step_phase(OneStepVariant variant) {
    RewardSpec spec = variant == OneStepVariant::medium ? RewardSpec::one_step_medium()
                                                        : RewardSpec::one_step_hard();
    spec.band_lo = config_.lift_band[0];
    spec.band_hi = config_.lift_band[1];
    PhaseOutcome out = run_proposal_phase(ProposalMode::one_step, spec,
                                          TrainPhase::lemma, goalposts_, variant);
    append_to_buffer(buffers_.lemma, "lemma", out);
    return out;
}

SolverReport Orchestrator::run_solver_phase(std::span<const TaskSpec> tasks) {
    if (tasks.empty())
        throw std::invalid_argument("solver phase needs a nonempty task set");
    current_phase_ = "solver";
    SolverReport report;
    Rng solver_rng(rng_.next_u64());

    EstimateOptions estimate_opts;
    estimate_opts.timeout_ms = config_.timeout_ms;
    estimate_opts.temperature = config_.train_temperature;
    estimate_opts.transport_retries = config_.transport_retries;
    estimate_opts.parallelism = config_.parallelism;

    std::vector<double> induction_rates;
    for (const TaskSpec& task : tasks) {
        Rng fmt_rng = solver_rng.derive(task.id);
        const TaskSpec formatted = randomize_format(task, fmt_rng);

        const std::uint64_t seed = solver_rng.next_u64();
        GenerateRequest req =
            make_solve_request(formatted, seed, config_.train_temperature);
        std::string text;
        try {
            text = generate_with_retry(deps_.student, req).text;
        } catch (const TransportError& e) {
            throw OrchestratorError(std::string("student unreachable in solver phase: ") +
                                    e.what());
        }
        Verdict verdict;
        try {
            verdict = verify_candidate(formatted, text, deps_.executor,
                                       config_.timeout_ms);
        } catch (const ExecutorUnavailable& e) {
            throw OrchestratorError(std::string("executor unavailable in solver phase: ") +
                                    e.what());
        }
        const double reward = verdict.passed ? 1.0 : 0.0;
        if (verdict.passed) ++report.passes;
        json payload{{"task_id", task.id},
                     {"kind", to_string(formatted.kind)},
                     {"stage", to_string(task.stage)},
                     {"passed", verdict.passed}};
        if (auto d = task_difficulty(task)) payload["difficulty"] = *d;
        emit("solver", "reward",
             {{"task_id", task.id},
              {"kind", to_string(formatted.kind)},
              {"value", reward},
              {"passed", verdict.passed}});
        report.items.push_back({std::move(payload), reward});

        // Success-rate bookkeeping runs on induction-format tasks only.
        if (formatted.kind == TaskKind::induction) {
            EstimateResult est =
                estimate_pass_rate(deps_.student, formatted, config_.solver_trials,
                                   solver_rng, deps_.executor, estimate_opts);
            if (est.ok()) induction_rates.push_back(est.estimate->rate);
        }
    }

    trainer_update(TrainPhase::solver, report.items);
    emit_metric("solver_pass_rate",
                static_cast<double>(report.passes) /
                    static_cast<double>(report.items.size()));
    if (!induction_rates.empty()) {
        report.mean_induction_rate =
            std::accumulate(induction_rates.begin(), induction_rates.end(), 0.0) /
            static_cast<double>(induction_rates.size());
        emit_metric("solver_induction_rate", report.mean_induction_rate);
    }
    return report;
}

void Orchestrator::run_real_data_batch() {
    current_phase_ = "real_data";
    Rng rd_rng(rng_.next_u64());

    std::vector<TrainItem> items;
    int passes = 0;
    for (int i = 0; i < config_.batch_size; ++i) {
        const TaskSpec& task = real_corpus_[rd_rng.uniform_int(real_corpus_.size())];
        const std::uint64_t seed = rd_rng.next_u64();
        GenerateRequest req = make_solve_request(task, seed, config_.train_temperature);
        std::string text;
        try {
            text = generate_with_retry(deps_.student, req).text;
        } catch (const TransportError& e) {
            throw OrchestratorError(std::string("student unreachable on real data: ") +
                                    e.what());
        }
        Verdict verdict;
        try {
            verdict = verify_candidate(task, text, deps_.executor, config_.timeout_ms);
        } catch (const ExecutorUnavailable& e) {
            throw OrchestratorError(std::string("executor unavailable on real data: ") +
                                    e.what());
        }
        if (verdict.passed) ++passes;
        emit("real_data", "reward",
             {{"task_id", task.id},
              {"value", verdict.passed ? 1.0 : 0.0},
              {"passed", verdict.passed}});
        json payload{{"task_id", task.id},
                     {"kind", to_string(task.kind)},
                     {"stage", "real_data"},
                     {"passed", verdict.passed}};
        if (auto d = task_difficulty(task)) payload["difficulty"] = *d;
        items.push_back({std::move(payload), verdict.passed ? 1.0 : 0.0});
    }
    trainer_update(TrainPhase::solver, items);
    emit_metric("real_data_pass_rate",
                static_cast<double>(passes) / static_cast<double>(config_.batch_size));
}

void Orchestrator::evaluate_goalposts(long checkpoint) {
    current_phase_ = "eval";
    Rng eval_rng(rng_.next_u64());

    EstimateOptions opts;
    opts.timeout_ms = config_.timeout_ms;
    opts.temperature = config_.eval_temperature;
    opts.transport_retries = config_.transport_retries;
    opts.parallelism = config_.parallelism;

    int solved_now = 0;
    for (const TaskSpec& g : goalposts_) {
        EstimateResult est = estimate_pass_rate(deps_.student, g,
                                                config_.goalpost_eval_samples,
                                                eval_rng, deps_.executor, opts);
        if (!est.ok())
            throw OrchestratorError("goalpost evaluation failed for " + g.id + ": " +
                                    est.message);
        matrix_.record(g.id, checkpoint, seed_, est.estimate->successes,
                       est.estimate->trials);
        if (est.estimate->successes > 0) ++solved_now;
        emit("eval", "solve_record",
             {{"goalpost", g.id},
              {"checkpoint", checkpoint},
              {"seed", seed_},
              {"successes", est.estimate->successes},
              {"samples", est.estimate->trials}});
    }
    emit_metric("goalpost_solved_count", static_cast<double>(solved_now));
    if (log_ != nullptr) log_->commit();
}

void Orchestrator::global_iteration() {
    const long step_before = step_;
    const std::size_t lemma_before = buffers_.lemma.size();
    const std::size_t lift_before = buffers_.lift.size();

    ++step_;
    emit("loop", "iteration_start", {});
    try {
        switch (config_.curriculum) {
            case Curriculum::two_step: {
                PhaseOutcome b0 = run_lemma_phase();
                if (b0.accepted.empty()) {
                    emit("loop", "warning",
                         {{"message", "empty lemma buffer; lift and solver skipped"}});
                    break;
                }
                PhaseOutcome b1 = run_lift_phase(b0.accepted);
                if (!b1.accepted.empty()) {
                    double mean_d = 0.0;
                    int with_d = 0;
                    for (const TaskSpec& t : b1.accepted)
                        if (auto d = task_difficulty(t)) {
                            mean_d += *d;
                            ++with_d;
                        }
                    if (with_d > 0)
                        emit_metric("accepted_lift_difficulty", mean_d / with_d);
                }
                std::vector<TaskSpec> solver_set = b0.accepted;
                solver_set.insert(solver_set.end(), b1.accepted.begin(),
                                  b1.accepted.end());
                run_solver_phase(solver_set);
                break;
            }
            case Curriculum::one_step_medium:
            case Curriculum::one_step_hard: {
                PhaseOutcome batch = run_one_step_phase(
                    config_.curriculum == Curriculum::one_step_medium
                        ? OneStepVariant::medium
                        : OneStepVariant::hard);
                if (batch.accepted.empty()) {
                    emit("loop", "warning",
                         {{"message", "empty proposal buffer; solver skipped"}});
                    break;
                }
                run_solver_phase(batch.accepted);
                break;
            }
        }
        if (config_.joint_real_data) run_real_data_batch();
        emit("loop", "iteration_end", {});
        if (log_ != nullptr) log_->commit();
    } catch (...) {
        buffers_.lemma.truncate(lemma_before);
        buffers_.lift.truncate(lift_before);
        step_ = step_before;
        for (auto it = metrics_.begin(); it != metrics_.end();) {
            auto& points = it->second.points;
            while (!points.empty() && points.back().first > step_before)
                points.pop_back();
            it = points.empty() ? metrics_.erase(it) : std::next(it);
        }
        if (log_ != nullptr) log_->discard();
        throw;
    }
}

void Orchestrator::run() {
    nlohmann::json config_json = config_.to_json();
    config_json.erase("out_dir");  // environment, not run semantics
    emit("loop", "run_start",
         {{"config", std::move(config_json)},
          {"seed", seed_},
          {"goalposts", ids_of(goalposts_)},
          {"embed_dim", deps_.embedder.dimension()}});
    if (log_ != nullptr) log_->commit();

    evaluate_goalposts(0);
    for (int i = 1; i <= config_.global_iterations; ++i) {
        global_iteration();
        if (i % config_.goalpost_eval_every == 0) evaluate_goalposts(step_);
    }

    const SolveMatrix::UniqueCounts counts = matrix_.unique_solved();
    emit("loop", "run_end",
         {{"lemma_buffer", buffers_.lemma.size()},
          {"lift_buffer", buffers_.lift.size()},
          {"union_solved", counts.union_count}});
    if (log_ != nullptr) log_->commit();
}

}  // namespace gasp
