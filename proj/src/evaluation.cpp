#include "gasp/evaluation.hpp"

#include <algorithm>
#include <future>
#include <stdexcept>

namespace gasp {

using nlohmann::json;

const char* to_string(FailureKind k) {
    switch (k) {
        case FailureKind::none: return "none";
        case FailureKind::wrong_answer: return "wrong_answer";
        case FailureKind::runtime_error: return "runtime_error";
        case FailureKind::timeout: return "timeout";
    }
    return "?";
}

const char* to_string(ValidityKind k) {
    switch (k) {
        case ValidityKind::valid: return "valid";
        case ValidityKind::malformed: return "malformed";
        case ValidityKind::unsafe: return "unsafe";
        case ValidityKind::nondeterministic: return "nondeterministic";
        case ValidityKind::indeterminate: return "indeterminate";
    }
    return "?";
}

namespace {

// Binomial coefficient in 128 bits; nullopt on overflow.
std::optional<unsigned __int128> binom128(int n, int k) {
    if (k < 0 || k > n) return static_cast<unsigned __int128>(0);
    k = std::min(k, n - k);
    unsigned __int128 r = 1;
    const unsigned __int128 max = ~static_cast<unsigned __int128>(0);
    for (int i = 1; i <= k; ++i) {
        const unsigned __int128 num = static_cast<unsigned __int128>(n - k + i);
        if (r > max / num) return std::nullopt;
        r = r * num / static_cast<unsigned __int128>(i);  // divides exactly
    }
    return r;
}

Value parse_candidate_value(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (!j.is_discarded()) return j;
    // Not JSON: treat the trimmed text as a bare string value.
    auto b = text.find_first_not_of(" \t\r\n");
    auto e = text.find_last_not_of(" \t\r\n");
    if (b == std::string::npos) return Value("");
    return Value(text.substr(b, e - b + 1));
}

Verdict verdict_from_exec(const ExecResult& r) {
    if (r.status == ExecStatus::timeout) return {false, FailureKind::timeout};
    return {false, FailureKind::runtime_error};
}

}  // namespace

double pass_at_k(int n, int c, int k) {
    if (n < 1 || c < 0 || c > n) throw std::domain_error("pass_at_k: need 0 <= c <= n");
    if (k < 1 || k > n) throw std::domain_error("pass_at_k: need 1 <= k <= n");
    if (c == 0) return 0.0;
    if (n - c < k) return 1.0;
    const auto num = binom128(n - c, k);
    const auto den = binom128(n, k);
    if (num && den)
        return 1.0 - static_cast<double>(*num) / static_cast<double>(*den);
    double prod = 1.0;
    for (int i = 0; i < k; ++i)
        prod *= static_cast<double>(n - c - i) / static_cast<double>(n - i);
    return 1.0 - prod;
}

Verdict verify_candidate(const TaskSpec& task, const std::string& candidate,
                         Executor& executor, int timeout_ms) {
    if (candidate.empty()) return {false, FailureKind::wrong_answer};
    switch (task.kind) {
        case TaskKind::induction: {
            for (const Example& e : task.examples) {
                ExecResult r = executor.run({candidate, e.input, timeout_ms});
                if (!r.ok()) return verdict_from_exec(r);
                if (!values_equal(r.output, e.output))
                    return {false, FailureKind::wrong_answer};
            }
            return {true, FailureKind::none};
        }
        case TaskKind::deduction: {
            ExecResult expected =
                executor.run({task.function_source, task.examples.at(0).input, timeout_ms});
            if (!expected.ok()) return verdict_from_exec(expected);
            if (values_equal(parse_candidate_value(candidate), expected.output))
                return {true, FailureKind::none};
            return {false, FailureKind::wrong_answer};
        }
        case TaskKind::abduction: {
            ExecResult r = executor.run(
                {task.function_source, parse_candidate_value(candidate), timeout_ms});
            if (!r.ok()) return verdict_from_exec(r);
            if (values_equal(r.output, task.examples.at(0).output))
                return {true, FailureKind::none};
            return {false, FailureKind::wrong_answer};
        }
    }
    return {false, FailureKind::wrong_answer};
}

ProposalCheck check_proposal(const std::string& proposal_text, Executor& executor,
                             const ValidityOptions& opts) {
    json j = json::parse(proposal_text, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        return {{ValidityKind::malformed, "proposal is not a JSON object"}, std::nullopt};

    TaskSpec task;
    try {
        std::vector<Example> examples;
        for (const json& e : j.at("examples"))
            examples.push_back({e.at("input"), e.at("output")});
        task = make_induction_task(
            j.value("id", ""), j.at("statement").get<std::string>(),
            j.at("function_source").get<std::string>(), std::move(examples),
            j.at("public_count").get<int>(), nullptr);
        if (j.contains("metadata")) task.metadata = j["metadata"];
    } catch (const json::exception& e) {
        return {{ValidityKind::malformed, std::string("missing/bad field: ") + e.what()},
                std::nullopt};
    } catch (const StructuralError& e) {
        return {{ValidityKind::malformed, e.what()}, std::nullopt};
    }

    // From here on the task is structurally sound; it rides along with
    // non-valid verdicts so the caller can still estimate and reward it.
    const OpScan scan = scan_program_ops(task.function_source);
    if (!scan.parsed)
        return {{ValidityKind::malformed, "program does not parse"}, std::move(task)};
    for (const std::string& op : scan.ops)
        if (std::find(opts.deny_list.begin(), opts.deny_list.end(), op) !=
            opts.deny_list.end())
            return {{ValidityKind::unsafe, "program calls denied operation: " + op},
                    std::move(task)};

    const int repeats = std::max(2, opts.repeats);
    try {
        for (std::size_t i = 0; i < task.examples.size(); ++i) {
            const Example& ex = task.examples[i];
            std::optional<Value> first;
            for (int r = 0; r < repeats; ++r) {
                ExecResult res =
                    executor.run({task.function_source, ex.input, opts.timeout_ms});
                if (!res.ok())
                    return {{ValidityKind::malformed,
                             "example " + std::to_string(i) + " execution failed: " +
                                 (res.status == ExecStatus::timeout ? "timeout" : res.message)},
                            std::move(task)};
                if (!first) {
                    first = res.output;
                } else if (!values_equal(*first, res.output)) {
                    return {{ValidityKind::nondeterministic,
                             "example " + std::to_string(i) +
                                 " differs across repeated runs"},
                            std::move(task)};
                }
            }
            if (!values_equal(*first, ex.output))
                return {{ValidityKind::malformed,
                         "example " + std::to_string(i) + " disagrees with the program"},
                        std::move(task)};
        }
    } catch (const ExecutorUnavailable& e) {
        return {{ValidityKind::indeterminate, e.what()}, std::move(task)};
    }
    return {{ValidityKind::valid, ""}, std::move(task)};
}

Validity check_validity(const std::string& proposal_text, Executor& executor,
                        int repeats, const ValidityOptions& opts) {
    ValidityOptions o = opts;
    o.repeats = repeats;
    return check_proposal(proposal_text, executor, o).validity;
}

GenerateRequest make_solve_request(const TaskSpec& task, std::uint64_t seed,
                                   double temperature) {
    GenerateRequest req;
    req.role = PolicyRole::student;
    req.template_id = std::string("solve_") + to_string(task.kind);
    req.variables = {{"task", task.solver_view()}};
    if (task.metadata.contains("lab")) {
        // Scripted-student side channel: the lab block plus the answer key of
        // the exposed example. Prompt templates never interpolate it.
        req.variables["lab"] = task.metadata["lab"];
        if (!task.examples.empty())
            req.variables["lab"]["example"] = {{"input", task.examples.front().input},
                                               {"output", task.examples.front().output}};
    }
    req.sampling = {temperature, seed};
    return req;
}

EstimateResult estimate_pass_rate(PolicyHandle& student, const TaskSpec& task,
                                  int n_trials, Rng& rng, Executor& executor,
                                  const EstimateOptions& opts) {
    if (n_trials < 1) throw std::invalid_argument("estimate_pass_rate: N must be >= 1");

    const Rng base = Rng(rng.next_u64()).derive(task.id);

    enum class TrialOutcome { pass, fail, infra, transport };
    auto run_trial = [&](int i) -> TrialOutcome {
        const std::uint64_t seed = Rng(base).derive(static_cast<std::uint64_t>(i)).next_u64();
        GenerateRequest req = make_solve_request(task, seed, opts.temperature);
        GenerateResponse resp;
        bool sent = false;
        for (int attempt = 0; attempt <= opts.transport_retries && !sent; ++attempt) {
            try {
                resp = student.generate(req);
                sent = true;
            } catch (const TransportError&) {
                if (attempt == opts.transport_retries) return TrialOutcome::transport;
            }
        }
        try {
            Verdict v = verify_candidate(task, resp.text, executor, opts.timeout_ms);
            return v.passed ? TrialOutcome::pass : TrialOutcome::fail;
        } catch (const ExecutorUnavailable&) {
            return TrialOutcome::infra;
        }
    };

    std::vector<TrialOutcome> outcomes(n_trials);
    const bool parallel_ok =
        opts.parallelism > 1 && student.concurrent_safe() && executor.concurrent_safe();
    if (parallel_ok) {
        const int width = std::min(opts.parallelism, n_trials);
        std::vector<std::future<void>> workers;
        std::atomic<int> next{0};
        for (int w = 0; w < width; ++w) {
            workers.push_back(std::async(std::launch::async, [&] {
                for (int i = next.fetch_add(1); i < n_trials; i = next.fetch_add(1))
                    outcomes[i] = run_trial(i);
            }));
        }
        for (auto& f : workers) f.get();
    } else {
        for (int i = 0; i < n_trials; ++i) outcomes[i] = run_trial(i);
    }

    int passes = 0, completed = 0;
    for (TrialOutcome o : outcomes) {
        if (o == TrialOutcome::transport)
            return {std::nullopt, EstimateErrorKind::transport,
                    "student endpoint unreachable"};
        if (o == TrialOutcome::infra) continue;
        ++completed;
        if (o == TrialOutcome::pass) ++passes;
    }
    if (completed == 0)
        return {std::nullopt, EstimateErrorKind::executor,
                "executor failed on every trial"};
    PassEstimate est{task.id, completed, passes,
                     static_cast<double>(passes) / static_cast<double>(completed)};
    return {est, EstimateErrorKind::none, ""};
}

}  // namespace gasp
