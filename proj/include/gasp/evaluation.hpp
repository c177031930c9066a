#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gasp/executor.hpp"
#include "gasp/policy.hpp"
#include "gasp/rng.hpp"
#include "gasp/task.hpp"

namespace gasp {

struct PassEstimate {
    std::string task_id;
    int trials = 0;
    int successes = 0;
    double rate = 0.0;  // successes / trials, exactly
};

enum class FailureKind { none, wrong_answer, runtime_error, timeout };
const char* to_string(FailureKind k);

struct Verdict {
    bool passed = false;
    FailureKind failure = FailureKind::none;
};

enum class ValidityKind { valid, malformed, unsafe, nondeterministic, indeterminate };
const char* to_string(ValidityKind k);

struct Validity {
    ValidityKind kind = ValidityKind::valid;
    std::string detail;
    bool ok() const { return kind == ValidityKind::valid; }
};

// Distinguishes infrastructure failures from a genuine zero pass count: a
// transport outage must not masquerade as a hard question.
enum class EstimateErrorKind { none, transport, executor };

struct EstimateResult {
    std::optional<PassEstimate> estimate;
    EstimateErrorKind error = EstimateErrorKind::none;
    std::string message;
    bool ok() const { return error == EstimateErrorKind::none && estimate.has_value(); }
};

// Unbiased pass@k: 1 - C(n-c, k)/C(n, k). Exact 128-bit binomials where they
// fit, overflow-safe running product otherwise. k > n or c > n is a domain
// error.
double pass_at_k(int n, int c, int k);

// Runs the candidate against the task's full test surface. Induction:
// candidate is a program that must reproduce every example (public and
// private). Deduction: candidate value must equal program(exposed input).
// Abduction: program(candidate) must equal the exposed output; any
// consistent input passes. Every execution is bounded by timeout_ms.
Verdict verify_candidate(const TaskSpec& task, const std::string& candidate,
                         Executor& executor, int timeout_ms = 2000);

struct ValidityOptions {
    std::vector<std::string> deny_list{"rand", "read_file", "write_file",
                                       "net_get", "system"};
    int repeats = 2;  // executions per example for the determinism check
    int timeout_ms = 2000;
};

// Rejection-sampling validity gate over a raw teacher proposal:
// unparseable/structurally broken/inconsistent -> malformed; program calls a
// deny-listed operation -> unsafe; identical inputs give differing outputs
// across repeated runs -> nondeterministic. Executor infrastructure failure
// yields indeterminate (rejected conservatively, logged distinctly).
struct ProposalCheck {
    Validity validity;
    std::optional<TaskSpec> task;  // present when structurally sound
};
ProposalCheck check_proposal(const std::string& proposal_text, Executor& executor,
                             const ValidityOptions& opts = {});

// Spec-shaped wrapper when only the verdict is needed.
Validity check_validity(const std::string& proposal_text, Executor& executor,
                        int repeats, const ValidityOptions& opts = {});

struct EstimateOptions {
    int timeout_ms = 2000;
    double temperature = 1.0;
    int transport_retries = 2;
    int parallelism = 1;
};

// N independent solver attempts, each verified against the full test
// surface. Per-trial seeds derive from (rng, task id, trial index), so the
// count is reproducible and order-independent under concurrency.
EstimateResult estimate_pass_rate(PolicyHandle& student, const TaskSpec& task,
                                  int n_trials, Rng& rng, Executor& executor,
                                  const EstimateOptions& opts = {});

// The solve request sent for one attempt (exposed for tests and logging).
GenerateRequest make_solve_request(const TaskSpec& task, std::uint64_t seed,
                                   double temperature);

}  // namespace gasp
