#pragma once

#include <atomic>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace gasp {

// Task inputs/outputs and candidate answers. Numbers, strings and nested
// arrays are enough for the synthetic lab and the corpus schema.
using Value = nlohmann::json;

// Numeric-aware equality: 4 and 4.0 compare equal, arrays elementwise.
bool values_equal(const Value& a, const Value& b);

struct ExecRequest {
    std::string program;
    Value input;
    int timeout_ms = 2000;
};

enum class ExecStatus { ok, error, timeout };

struct ExecResult {
    ExecStatus status = ExecStatus::error;
    Value output;
    std::string message;
    bool ok() const { return status == ExecStatus::ok; }
};

// Raised when the executor infrastructure itself is unreachable (transport
// down, process gone) as opposed to the submitted program failing.
struct ExecutorUnavailable : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class Executor {
public:
    virtual ~Executor() = default;
    virtual ExecResult run(const ExecRequest& req) = 0;
    virtual bool concurrent_safe() const { return false; }
};

// Deterministic interpreter for a small prefix expression language over
// numbers and lists. Programs are s-expressions with the input bound to `x`:
//
//   (+ (* x 3) 7)          scalar arithmetic
//   (sum (tail x))         list ops: len sum prod head tail reverse sortl
//                                    concat nth range
//   (if (> x 0) x (neg x)) comparisons return 0/1
//   (repeat n e)           evaluates e n times; used to burn time
//   (clock)                per-execution counter, differs across runs
//   (rand)                 counter-derived value; on the default deny-list
//
// Execution is bounded by a step budget and a wall-clock deadline.
class ExprExecutor final : public Executor {
public:
    struct Options {
        std::uint64_t max_steps = 50'000'000;
    };

    ExprExecutor() = default;
    explicit ExprExecutor(Options opts) : opts_(opts) {}

    ExecResult run(const ExecRequest& req) override;
    bool concurrent_safe() const override { return true; }

private:
    Options opts_;
    std::atomic<std::uint64_t> run_counter_{0};
};

// Distinct op names referenced by a program; parse failures yield an empty
// list plus ok=false. Used for the static deny-list scan.
struct OpScan {
    bool parsed = false;
    std::vector<std::string> ops;
};
OpScan scan_program_ops(const std::string& program);

}  // namespace gasp
