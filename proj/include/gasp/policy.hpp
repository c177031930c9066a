#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>

#include <json.hpp>

namespace gasp {

// A policy endpoint could not be reached; attempts hitting this are retried
// a bounded number of times and then consumed.
struct TransportError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class PolicyRole { teacher, student };
const char* to_string(PolicyRole r);

struct SamplingParams {
    double temperature = 1.0;
    std::uint64_t seed = 0;
};

// Wire contract v1: {version, role, template_id, variables, sampling}.
// Template ids used by the loop: lemma_from_goalpost (variables: goalpost,
// axis), lift_from_lemma (variables: lemma), solve_task (variables: task,
// lab). Lift requests never carry the goalpost.
struct GenerateRequest {
    PolicyRole role = PolicyRole::teacher;
    std::string template_id;
    nlohmann::json variables;
    SamplingParams sampling;

    nlohmann::json to_json() const;
};

struct GenerateResponse {
    std::string text;
};

class PolicyHandle {
public:
    virtual ~PolicyHandle() = default;
    virtual GenerateResponse generate(const GenerateRequest& req) = 0;
    virtual bool concurrent_safe() const { return false; }
};

enum class TrainPhase { lemma, lift, solver };
const char* to_string(TrainPhase p);

struct TrainItem {
    nlohmann::json payload;
    double reward = 0.0;
};

struct TrainAck {
    bool ok = false;
    std::string version;
};

// Receives one reward batch per rejection-sampling step per phase. The
// batch contains every attempted proposal, rejected ones included.
class TrainerHook {
public:
    virtual ~TrainerHook() = default;
    virtual TrainAck update(TrainPhase phase, std::span<const TrainItem> items) = 0;
};

// For frozen-policy runs: acknowledges everything, trains nothing.
class NullTrainer final : public TrainerHook {
public:
    TrainAck update(TrainPhase, std::span<const TrainItem>) override {
        return {true, "null-1"};
    }
};

}  // namespace gasp
