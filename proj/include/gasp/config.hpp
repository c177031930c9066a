#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gasp/task.hpp"

namespace gasp {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Curriculum { two_step, one_step_medium, one_step_hard };
const char* to_string(Curriculum c);
Curriculum curriculum_from_string(const std::string& s);

// Where a pluggable component lives. kind: "scripted" (synthetic lab),
// "http" (remote endpoint), or "null" (trainer only).
struct EndpointConfig {
    std::string kind = "scripted";
    std::string url;
    std::string version = "v1";
};

// Scripted-lab scenario: a scalar-difficulty stand-in for real policies,
// with a logistic pass model sigma(steepness * (skill - difficulty)).
struct LabScenario {
    double initial_skill = 0.5;
    double initial_teacher_estimate = 0.5;
    double steepness = 4.0;
    double eta = 0.05;            // trainer skill gain per solver pass
    double estimate_gain = 0.8;   // teacher estimate tracking rate
    double boundary_margin = 2.0; // passes farther than this from skill do not train
    double lemma_noise = 0.25;
    double lift_increment = 0.35;
    double malformed_rate = 0.05;
    double duplicate_rate = 0.10;
    std::vector<double> goalpost_difficulties{6.0, 6.5, 7.0};
    int real_data_count = 32;
    double real_data_lo = 0.5;
    double real_data_hi = 8.0;
};

// Every loop constant in one place. Defaults mirror the reference run.
struct RunConfig {
    int valid_count_target = 8;          // M
    int proposal_trials = 10;            // N for teacher-phase pass estimation
    int solver_trials = 10;              // N for solver-phase bookkeeping
    std::array<double, 2> lemma_band{0.3, 0.7};
    std::array<double, 2> lift_band{0.1, 0.5};
    double similarity_threshold = 0.95;
    bool novelty_filter = true;
    int max_attempts = 0;                // 0 -> 16 * M
    int global_iterations = 10;
    std::vector<int> seeds{7};
    AxisMode axis_mode = AxisMode::both;
    Curriculum curriculum = Curriculum::two_step;
    bool joint_real_data = false;
    int batch_size = 64;
    int goalpost_eval_samples = 100;
    int goalpost_eval_every = 2;
    int timeout_ms = 2000;
    int validity_repeats = 2;
    int parallelism = 1;
    int transport_retries = 2;
    double train_temperature = 1.0;
    double eval_temperature = 0.6;
    int embed_dim = 256;
    std::vector<std::string> deny_list{"rand", "read_file", "write_file",
                                       "net_get", "system"};

    EndpointConfig policy;
    EndpointConfig trainer{"null", "", "v1"};
    EndpointConfig executor;
    EndpointConfig embedder;

    LabScenario lab;

    std::filesystem::path out_dir = "runs/out";
    std::optional<std::filesystem::path> goalposts_path;   // task corpus JSONL
    std::optional<std::filesystem::path> real_data_path;   // task corpus JSONL
    std::optional<std::filesystem::path> templates_path;

    int effective_max_attempts() const {
        return max_attempts > 0 ? max_attempts : 16 * valid_count_target;
    }

    // Throws ConfigError with a diagnostic before any execution.
    void validate() const;

    nlohmann::json to_json() const;
    static RunConfig from_json(const nlohmann::json& j);
    static RunConfig load(const std::filesystem::path& path);
};

}  // namespace gasp
