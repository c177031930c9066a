#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

namespace gasp {

// A candidate cannot be certified hard: it has no evaluation coverage in
// some stage. The uncovered ids ride along for reporting.
struct CoverageError : std::runtime_error {
    CoverageError(std::string what, std::vector<std::string> uncovered_ids)
        : std::runtime_error(std::move(what)), uncovered(std::move(uncovered_ids)) {}
    std::vector<std::string> uncovered;
};

enum class EvalSource { rl_checkpoint, base_model, azr_checkpoint, final_rl };
const char* to_string(EvalSource s);
EvalSource eval_source_from_string(const std::string& s);

// One pass@N evaluation of one task at one checkpoint of one seeded run.
struct EvaluationRecord {
    std::string task_id;
    EvalSource source = EvalSource::rl_checkpoint;
    int seed = 0;
    long checkpoint_step = 0;
    int samples = 100;
    int successes = 0;

    nlohmann::json to_json() const;
    static EvaluationRecord from_json(const nlohmann::json& j);
};

std::vector<EvaluationRecord> load_evaluation_records(const std::filesystem::path&);

struct FilterOutcome {
    std::vector<std::string> survivors;  // zero successes in every record
    std::vector<std::string> removed;
};

// Keeps exactly the candidates with successes = 0 in every one of their
// records. A candidate with no records at all raises CoverageError.
FilterOutcome filter_stage(const std::vector<std::string>& candidates,
                           const std::vector<EvaluationRecord>& records);

struct PipelineResult {
    std::vector<std::string> goalposts;
    std::array<std::size_t, 3> removed_per_stage{};
};

// Applies the three filter stages in order, each consuming the previous
// stage's survivors.
PipelineResult build_goalpost_set(
    const std::vector<std::string>& candidates,
    const std::array<std::vector<EvaluationRecord>, 3>& stage_records);

// Groups flat records into the three pipeline stages by source:
// stage 1 = rl_checkpoint + base_model, stage 2 = azr_checkpoint,
// stage 3 = final_rl.
std::array<std::vector<EvaluationRecord>, 3> split_stages(
    const std::vector<EvaluationRecord>& records);

// goalpost x checkpoint x seed solve record; a cell is solved when the
// recorded evaluation had at least one success. Cells default unsolved and
// re-recording overwrites (intermittent solving is expected).
class SolveMatrix {
public:
    SolveMatrix() = default;
    explicit SolveMatrix(std::vector<std::string> goalpost_ids);

    void record(const std::string& goalpost, long checkpoint, int seed,
                int successes, int samples);
    bool solved(const std::string& goalpost, long checkpoint, int seed) const;

    const std::vector<std::string>& goalposts() const { return goalpost_ids_; }
    const std::set<long>& checkpoints() const { return checkpoints_; }
    const std::set<int>& seeds() const { return seeds_; }

    struct SeedlessCell {
        std::string goalpost;
        long checkpoint;
    };
    // (goalpost, checkpoint) -> solved by ANY seed.
    std::map<std::pair<std::string, long>, bool> union_across_seeds() const;

    struct UniqueCounts {
        std::map<int, int> per_seed;  // solved at any checkpoint, once per seed
        int union_count = 0;          // solved by any seed at any checkpoint
    };
    UniqueCounts unique_solved() const;

    // Dense grid (rows = goalposts, columns = checkpoints, cells 0/1) for
    // one seed, or the union across seeds when seed is nullptr.
    std::string to_csv_grid(const int* seed) const;

    nlohmann::json to_json() const;
    static SolveMatrix from_json(const nlohmann::json& j);

private:
    std::vector<std::string> goalpost_ids_;
    std::set<std::string> known_;
    std::set<long> checkpoints_;
    std::set<int> seeds_;
    std::map<std::tuple<std::string, long, int>, bool> cells_;
};

}  // namespace gasp
