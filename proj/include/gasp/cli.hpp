#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gasp/config.hpp"

namespace gasp {
namespace cli {

// Entry point behind main(); also callable in-process from tests.
int dispatch(int argc, const char* const* argv);

// One seeded run end to end: builds the configured components, drives the
// orchestrator, writes events.jsonl, buffer snapshots, solve matrix and
// metrics under out_dir/seed_<seed>/. Returns the canonical log hash.
std::uint64_t execute_run(const RunConfig& config, int seed);

// All seeds of the config in order.
int run_command(const std::filesystem::path& config_path,
                std::optional<int> seed_override,
                std::optional<std::filesystem::path> out_override);

int filter_goalposts_command(const std::filesystem::path& records_path,
                             const std::filesystem::path& candidates_path,
                             const std::filesystem::path& out_dir);

int eval_passk_command(const std::filesystem::path& samples_path,
                       const std::vector<int>& ks,
                       const std::filesystem::path& out_path);

int solve_matrix_command(const std::filesystem::path& records_path,
                         const std::filesystem::path& out_dir);

int replay_command(const std::filesystem::path& events_path,
                   const std::filesystem::path& out_dir,
                   std::optional<std::filesystem::path> compare_dir);

}  // namespace cli
}  // namespace gasp
