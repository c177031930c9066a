#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "gasp/buffers.hpp"
#include "gasp/embedding.hpp"
#include "gasp/goalpost.hpp"

namespace gasp {

// Append-only run journal. Events are totally ordered per run; replaying
// them reconstructs buffers and solve matrices exactly. Kinds: run_start,
// iteration_start, proposal, acceptance, rejection, reward, trainer_update,
// buffer_append, solve_record, metric, warning, iteration_end, run_end.
struct RunEvent {
    long step = 0;
    std::string phase;
    std::string kind;
    nlohmann::json payload;
    std::string ts;  // wall clock; excluded from canonical hashing

    nlohmann::json to_json() const;
    static RunEvent from_json(const nlohmann::json& j);
};

// Single-writer JSONL log. Events buffer in memory and hit disk when the
// iteration commits, so a rolled-back iteration leaves no trace on disk.
class EventLog {
public:
    explicit EventLog(std::filesystem::path path);

    void emit(RunEvent e);
    void commit();   // flush buffered events
    void discard();  // drop buffered events (iteration rollback)

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
    std::ofstream out_;
    std::vector<RunEvent> pending_;
};

std::vector<RunEvent> read_event_log(const std::filesystem::path& path);

// FNV-1a over the log with timestamp fields stripped; byte-stable across
// identically seeded runs.
std::uint64_t canonical_log_hash(const std::filesystem::path& path);

struct MetricSeries {
    std::string name;
    std::vector<std::pair<long, double>> points;  // steps strictly increasing
};

// Terminal state rebuilt purely from events.
struct ReplayState {
    std::vector<BufferEntry> lemma_buffer;
    std::vector<BufferEntry> lift_buffer;
    SolveMatrix matrix;
    std::map<std::string, MetricSeries> metrics;
};

// Embeddings are recomputed from the accepted task text with the same
// embedder the run used, so replayed entries match live entries bit for bit.
ReplayState replay_events(const std::vector<RunEvent>& events, Embedder& embedder);

}  // namespace gasp
