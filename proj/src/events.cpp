#include "gasp/events.hpp"

#include <chrono>

#include "gasp/rng.hpp"
#include "gasp/task.hpp"

namespace gasp {

using nlohmann::json;

json RunEvent::to_json() const {
    return {{"step", step}, {"phase", phase}, {"kind", kind},
            {"payload", payload}, {"ts", ts}};
}

RunEvent RunEvent::from_json(const json& j) {
    RunEvent e;
    e.step = j.at("step").get<long>();
    e.phase = j.at("phase").get<std::string>();
    e.kind = j.at("kind").get<std::string>();
    e.payload = j.at("payload");
    e.ts = j.value("ts", "");
    return e;
}

EventLog::EventLog(std::filesystem::path path) : path_(std::move(path)) {
    out_.open(path_, std::ios::trunc);
    if (!out_) throw std::runtime_error("cannot open event log: " + path_.string());
}

void EventLog::emit(RunEvent e) {
    const auto now = std::chrono::system_clock::now();
    e.ts = std::to_string(
        std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch())
            .count());
    pending_.push_back(std::move(e));
}

void EventLog::commit() {
    for (const RunEvent& e : pending_) out_ << e.to_json().dump() << '\n';
    pending_.clear();
    out_.flush();
}

void EventLog::discard() { pending_.clear(); }

std::vector<RunEvent> read_event_log(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open event log: " + path.string());
    std::vector<RunEvent> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        out.push_back(RunEvent::from_json(json::parse(line)));
    }
    return out;
}

std::uint64_t canonical_log_hash(const std::filesystem::path& path) {
    std::string canon;
    for (const RunEvent& e : read_event_log(path)) {
        json j = e.to_json();
        j.erase("ts");
        canon += j.dump();
        canon += '\n';
    }
    return fnv1a64(canon);
}

ReplayState replay_events(const std::vector<RunEvent>& events, Embedder& embedder) {
    ReplayState state;
    std::vector<std::string> goalposts;
    // Accepted tasks keyed by id, waiting for their phase-end buffer_append.
    std::map<std::string, json> accepted;

    for (const RunEvent& e : events) {
        if (e.kind == "run_start") {
            if (e.payload.contains("goalposts"))
                goalposts = e.payload["goalposts"].get<std::vector<std::string>>();
            state.matrix = SolveMatrix(goalposts);
        } else if (e.kind == "acceptance") {
            accepted[e.payload.at("proposal_id").get<std::string>()] =
                e.payload.at("task");
        } else if (e.kind == "buffer_append") {
            auto& target = e.payload.at("buffer").get<std::string>() == "lift"
                               ? state.lift_buffer
                               : state.lemma_buffer;
            for (const json& id_j : e.payload.at("ids")) {
                const std::string id = id_j.get<std::string>();
                const json& t = accepted.at(id);
                BufferEntry entry;
                entry.proposal_id = id;
                entry.statement_embedding =
                    embedder.embed(t.at("statement").get<std::string>());
                entry.code_embedding =
                    embedder.embed(t.at("function_source").get<std::string>());
                entry.global_step = e.step;
                target.push_back(std::move(entry));
            }
        } else if (e.kind == "solve_record") {
            state.matrix.record(e.payload.at("goalpost").get<std::string>(),
                                e.payload.at("checkpoint").get<long>(),
                                e.payload.at("seed").get<int>(),
                                e.payload.at("successes").get<int>(),
                                e.payload.at("samples").get<int>());
        } else if (e.kind == "metric") {
            const std::string name = e.payload.at("name").get<std::string>();
            auto& series = state.metrics[name];
            series.name = name;
            series.points.emplace_back(e.step, e.payload.at("value").get<double>());
        }
    }
    return state;
}

}  // namespace gasp
