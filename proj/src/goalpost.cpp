#include "gasp/goalpost.hpp"

#include <fstream>
#include <sstream>
#include <unordered_map>

namespace gasp {

using nlohmann::json;

const char* to_string(EvalSource s) {
    switch (s) {
        case EvalSource::rl_checkpoint: return "rl_checkpoint";
        case EvalSource::base_model: return "base_model";
        case EvalSource::azr_checkpoint: return "azr_checkpoint";
        case EvalSource::final_rl: return "final_rl";
    }
    return "?";
}

EvalSource eval_source_from_string(const std::string& s) {
    if (s == "rl_checkpoint") return EvalSource::rl_checkpoint;
    if (s == "base_model") return EvalSource::base_model;
    if (s == "azr_checkpoint") return EvalSource::azr_checkpoint;
    if (s == "final_rl") return EvalSource::final_rl;
    throw std::invalid_argument("unknown evaluation source: " + s);
}

json EvaluationRecord::to_json() const {
    return {{"task_id", task_id}, {"source", to_string(source)},
            {"seed", seed},       {"checkpoint_step", checkpoint_step},
            {"samples", samples}, {"successes", successes}};
}

EvaluationRecord EvaluationRecord::from_json(const json& j) {
    EvaluationRecord r;
    r.task_id = j.at("task_id").get<std::string>();
    r.source = eval_source_from_string(j.at("source").get<std::string>());
    r.seed = j.at("seed").get<int>();
    r.checkpoint_step = j.at("checkpoint_step").get<long>();
    r.samples = j.at("samples").get<int>();
    r.successes = j.at("successes").get<int>();
    if (r.successes > r.samples)
        throw std::invalid_argument("record for " + r.task_id +
                                    " has successes > samples");
    return r;
}

std::vector<EvaluationRecord> load_evaluation_records(
    const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open records: " + path.string());
    std::vector<EvaluationRecord> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        out.push_back(EvaluationRecord::from_json(json::parse(line)));
    }
    return out;
}

FilterOutcome filter_stage(const std::vector<std::string>& candidates,
                           const std::vector<EvaluationRecord>& records) {
    std::unordered_map<std::string, std::pair<bool, bool>> seen;  // covered, any_success
    for (const EvaluationRecord& r : records) {
        auto& s = seen[r.task_id];
        s.first = true;
        if (r.successes > 0) s.second = true;
    }
    std::vector<std::string> uncovered;
    for (const std::string& c : candidates) {
        auto it = seen.find(c);
        if (it == seen.end() || !it->second.first) uncovered.push_back(c);
    }
    if (!uncovered.empty())
        throw CoverageError("candidates without evaluation coverage: " +
                                std::to_string(uncovered.size()),
                            std::move(uncovered));
    FilterOutcome out;
    for (const std::string& c : candidates) {
        if (seen.at(c).second)
            out.removed.push_back(c);
        else
            out.survivors.push_back(c);
    }
    return out;
}

PipelineResult build_goalpost_set(
    const std::vector<std::string>& candidates,
    const std::array<std::vector<EvaluationRecord>, 3>& stage_records) {
    PipelineResult result;
    std::vector<std::string> current = candidates;
    for (std::size_t s = 0; s < 3; ++s) {
        FilterOutcome o = filter_stage(current, stage_records[s]);
        result.removed_per_stage[s] = o.removed.size();
        current = std::move(o.survivors);
    }
    result.goalposts = std::move(current);
    return result;
}

std::array<std::vector<EvaluationRecord>, 3> split_stages(
    const std::vector<EvaluationRecord>& records) {
    std::array<std::vector<EvaluationRecord>, 3> stages;
    for (const EvaluationRecord& r : records) {
        switch (r.source) {
            case EvalSource::rl_checkpoint:
            case EvalSource::base_model: stages[0].push_back(r); break;
            case EvalSource::azr_checkpoint: stages[1].push_back(r); break;
            case EvalSource::final_rl: stages[2].push_back(r); break;
        }
    }
    return stages;
}

SolveMatrix::SolveMatrix(std::vector<std::string> goalpost_ids)
    : goalpost_ids_(std::move(goalpost_ids)),
      known_(goalpost_ids_.begin(), goalpost_ids_.end()) {}

void SolveMatrix::record(const std::string& goalpost, long checkpoint, int seed,
                         int successes, int samples) {
    if (!known_.count(goalpost))
        throw std::domain_error("unknown goalpost: " + goalpost);
    if (samples < 1) throw std::domain_error("record needs samples >= 1");
    if (successes < 0 || successes > samples)
        throw std::domain_error("record needs 0 <= successes <= samples");
    checkpoints_.insert(checkpoint);
    seeds_.insert(seed);
    cells_[{goalpost, checkpoint, seed}] = successes > 0;
}

bool SolveMatrix::solved(const std::string& goalpost, long checkpoint,
                         int seed) const {
    auto it = cells_.find({goalpost, checkpoint, seed});
    return it != cells_.end() && it->second;
}

std::map<std::pair<std::string, long>, bool> SolveMatrix::union_across_seeds()
    const {
    std::map<std::pair<std::string, long>, bool> out;
    for (const std::string& g : goalpost_ids_)
        for (long t : checkpoints_) {
            bool any = false;
            for (int s : seeds_)
                if (solved(g, t, s)) {
                    any = true;
                    break;
                }
            out[{g, t}] = any;
        }
    return out;
}

SolveMatrix::UniqueCounts SolveMatrix::unique_solved() const {
    UniqueCounts counts;
    for (int s : seeds_) counts.per_seed[s] = 0;
    for (const std::string& g : goalpost_ids_) {
        bool any_seed = false;
        for (int s : seeds_) {
            bool this_seed = false;
            for (long t : checkpoints_)
                if (solved(g, t, s)) {
                    this_seed = true;
                    break;
                }
            if (this_seed) {
                ++counts.per_seed[s];
                any_seed = true;
            }
        }
        if (any_seed) ++counts.union_count;
    }
    return counts;
}

std::string SolveMatrix::to_csv_grid(const int* seed) const {
    std::ostringstream out;
    out << "goalpost";
    for (long t : checkpoints_) out << ',' << t;
    out << '\n';
    for (const std::string& g : goalpost_ids_) {
        out << g;
        for (long t : checkpoints_) {
            bool v = false;
            if (seed != nullptr) {
                v = solved(g, t, *seed);
            } else {
                for (int s : seeds_)
                    if (solved(g, t, s)) {
                        v = true;
                        break;
                    }
            }
            out << ',' << (v ? 1 : 0);
        }
        out << '\n';
    }
    return out.str();
}

json SolveMatrix::to_json() const {
    json cells = json::array();
    for (const auto& [key, v] : cells_) {
        const auto& [g, t, s] = key;
        cells.push_back({{"goalpost", g}, {"checkpoint", t}, {"seed", s}, {"solved", v}});
    }
    return {{"goalposts", goalpost_ids_}, {"cells", std::move(cells)}};
}

SolveMatrix SolveMatrix::from_json(const json& j) {
    SolveMatrix m(j.at("goalposts").get<std::vector<std::string>>());
    for (const json& c : j.at("cells")) {
        m.checkpoints_.insert(c.at("checkpoint").get<long>());
        m.seeds_.insert(c.at("seed").get<int>());
        m.cells_[{c.at("goalpost").get<std::string>(), c.at("checkpoint").get<long>(),
                  c.at("seed").get<int>()}] = c.at("solved").get<bool>();
    }
    return m;
}

}  // namespace gasp
