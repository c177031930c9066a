#include "gasp/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "gasp/embedding.hpp"
#include "gasp/evaluation.hpp"
#include "gasp/events.hpp"
#include "gasp/http.hpp"
#include "gasp/lab.hpp"
#include "gasp/orchestrator.hpp"

namespace gasp {
namespace cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void write_metrics_csv(const fs::path& path,
                       const std::map<std::string, MetricSeries>& metrics) {
    std::ofstream out(path);
    out << "name,step,value\n";
    for (const auto& [name, series] : metrics)
        for (const auto& [step, value] : series.points)
            out << name << ',' << step << ',' << json(value).dump() << '\n';
}

void write_buffer_entries(const fs::path& path,
                          const std::vector<BufferEntry>& entries) {
    std::ofstream out(path);
    for (const BufferEntry& e : entries) out << e.to_json().dump() << '\n';
}

json counts_to_json(const SolveMatrix::UniqueCounts& counts) {
    json per_seed = json::object();
    for (const auto& [seed, n] : counts.per_seed)
        per_seed[std::to_string(seed)] = n;
    return {{"per_seed", std::move(per_seed)}, {"union", counts.union_count}};
}

std::vector<std::string> read_candidate_ids(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open candidates: " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string content = buffer.str();
    json j = json::parse(content, nullptr, false);
    if (!j.is_discarded() && j.is_array())
        return j.get<std::vector<std::string>>();
    std::vector<std::string> ids;
    std::istringstream lines(content);
    std::string line;
    while (std::getline(lines, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' '))
            line.pop_back();
        if (!line.empty()) ids.push_back(line);
    }
    return ids;
}

}  // namespace

namespace {

// Endpoint URLs can be swapped at launch without editing the config file.
std::string env_url(const char* name, const std::string& fallback) {
    const char* v = std::getenv(name);
    return v != nullptr && *v != '\0' ? v : fallback;
}

}  // namespace

std::uint64_t execute_run(const RunConfig& base_config, int seed) {
    RunConfig config = base_config;
    config.policy.url = env_url("GASP_POLICY_URL", config.policy.url);
    config.trainer.url = env_url("GASP_TRAINER_URL", config.trainer.url);
    config.executor.url = env_url("GASP_EXECUTOR_URL", config.executor.url);
    config.embedder.url = env_url("GASP_EMBEDDER_URL", config.embedder.url);
    const std::string bearer = gasp_bearer_from_env();

    const fs::path dir = config.out_dir / ("seed_" + std::to_string(seed));
    fs::create_directories(dir);

    std::unique_ptr<SyntheticLab> lab;
    if (config.policy.kind == "scripted" || config.trainer.kind == "scripted")
        lab = std::make_unique<SyntheticLab>(config.lab,
                                             static_cast<std::uint64_t>(seed));

    std::shared_ptr<TemplateSet> templates;
    if (config.templates_path)
        templates = std::make_shared<TemplateSet>(TemplateSet::load(*config.templates_path));
    else
        templates = std::make_shared<TemplateSet>(TemplateSet::builtin_defaults());

    std::unique_ptr<HttpPolicyClient> http_policy;
    PolicyHandle* teacher = nullptr;
    PolicyHandle* student = nullptr;
    if (config.policy.kind == "http") {
        http_policy = std::make_unique<HttpPolicyClient>(config.policy.url,
                                                         config.policy.version,
                                                         templates, 30000, bearer);
        teacher = http_policy.get();
        student = http_policy.get();
    } else {
        teacher = &lab->teacher();
        student = &lab->student();
    }

    std::unique_ptr<TrainerHook> owned_trainer;
    TrainerHook* trainer = nullptr;
    if (config.trainer.kind == "http") {
        owned_trainer = std::make_unique<HttpTrainerClient>(config.trainer.url,
                                                            config.trainer.version,
                                                            30000, bearer);
        trainer = owned_trainer.get();
    } else if (config.trainer.kind == "null") {
        owned_trainer = std::make_unique<NullTrainer>();
        trainer = owned_trainer.get();
    } else {
        trainer = &lab->trainer();
    }

    std::unique_ptr<Executor> owned_executor;
    if (config.executor.kind == "http")
        owned_executor = std::make_unique<HttpExecutorClient>(config.executor.url,
                                                              30000, bearer);
    else
        owned_executor = std::make_unique<ExprExecutor>();

    std::unique_ptr<Embedder> owned_embedder;
    if (config.embedder.kind == "http")
        owned_embedder = std::make_unique<HttpEmbedderClient>(config.embedder.url,
                                                              config.embed_dim,
                                                              30000, bearer);
    else
        owned_embedder = std::make_unique<FeatureHashEmbedder>(config.embed_dim);

    std::vector<TaskSpec> goalposts;
    if (config.goalposts_path)
        goalposts = load_task_corpus(*config.goalposts_path);
    else if (lab)
        goalposts = lab->make_goalposts();
    else
        throw ConfigError("http policy runs need goalposts_path");

    std::vector<TaskSpec> real_corpus;
    if (config.real_data_path) {
        real_corpus = load_task_corpus(*config.real_data_path);
    } else if (config.joint_real_data && lab) {
        // The goalposts are drawn from the real training split, so the
        // lab-synthesized corpus contains them too.
        real_corpus = lab->make_real_corpus();
        real_corpus.insert(real_corpus.end(), goalposts.begin(), goalposts.end());
    }

    EventLog log(dir / "events.jsonl");
    Orchestrator orch(config,
                      {*teacher, *student, *trainer, *owned_executor, *owned_embedder},
                      std::move(goalposts), std::move(real_corpus), &log, seed);
    orch.run();

    orch.buffers().lemma.save_jsonl(dir / "buffers_lemma.jsonl");
    orch.buffers().lift.save_jsonl(dir / "buffers_lift.jsonl");
    {
        std::ofstream out(dir / "solve_matrix.json");
        out << orch.matrix().to_json().dump(2) << '\n';
    }
    {
        std::ofstream out(dir / "solve_matrix_grid.csv");
        out << orch.matrix().to_csv_grid(&seed);
    }
    write_metrics_csv(dir / "metrics.csv", orch.metrics());

    const std::uint64_t hash = canonical_log_hash(dir / "events.jsonl");
    const SolveMatrix::UniqueCounts counts = orch.matrix().unique_solved();
    {
        std::ofstream out(dir / "summary.json");
        out << json{{"seed", seed},
                    {"log_hash", hash},
                    {"lemma_buffer", orch.buffers().lemma.size()},
                    {"lift_buffer", orch.buffers().lift.size()},
                    {"counts", counts_to_json(counts)}}
                   .dump(2)
            << '\n';
    }
    return hash;
}

int run_command(const fs::path& config_path, std::optional<int> seed_override,
                std::optional<fs::path> out_override) {
    RunConfig config;
    try {
        config = RunConfig::load(config_path);
        if (seed_override) config.seeds = {*seed_override};
        if (out_override) config.out_dir = *out_override;
        config.validate();
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    }
    try {
        for (int seed : config.seeds) {
            const std::uint64_t hash = execute_run(config, seed);
            std::cout << "seed " << seed << ": done, log hash " << std::hex << hash
                      << std::dec << '\n';
        }
    } catch (const std::exception& e) {
        std::cerr << "run failed: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

int filter_goalposts_command(const fs::path& records_path,
                             const fs::path& candidates_path,
                             const fs::path& out_dir) {
    try {
        const std::vector<EvaluationRecord> records =
            load_evaluation_records(records_path);
        const auto stages = split_stages(records);
        std::vector<std::string> survivors = read_candidate_ids(candidates_path);
        const std::size_t input_count = survivors.size();

        static const char* stage_names[3] = {"post_rl", "azr_checkpoint", "final_rl"};
        json report_stages = json::array();
        json uncovered_report = json::array();
        for (int s = 0; s < 3; ++s) {
            std::set<std::string> covered;
            for (const EvaluationRecord& r : stages[s]) covered.insert(r.task_id);
            std::vector<std::string> eligible, uncovered;
            for (const std::string& id : survivors)
                (covered.count(id) ? eligible : uncovered).push_back(id);
            FilterOutcome outcome = filter_stage(eligible, stages[s]);
            report_stages.push_back({{"stage", stage_names[s]},
                                     {"input", survivors.size()},
                                     {"removed", outcome.removed.size()},
                                     {"uncovered", uncovered.size()}});
            for (const std::string& id : uncovered)
                uncovered_report.push_back({{"stage", stage_names[s]}, {"task_id", id}});
            survivors = std::move(outcome.survivors);
        }

        fs::create_directories(out_dir);
        {
            std::ofstream out(out_dir / "goalposts.txt");
            for (const std::string& id : survivors) out << id << '\n';
        }
        {
            std::ofstream out(out_dir / "report.json");
            out << json{{"candidates", input_count},
                        {"stages", report_stages},
                        {"uncovered", uncovered_report},
                        {"survivors", survivors.size()}}
                       .dump(2)
                << '\n';
        }
        std::cout << "goalposts: " << survivors.size() << " / " << input_count << '\n';
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "filter-goalposts failed: " << e.what() << '\n';
        return 1;
    }
}

int eval_passk_command(const fs::path& samples_path, const std::vector<int>& ks,
                       const fs::path& out_path) {
    try {
        struct Row {
            std::string task_id;
            int n, c;
        };
        std::vector<Row> rows;
        std::ifstream in(samples_path);
        if (!in) throw std::runtime_error("cannot open samples: " + samples_path.string());
        std::string line;
        bool csv_header_seen = false;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            if (line.front() == '{') {
                json j = json::parse(line);
                rows.push_back({j.at("task_id").get<std::string>(),
                                j.at("n").get<int>(), j.at("c").get<int>()});
            } else {
                if (!csv_header_seen) {  // task_id,n,c header
                    csv_header_seen = true;
                    continue;
                }
                std::istringstream cells(line);
                Row r;
                std::string field;
                std::getline(cells, r.task_id, ',');
                std::getline(cells, field, ',');
                r.n = std::stoi(field);
                std::getline(cells, field, ',');
                r.c = std::stoi(field);
                rows.push_back(std::move(r));
            }
        }

        std::ofstream out(out_path);
        out << "task_id,n,c,k,pass_at_k,flag\n";
        std::map<int, std::pair<double, int>> macro;  // k -> (sum, count)
        for (const Row& r : rows) {
            for (int k : ks) {
                if (k > r.n) {
                    out << r.task_id << ',' << r.n << ',' << r.c << ',' << k
                        << ",,k_gt_n\n";
                    continue;
                }
                const double v = pass_at_k(r.n, r.c, k);
                out << r.task_id << ',' << r.n << ',' << r.c << ',' << k << ','
                    << json(v).dump() << ",\n";
                macro[k].first += v;
                ++macro[k].second;
            }
        }
        for (const auto& [k, agg] : macro)
            out << "macro_avg,,," << k << ','
                << json(agg.second > 0 ? agg.first / agg.second : 0.0).dump() << ",\n";
        std::cout << "wrote " << out_path.string() << '\n';
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "eval-passk failed: " << e.what() << '\n';
        return 1;
    }
}

int solve_matrix_command(const fs::path& records_path, const fs::path& out_dir) {
    try {
        std::ifstream in(records_path);
        if (!in) throw std::runtime_error("cannot open records: " + records_path.string());
        struct Rec {
            std::string goalpost;
            long checkpoint;
            int seed, successes, samples;
        };
        std::vector<Rec> recs;
        std::vector<std::string> order;
        std::set<std::string> seen;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            json j = json::parse(line);
            Rec r{j.at("goalpost").get<std::string>(), j.at("checkpoint").get<long>(),
                  j.at("seed").get<int>(), j.at("successes").get<int>(),
                  j.at("samples").get<int>()};
            if (seen.insert(r.goalpost).second) order.push_back(r.goalpost);
            recs.push_back(std::move(r));
        }

        SolveMatrix matrix(order);
        for (const Rec& r : recs)
            matrix.record(r.goalpost, r.checkpoint, r.seed, r.successes, r.samples);

        fs::create_directories(out_dir);
        for (int seed : matrix.seeds()) {
            std::ofstream out(out_dir / ("solve_matrix_seed" + std::to_string(seed) +
                                         ".csv"));
            out << matrix.to_csv_grid(&seed);
        }
        {
            std::ofstream out(out_dir / "solve_matrix_union.csv");
            out << matrix.to_csv_grid(nullptr);
        }
        const SolveMatrix::UniqueCounts counts = matrix.unique_solved();
        {
            std::ofstream out(out_dir / "counts.json");
            out << counts_to_json(counts).dump(2) << '\n';
        }
        std::cout << "per-seed:";
        for (const auto& [seed, n] : counts.per_seed) std::cout << ' ' << n;
        std::cout << "  union: " << counts.union_count << '\n';
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "solve-matrix failed: " << e.what() << '\n';
        return 1;
    }
}

int replay_command(const fs::path& events_path, const fs::path& out_dir,
                   std::optional<fs::path> compare_dir) {
    try {
        const std::vector<RunEvent> events = read_event_log(events_path);
        int dim = 256;
        for (const RunEvent& e : events)
            if (e.kind == "run_start" && e.payload.contains("embed_dim")) {
                dim = e.payload["embed_dim"].get<int>();
                break;
            }
        FeatureHashEmbedder embedder(dim);
        const ReplayState state = replay_events(events, embedder);

        fs::create_directories(out_dir);
        write_buffer_entries(out_dir / "buffers_lemma.jsonl", state.lemma_buffer);
        write_buffer_entries(out_dir / "buffers_lift.jsonl", state.lift_buffer);
        {
            std::ofstream out(out_dir / "solve_matrix.json");
            out << state.matrix.to_json().dump(2) << '\n';
        }
        write_metrics_csv(out_dir / "metrics.csv", state.metrics);
        std::cout << "replay hash " << std::hex << canonical_log_hash(events_path)
                  << std::dec << '\n';

        if (compare_dir) {
            auto same = [](const fs::path& a, const fs::path& b) {
                std::ifstream fa(a), fb(b);
                if (!fa || !fb) return false;
                std::stringstream sa, sb;
                sa << fa.rdbuf();
                sb << fb.rdbuf();
                return sa.str() == sb.str();
            };
            for (const char* name : {"buffers_lemma.jsonl", "buffers_lift.jsonl",
                                     "solve_matrix.json", "metrics.csv"}) {
                if (!same(out_dir / name, *compare_dir / name)) {
                    std::cerr << "replay mismatch: " << name << '\n';
                    return 1;
                }
            }
            std::cout << "replay matches live state\n";
        }
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "replay failed: " << e.what() << '\n';
        return 1;
    }
}

int dispatch(int argc, const char* const* argv) {
    CLI::App app{"Guided self-play curriculum engine"};
    app.require_subcommand(1);

    std::string config_path;
    int seed = -1;
    std::string out_dir;
    auto* run = app.add_subcommand("run", "Execute a configured training run");
    run->add_option("--config", config_path, "Run config JSON")->required();
    run->add_option("--seed", seed, "Override the config's seed list");
    run->add_option("--out", out_dir, "Override the output directory");

    std::string records_path, candidates_path, fg_out;
    auto* fg = app.add_subcommand("filter-goalposts",
                                  "Certify hard questions from evaluation records");
    fg->add_option("--records", records_path, "Evaluation records JSONL")->required();
    fg->add_option("--candidates", candidates_path, "Candidate ids (JSON array or lines)")
        ->required();
    fg->add_option("--out", fg_out, "Output directory")->required();

    std::string samples_path, k_list, table_out;
    auto* pk = app.add_subcommand("eval-passk", "Tabulate pass@k from (n, c) samples");
    pk->add_option("--samples", samples_path, "Per-task samples (JSONL or CSV)")
        ->required();
    pk->add_option("--k", k_list, "Comma-separated k values")->required();
    pk->add_option("--out", table_out, "Output CSV path")->required();

    std::string sm_records, sm_out;
    auto* sm = app.add_subcommand("solve-matrix",
                                  "Build per-seed and union solve matrices");
    sm->add_option("--records", sm_records, "Solve records JSONL")->required();
    sm->add_option("--out", sm_out, "Output directory")->required();

    std::string events_path, replay_out, compare_dir;
    auto* rp = app.add_subcommand("replay", "Reconstruct run state from an event log");
    rp->add_option("--events", events_path, "Event log JSONL")->required();
    rp->add_option("--out", replay_out, "Output directory")->required();
    rp->add_option("--compare", compare_dir, "Live run directory to compare against");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    if (run->parsed())
        return run_command(config_path,
                           seed >= 0 ? std::optional<int>(seed) : std::nullopt,
                           out_dir.empty() ? std::nullopt
                                           : std::optional<fs::path>(out_dir));
    if (fg->parsed())
        return filter_goalposts_command(records_path, candidates_path, fg_out);
    if (pk->parsed()) {
        std::vector<int> ks;
        std::istringstream ss(k_list);
        std::string item;
        while (std::getline(ss, item, ',')) ks.push_back(std::stoi(item));
        return eval_passk_command(samples_path, ks, table_out);
    }
    if (sm->parsed()) return solve_matrix_command(sm_records, sm_out);
    if (rp->parsed())
        return replay_command(events_path, replay_out,
                              compare_dir.empty() ? std::nullopt
                                                  : std::optional<fs::path>(compare_dir));
    return 1;
}

}  // namespace cli
}  // namespace gasp
