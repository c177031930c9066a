// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Each criterion pins its tolerance in code.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>
#include <vector>

#include "gasp/cli.hpp"
#include "gasp/evaluation.hpp"
#include "gasp/lab.hpp"
#include "gasp/orchestrator.hpp"
#include "gasp/reward.hpp"

using namespace gasp;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Dissimilarity floor recorded for the reference seed (measured minimum over
// the 40-iteration run is ~0.27 on both channels; collapse runs sit at 0).
constexpr double kReferenceDissimilarityFloor = 0.20;

int failures = 0;

void report(const char* name, bool ok, const std::string& detail = "") {
    std::printf("%s  %s%s%s\n", ok ? "PASS" : "FAIL", name,
                detail.empty() ? "" : " | ", detail.c_str());
    if (!ok) ++failures;
}

RunConfig reference_config() {
    const fs::path path = fs::path(GASP_SOURCE_DIR) / "configs" / "reference_lab.json";
    RunConfig c = RunConfig::load(path);
    c.validate();
    return c;
}

struct LabRun {
    std::unique_ptr<SyntheticLab> lab;
    std::unique_ptr<ExprExecutor> executor;
    std::unique_ptr<FeatureHashEmbedder> embedder;
    std::unique_ptr<EventLog> log;
    std::unique_ptr<Orchestrator> orch;
};

LabRun run_lab(const RunConfig& config, int seed, const fs::path& log_path) {
    LabRun r;
    r.lab = std::make_unique<SyntheticLab>(config.lab, seed);
    r.executor = std::make_unique<ExprExecutor>();
    r.embedder = std::make_unique<FeatureHashEmbedder>(config.embed_dim);
    r.log = std::make_unique<EventLog>(log_path);
    OrchestratorDeps deps{r.lab->teacher(), r.lab->student(), r.lab->trainer(),
                          *r.executor, *r.embedder};
    r.orch = std::make_unique<Orchestrator>(config, deps, r.lab->make_goalposts(),
                                            r.lab->make_real_corpus(), r.log.get(),
                                            seed);
    r.orch->run();
    return r;
}

fs::path work_dir() {
    const fs::path dir = fs::temp_directory_path() / "gasp_acceptance";
    fs::create_directories(dir);
    return dir;
}

// ---------------------------------------------------------------------------

void criterion_reward_closed_forms() {
    bool ok = true;
    std::string detail;
    double lemma_best = -2, lemma_best_p = -1;
    double lift_best = -2, lift_best_p = -1;
    double med_best = -2, med_best_p = -1;
    for (int i = 0; i <= 1000; ++i) {
        const double p = i / 1000.0;
        const RewardOutcome lm = lemma_reward(p);
        const RewardOutcome lf = lift_reward(p);
        const RewardOutcome md = one_step_reward(p, OneStepVariant::medium);
        if (lm.region == RewardRegion::in_band &&
            std::abs(lm.value - generalized_reward(p, 0.5, 5)) > 1e-12)
            ok = false;
        if (lf.region == RewardRegion::in_band &&
            std::abs(lf.value - generalized_reward(p, 0.1, 1)) > 1e-12)
            ok = false;
        if (lm.region == RewardRegion::out_of_band && lm.value != -0.5) ok = false;
        if (lf.region == RewardRegion::out_of_band && lf.value != -0.5) ok = false;
        if (lm.value > lemma_best) { lemma_best = lm.value; lemma_best_p = p; }
        if (lf.value > lift_best) { lift_best = lf.value; lift_best_p = p; }
        if (md.value > med_best) { med_best = md.value; med_best_p = p; }
    }
    if (lemma_best_p != 0.5 || lift_best_p != 0.1 || med_best_p != 0.3) {
        ok = false;
        detail = "grid argmax off";
    }
    if (apply_format_penalty(true, std::nullopt, RewardSpec::lemma()).value != -1.0)
        ok = false;
    report("reward closed forms: lemma=R(p;0.5,5), lift=R(p;0.1,1) within 1e-12; "
           "peaks 0.5/0.1/0.3; penalties exact",
           ok, detail);
}

double pass_at_k_bruteforce(int n, int c, int k) {
    std::vector<int> idx(k);
    std::iota(idx.begin(), idx.end(), 0);
    long total = 0, all_fail = 0;
    for (;;) {
        ++total;
        bool any = false;
        for (int i : idx)
            if (i < c) { any = true; break; }
        if (!any) ++all_fail;
        int pos = k - 1;
        while (pos >= 0 && idx[pos] == n - k + pos) --pos;
        if (pos < 0) break;
        ++idx[pos];
        for (int j = pos + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
    return 1.0 - static_cast<double>(all_fail) / static_cast<double>(total);
}

void criterion_pass_at_k() {
    bool exact_ok = true;
    for (int n = 1; n <= 12 && exact_ok; ++n)
        for (int c = 0; c <= n && exact_ok; ++c)
            for (int k = 1; k <= n; ++k)
                if (pass_at_k(n, c, k) != pass_at_k_bruteforce(n, c, k)) {
                    exact_ok = false;
                    break;
                }

    bool mc_ok = true;
    Rng rng(4004);
    struct Case { int n, c, k; };
    for (const Case cs : {Case{100, 10, 20}, Case{100, 37, 5}, Case{100, 80, 3}}) {
        const double exact = pass_at_k(cs.n, cs.c, cs.k);
        const int draws = 100000;
        std::vector<int> pool(cs.n);
        int hits = 0;
        for (int d = 0; d < draws; ++d) {
            std::iota(pool.begin(), pool.end(), 0);
            bool any = false;
            for (int i = 0; i < cs.k; ++i) {
                const std::size_t j =
                    i + static_cast<std::size_t>(rng.uniform_int(cs.n - i));
                std::swap(pool[i], pool[j]);
                if (pool[i] < cs.c) any = true;
            }
            if (any) ++hits;
        }
        const double mc = static_cast<double>(hits) / draws;
        const double sigma = std::sqrt(std::max(exact * (1 - exact), 1e-12) / draws);
        if (std::abs(mc - exact) > 3 * sigma + 1e-9) mc_ok = false;
    }
    report("pass@k: exact vs subset enumeration for all n<=12; Monte Carlo within "
           "3 sigma at n=100",
           exact_ok && mc_ok);
}

void criterion_band_acceptance() {
    RunConfig c = reference_config();
    c.global_iterations = 10;
    const fs::path log_path = work_dir() / "band_run.jsonl";
    LabRun run = run_lab(c, c.seeds.at(0), log_path);

    std::vector<std::string> goalpost_statements;
    {
        SyntheticLab probe(c.lab, c.seeds.at(0));
        for (const TaskSpec& g : probe.make_goalposts())
            goalpost_statements.push_back(g.statement.substr(0, 48));
    }

    bool bands_ok = true;
    bool prompts_ok = true;
    int accepted_lemmas = 0, accepted_lifts = 0, lift_prompts = 0;
    for (const RunEvent& e : read_event_log(log_path)) {
        if (e.kind == "acceptance") {
            const double p = e.payload.at("p").get<double>();
            if (e.phase == "lemma") {
                ++accepted_lemmas;
                if (p < 0.3 || p > 0.7) bands_ok = false;
            } else if (e.phase == "lift") {
                ++accepted_lifts;
                if (p < 0.1 || p > 0.5) bands_ok = false;
            }
        }
        if (e.kind == "proposal" && e.phase == "lift") {
            ++lift_prompts;
            const std::string dump = e.payload.at("request").dump();
            if (e.payload.at("request").at("variables").contains("goalpost"))
                prompts_ok = false;
            for (const std::string& stmt : goalpost_statements)
                if (dump.find(stmt) != std::string::npos) prompts_ok = false;
        }
    }
    std::ostringstream detail;
    detail << accepted_lemmas << " lemmas, " << accepted_lifts << " lifts, "
           << lift_prompts << " lift prompts";
    report("band acceptance: every accepted lemma rate in [0.3,0.7], lift in "
           "[0.1,0.5]; no lift prompt carries goalpost text",
           bands_ok && prompts_ok && accepted_lemmas > 0 && accepted_lifts > 0,
           detail.str());
}

void criterion_novelty() {
    // Part 1: the reference run's buffers hold no pair above the threshold.
    RunConfig ref = reference_config();
    ref.global_iterations = 12;
    LabRun run = run_lab(ref, ref.seeds.at(0), work_dir() / "novelty_run.jsonl");
    bool pairwise_ok = true;
    for (const ProposalBuffer* buf :
         {&run.orch->buffers().lemma, &run.orch->buffers().lift}) {
        const auto entries = buf->snapshot();
        for (std::size_t i = 0; i < entries.size() && pairwise_ok; ++i)
            for (std::size_t j = i + 1; j < entries.size(); ++j) {
                if (cosine_similarity(entries[i].statement_embedding,
                                      entries[j].statement_embedding) > 0.95 ||
                    cosine_similarity(entries[i].code_embedding,
                                      entries[j].code_embedding) > 0.95) {
                    pairwise_ok = false;
                    break;
                }
            }
    }

    // Part 2: duplicate injection with the filter disabled collapses batch
    // dissimilarity below 0.05 within 5 iterations.
    RunConfig collapse = RunConfig::load(fs::path(GASP_SOURCE_DIR) / "configs" /
                                         "no_filter_collapse.json");
    collapse.validate();
    LabRun crun = run_lab(collapse, collapse.seeds.at(0),
                          work_dir() / "collapse_run.jsonl");
    bool collapse_ok = false;
    if (crun.orch->metrics().count("buffer_dissimilarity_lemma"))
        for (const auto& [step, value] :
             crun.orch->metrics().at("buffer_dissimilarity_lemma").points)
            if (step <= 5 && value < 0.05) collapse_ok = true;

    // Part 3: with the filter enabled the reference run stays above the
    // recorded floor.
    bool floor_ok = true;
    double min_dis = 1e9;
    for (const char* name :
         {"buffer_dissimilarity_lemma", "buffer_dissimilarity_lift"}) {
        if (!run.orch->metrics().count(name)) continue;
        for (const auto& [step, value] : run.orch->metrics().at(name).points)
            min_dis = std::min(min_dis, value);
    }
    if (!(min_dis > kReferenceDissimilarityFloor)) floor_ok = false;

    std::ostringstream detail;
    detail << "filtered-run min dissimilarity " << min_dis;
    report("novelty: no buffer pair above 0.95 on either channel; unfiltered "
           "duplicates collapse below 0.05 by iteration 5; filtered run stays "
           "above the recorded floor",
           pairwise_ok && collapse_ok && floor_ok, detail.str());
}

void criterion_goalpost_arithmetic() {
    // 601 -> 146 via staged removals.
    bool counts_ok = true;
    {
        std::vector<std::string> candidates;
        for (int i = 0; i < 601; ++i) candidates.push_back("q" + std::to_string(i));
        std::array<std::vector<EvaluationRecord>, 3> stages;
        const EvalSource sources[3] = {EvalSource::rl_checkpoint,
                                       EvalSource::azr_checkpoint,
                                       EvalSource::final_rl};
        const int removals[3] = {300, 100, 55};
        std::set<std::string> gone;
        for (int s = 0; s < 3; ++s) {
            int removed = 0;
            for (const std::string& c : candidates) {
                if (gone.count(c)) continue;
                const bool remove = removed < removals[s];
                stages[s].push_back({c, sources[s], 1, 0, 100, remove ? 1 : 0});
                if (remove) {
                    gone.insert(c);
                    ++removed;
                }
            }
        }
        PipelineResult r = build_goalpost_set(candidates, stages);
        if (r.goalposts.size() != 146) counts_ok = false;
        if (r.removed_per_stage != std::array<std::size_t, 3>{300, 100, 55})
            counts_ok = false;
    }

    // Per-seed/union fixtures: 6/3/3 -> 11 and 5/8/5 -> 14.
    auto ids = [](int n) {
        std::vector<std::string> v;
        for (int i = 0; i < n; ++i) v.push_back("g" + std::to_string(i));
        return v;
    };
    bool table_ok = true;
    {
        SolveMatrix m(ids(14));
        for (int i = 0; i < 6; ++i) m.record("g" + std::to_string(i), 50, 1, 1, 100);
        m.record("g5", 100, 2, 1, 100);
        m.record("g6", 100, 2, 1, 100);
        m.record("g7", 100, 2, 1, 100);
        for (int i = 8; i < 11; ++i) m.record("g" + std::to_string(i), 150, 3, 1, 100);
        auto counts = m.unique_solved();
        if (counts.per_seed[1] != 6 || counts.per_seed[2] != 3 ||
            counts.per_seed[3] != 3 || counts.union_count != 11)
            table_ok = false;
    }
    {
        SolveMatrix m(ids(14));
        for (int i = 0; i < 5; ++i) m.record("g" + std::to_string(i), 10, 1, 1, 100);
        for (int i = 3; i < 11; ++i) m.record("g" + std::to_string(i), 20, 2, 1, 100);
        for (int i = 9; i < 14; ++i) m.record("g" + std::to_string(i), 30, 3, 1, 100);
        auto counts = m.unique_solved();
        if (counts.per_seed[1] != 5 || counts.per_seed[2] != 8 ||
            counts.per_seed[3] != 5 || counts.union_count != 14)
            table_ok = false;
    }

    // Union semantics: any seed solving a cell marks the union cell solved.
    bool union_ok = true;
    {
        SolveMatrix m(ids(3));
        m.record("g0", 50, 1, 1, 100);
        m.record("g0", 50, 2, 0, 100);
        m.record("g1", 50, 2, 2, 100);
        m.record("g2", 50, 3, 0, 100);
        auto u = m.union_across_seeds();
        if (!u[{"g0", 50}] || !u[{"g1", 50}] || u[{"g2", 50}]) union_ok = false;
    }
    report("goalpost arithmetic: 601->146 staged filter, per-seed 6/3/3->11 and "
           "5/8/5->14, union-across-seeds semantics",
           counts_ok && table_ok && union_ok);
}

void criterion_curriculum_dynamics() {
    const auto t0 = std::chrono::steady_clock::now();
    RunConfig c = reference_config();
    const int seed = c.seeds.at(0);
    LabRun run = run_lab(c, seed, work_dir() / "dynamics_run.jsonl");

    const SolveMatrix& m = run.orch->matrix();
    bool unsolved_at_start = true;
    bool solved_later = false;
    for (const std::string& g : m.goalposts()) {
        if (m.solved(g, 0, seed)) unsolved_at_start = false;
        for (long cp : m.checkpoints())
            if (cp > 0 && m.solved(g, cp, seed)) solved_later = true;
    }

    // Direct-on-goalpost baseline stand-in with the same attempt budget.
    double baseline_change = 0.0;
    {
        SyntheticLab baseline(c.lab, seed);
        ExprExecutor ex;
        auto goalposts = baseline.make_goalposts();
        const double skill0 = baseline.skill();
        Rng rng(seed);
        for (int iter = 1; iter <= c.global_iterations; ++iter) {
            std::vector<TrainItem> items;
            for (int i = 0; i < 2 * c.valid_count_target; ++i) {
                const TaskSpec& g = goalposts[rng.uniform_int(goalposts.size())];
                GenerateRequest req = make_solve_request(g, rng.next_u64(), 1.0);
                GenerateResponse resp = baseline.student().generate(req);
                const Verdict v = verify_candidate(g, resp.text, ex, c.timeout_ms);
                json payload{{"task_id", g.id}, {"passed", v.passed}};
                if (auto d = task_difficulty(g)) payload["difficulty"] = *d;
                items.push_back({std::move(payload), v.passed ? 1.0 : 0.0});
            }
            baseline.trainer().update(TrainPhase::solver, items);
        }
        baseline_change = baseline.skill() - skill0;
    }

    // Accepted lift difficulty: 5-iteration moving average nondecreasing.
    bool ma_ok = true;
    {
        const auto& metrics = run.orch->metrics();
        if (!metrics.count("accepted_lift_difficulty")) {
            ma_ok = false;
        } else {
            const auto& pts = metrics.at("accepted_lift_difficulty").points;
            std::vector<double> ma;
            for (std::size_t i = 0; i + 5 <= pts.size(); ++i) {
                double s = 0;
                for (std::size_t j = i; j < i + 5; ++j) s += pts[j].second;
                ma.push_back(s / 5.0);
            }
            if (ma.size() < 4) ma_ok = false;
            for (std::size_t i = 1; i < ma.size(); ++i)
                if (ma[i] < ma[i - 1]) ma_ok = false;
        }
    }

    const auto elapsed = std::chrono::duration_cast<std::chrono::seconds>(
        std::chrono::steady_clock::now() - t0);
    std::ostringstream detail;
    detail << "baseline skill change " << baseline_change << ", runtime "
           << elapsed.count() << "s";
    report("curriculum dynamics: goalposts pass@100=0 at iteration 0 and solved "
           "within 40 iterations; direct-on-goalpost baseline learns nothing; "
           "lift difficulty moving average nondecreasing",
           unsolved_at_start && solved_later && baseline_change == 0.0 && ma_ok &&
               elapsed.count() < 300,
           detail.str());
}

void criterion_determinism() {
    RunConfig c = reference_config();
    c.global_iterations = 10;
    const fs::path log_a = work_dir() / "det_a.jsonl";
    const fs::path log_b = work_dir() / "det_b.jsonl";
    LabRun a = run_lab(c, c.seeds.at(0), log_a);
    LabRun b = run_lab(c, c.seeds.at(0), log_b);

    // Byte-identical after excluding timestamps.
    bool logs_ok = true;
    const auto ea = read_event_log(log_a);
    const auto eb = read_event_log(log_b);
    if (ea.size() != eb.size()) logs_ok = false;
    for (std::size_t i = 0; logs_ok && i < ea.size(); ++i) {
        json ja = ea[i].to_json();
        json jb = eb[i].to_json();
        ja.erase("ts");
        jb.erase("ts");
        if (ja.dump() != jb.dump()) logs_ok = false;
    }
    if (canonical_log_hash(log_a) != canonical_log_hash(log_b)) logs_ok = false;

    // Replay rebuilds buffers and matrix exactly.
    bool replay_ok = true;
    FeatureHashEmbedder embedder(c.embed_dim);
    const ReplayState state = replay_events(ea, embedder);
    const auto live_lemma = a.orch->buffers().lemma.snapshot();
    const auto live_lift = a.orch->buffers().lift.snapshot();
    if (state.lemma_buffer.size() != live_lemma.size() ||
        state.lift_buffer.size() != live_lift.size())
        replay_ok = false;
    for (std::size_t i = 0; replay_ok && i < live_lemma.size(); ++i)
        if (state.lemma_buffer[i].proposal_id != live_lemma[i].proposal_id ||
            state.lemma_buffer[i].statement_embedding !=
                live_lemma[i].statement_embedding ||
            state.lemma_buffer[i].code_embedding != live_lemma[i].code_embedding)
            replay_ok = false;
    for (std::size_t i = 0; replay_ok && i < live_lift.size(); ++i)
        if (state.lift_buffer[i].proposal_id != live_lift[i].proposal_id ||
            state.lift_buffer[i].statement_embedding !=
                live_lift[i].statement_embedding)
            replay_ok = false;
    if (state.matrix.to_json() != a.orch->matrix().to_json()) replay_ok = false;

    report("determinism: identically seeded runs give byte-identical logs "
           "(timestamps excluded); replay reconstructs buffers and matrices",
           logs_ok && replay_ok);
}

void criterion_one_step_parity() {
    bool pointwise_ok = true;
    for (int i = 100; i <= 500; ++i) {
        const double p = i / 1000.0;
        if (std::abs(one_step_reward(p, OneStepVariant::hard).value -
                     lift_reward(p).value) > 1e-12)
            pointwise_ok = false;
    }

    RunConfig c = RunConfig::load(fs::path(GASP_SOURCE_DIR) / "configs" /
                                  "one_step_hard.json");
    c.validate();
    c.global_iterations = 4;
    const fs::path log_path = work_dir() / "one_step_run.jsonl";
    LabRun run = run_lab(c, c.seeds.at(0), log_path);

    bool loop_ok = true;
    int iteration = 0;
    std::map<int, int> proposal_updates;
    for (const RunEvent& e : read_event_log(log_path)) {
        if (e.kind == "iteration_start") ++iteration;
        if (e.kind == "proposal" && e.phase != "one_step") loop_ok = false;
        if (e.kind == "trainer_update" && e.phase == "one_step")
            ++proposal_updates[iteration];
    }
    if (iteration != 4) loop_ok = false;
    for (int i = 1; i <= iteration; ++i)
        if (proposal_updates[i] != 1) loop_ok = false;

    report("one-step ablation parity: hard reward equals lift reward pointwise "
           "(1e-12) on [0.1,0.5]; one-step loops run exactly one proposal phase "
           "per iteration",
           pointwise_ok && loop_ok);
}

}  // namespace

int main() {
    const auto t0 = std::chrono::steady_clock::now();
    criterion_reward_closed_forms();
    criterion_pass_at_k();
    criterion_band_acceptance();
    criterion_novelty();
    criterion_goalpost_arithmetic();
    criterion_curriculum_dynamics();
    criterion_determinism();
    criterion_one_step_parity();
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
    std::printf("%d/8 criteria passed in %llds\n", 8 - failures,
                static_cast<long long>(secs));
    return failures == 0 ? 0 : 1;
}
