#include "gasp/config.hpp"

#include <fstream>

namespace gasp {

using nlohmann::json;

const char* to_string(Curriculum c) {
    switch (c) {
        case Curriculum::two_step: return "two_step";
        case Curriculum::one_step_medium: return "one_step_medium";
        case Curriculum::one_step_hard: return "one_step_hard";
    }
    return "?";
}

Curriculum curriculum_from_string(const std::string& s) {
    if (s == "two_step") return Curriculum::two_step;
    if (s == "one_step_medium") return Curriculum::one_step_medium;
    if (s == "one_step_hard") return Curriculum::one_step_hard;
    throw ConfigError("unknown curriculum: " + s);
}

void RunConfig::validate() const {
    auto check_band = [](const std::array<double, 2>& b, const char* name) {
        if (!(b[0] >= 0.0 && b[0] < b[1] && b[1] <= 1.0))
            throw ConfigError(std::string(name) +
                              " band must satisfy 0 <= lo < hi <= 1");
    };
    check_band(lemma_band, "lemma");
    check_band(lift_band, "lift");
    if (valid_count_target < 1) throw ConfigError("valid_count_target must be >= 1");
    if (proposal_trials < 1) throw ConfigError("proposal_trials must be >= 1");
    if (solver_trials < 1) throw ConfigError("solver_trials must be >= 1");
    if (max_attempts < 0) throw ConfigError("max_attempts must be >= 0");
    if (!(similarity_threshold > 0.0 && similarity_threshold <= 1.0))
        throw ConfigError("similarity_threshold must lie in (0,1]");
    if (global_iterations < 0) throw ConfigError("global_iterations must be >= 0");
    if (seeds.empty()) throw ConfigError("at least one seed is required");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (goalpost_eval_samples < 1) throw ConfigError("goalpost_eval_samples must be >= 1");
    if (goalpost_eval_every < 1) throw ConfigError("goalpost_eval_every must be >= 1");
    if (validity_repeats < 2) throw ConfigError("validity_repeats must be >= 2");
    if (embed_dim < 8) throw ConfigError("embed_dim must be >= 8");
    if (policy.kind != "scripted" && policy.kind != "http")
        throw ConfigError("policy.kind must be scripted or http");
    if (trainer.kind != "scripted" && trainer.kind != "http" && trainer.kind != "null")
        throw ConfigError("trainer.kind must be scripted, http or null");
    if (executor.kind != "scripted" && executor.kind != "http")
        throw ConfigError("executor.kind must be scripted or http");
    if (embedder.kind != "scripted" && embedder.kind != "http")
        throw ConfigError("embedder.kind must be scripted or http");
    for (const auto& ep : {policy, trainer, executor, embedder})
        if (ep.kind == "http" && ep.url.empty())
            throw ConfigError("http endpoint needs a url");
    if (lab.goalpost_difficulties.empty() && !goalposts_path)
        throw ConfigError("no goalposts configured (lab difficulties or corpus path)");
    if (joint_real_data && !real_data_path && lab.real_data_count < 1)
        throw ConfigError("joint_real_data needs a real-data corpus");
}

namespace {

json endpoint_to_json(const EndpointConfig& e) {
    return {{"kind", e.kind}, {"url", e.url}, {"version", e.version}};
}

EndpointConfig endpoint_from_json(const json& j, EndpointConfig defaults) {
    if (j.is_null()) return defaults;
    EndpointConfig e = defaults;
    e.kind = j.value("kind", e.kind);
    e.url = j.value("url", e.url);
    e.version = j.value("version", e.version);
    return e;
}

json lab_to_json(const LabScenario& l) {
    return {{"initial_skill", l.initial_skill},
            {"initial_teacher_estimate", l.initial_teacher_estimate},
            {"steepness", l.steepness},
            {"eta", l.eta},
            {"estimate_gain", l.estimate_gain},
            {"boundary_margin", l.boundary_margin},
            {"lemma_noise", l.lemma_noise},
            {"lift_increment", l.lift_increment},
            {"malformed_rate", l.malformed_rate},
            {"duplicate_rate", l.duplicate_rate},
            {"goalpost_difficulties", l.goalpost_difficulties},
            {"real_data_count", l.real_data_count},
            {"real_data_lo", l.real_data_lo},
            {"real_data_hi", l.real_data_hi}};
}

LabScenario lab_from_json(const json& j) {
    LabScenario l;
    if (j.is_null()) return l;
    l.initial_skill = j.value("initial_skill", l.initial_skill);
    l.initial_teacher_estimate =
        j.value("initial_teacher_estimate", l.initial_teacher_estimate);
    l.steepness = j.value("steepness", l.steepness);
    l.eta = j.value("eta", l.eta);
    l.estimate_gain = j.value("estimate_gain", l.estimate_gain);
    l.boundary_margin = j.value("boundary_margin", l.boundary_margin);
    l.lemma_noise = j.value("lemma_noise", l.lemma_noise);
    l.lift_increment = j.value("lift_increment", l.lift_increment);
    l.malformed_rate = j.value("malformed_rate", l.malformed_rate);
    l.duplicate_rate = j.value("duplicate_rate", l.duplicate_rate);
    if (j.contains("goalpost_difficulties"))
        l.goalpost_difficulties = j["goalpost_difficulties"].get<std::vector<double>>();
    l.real_data_count = j.value("real_data_count", l.real_data_count);
    l.real_data_lo = j.value("real_data_lo", l.real_data_lo);
    l.real_data_hi = j.value("real_data_hi", l.real_data_hi);
    return l;
}

}  // namespace

json RunConfig::to_json() const {
    json j{{"valid_count_target", valid_count_target},
           {"proposal_trials", proposal_trials},
           {"solver_trials", solver_trials},
           {"lemma_band", lemma_band},
           {"lift_band", lift_band},
           {"similarity_threshold", similarity_threshold},
           {"novelty_filter", novelty_filter},
           {"max_attempts", max_attempts},
           {"global_iterations", global_iterations},
           {"seeds", seeds},
           {"axis_mode", axis_mode == AxisMode::both ? "both" : "f_only"},
           {"curriculum", to_string(curriculum)},
           {"joint_real_data", joint_real_data},
           {"batch_size", batch_size},
           {"goalpost_eval_samples", goalpost_eval_samples},
           {"goalpost_eval_every", goalpost_eval_every},
           {"timeout_ms", timeout_ms},
           {"validity_repeats", validity_repeats},
           {"parallelism", parallelism},
           {"transport_retries", transport_retries},
           {"train_temperature", train_temperature},
           {"eval_temperature", eval_temperature},
           {"embed_dim", embed_dim},
           {"deny_list", deny_list},
           {"policy", endpoint_to_json(policy)},
           {"trainer", endpoint_to_json(trainer)},
           {"executor", endpoint_to_json(executor)},
           {"embedder", endpoint_to_json(embedder)},
           {"lab", lab_to_json(lab)},
           {"out_dir", out_dir.string()}};
    if (goalposts_path) j["goalposts_path"] = goalposts_path->string();
    if (real_data_path) j["real_data_path"] = real_data_path->string();
    if (templates_path) j["templates_path"] = templates_path->string();
    return j;
}

RunConfig RunConfig::from_json(const json& j) {
    RunConfig c;
    try {
        c.valid_count_target = j.value("valid_count_target", c.valid_count_target);
        c.proposal_trials = j.value("proposal_trials", c.proposal_trials);
        c.solver_trials = j.value("solver_trials", c.solver_trials);
        if (j.contains("lemma_band")) c.lemma_band = j["lemma_band"].get<std::array<double, 2>>();
        if (j.contains("lift_band")) c.lift_band = j["lift_band"].get<std::array<double, 2>>();
        c.similarity_threshold = j.value("similarity_threshold", c.similarity_threshold);
        c.novelty_filter = j.value("novelty_filter", c.novelty_filter);
        c.max_attempts = j.value("max_attempts", c.max_attempts);
        c.global_iterations = j.value("global_iterations", c.global_iterations);
        if (j.contains("seeds")) c.seeds = j["seeds"].get<std::vector<int>>();
        if (j.contains("axis_mode"))
            c.axis_mode = j["axis_mode"].get<std::string>() == "f_only" ? AxisMode::f_only
                                                                        : AxisMode::both;
        if (j.contains("curriculum"))
            c.curriculum = curriculum_from_string(j["curriculum"].get<std::string>());
        c.joint_real_data = j.value("joint_real_data", c.joint_real_data);
        c.batch_size = j.value("batch_size", c.batch_size);
        c.goalpost_eval_samples = j.value("goalpost_eval_samples", c.goalpost_eval_samples);
        c.goalpost_eval_every = j.value("goalpost_eval_every", c.goalpost_eval_every);
        c.timeout_ms = j.value("timeout_ms", c.timeout_ms);
        c.validity_repeats = j.value("validity_repeats", c.validity_repeats);
        c.parallelism = j.value("parallelism", c.parallelism);
        c.transport_retries = j.value("transport_retries", c.transport_retries);
        c.train_temperature = j.value("train_temperature", c.train_temperature);
        c.eval_temperature = j.value("eval_temperature", c.eval_temperature);
        c.embed_dim = j.value("embed_dim", c.embed_dim);
        if (j.contains("deny_list"))
            c.deny_list = j["deny_list"].get<std::vector<std::string>>();
        c.policy = endpoint_from_json(j.value("policy", json()), c.policy);
        c.trainer = endpoint_from_json(j.value("trainer", json()), c.trainer);
        c.executor = endpoint_from_json(j.value("executor", json()), c.executor);
        c.embedder = endpoint_from_json(j.value("embedder", json()), c.embedder);
        c.lab = lab_from_json(j.value("lab", json()));
        if (j.contains("out_dir")) c.out_dir = j["out_dir"].get<std::string>();
        if (j.contains("goalposts_path"))
            c.goalposts_path = j["goalposts_path"].get<std::string>();
        if (j.contains("real_data_path"))
            c.real_data_path = j["real_data_path"].get<std::string>();
        if (j.contains("templates_path"))
            c.templates_path = j["templates_path"].get<std::string>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad config: ") + e.what());
    }
    return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config: " + path.string());
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw ConfigError("config is not valid JSON: " + path.string());
    return from_json(j);
}

}  // namespace gasp
