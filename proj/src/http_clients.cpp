#include "gasp/http.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>

#include <httplib.h>

namespace gasp {

using nlohmann::json;

namespace {

httplib::Client make_client(const std::string& url, int timeout_ms,
                            const std::string& bearer) {
    httplib::Client cli(url);
    cli.set_connection_timeout(0, timeout_ms * 1000);
    cli.set_read_timeout(timeout_ms / 1000, (timeout_ms % 1000) * 1000);
    cli.set_write_timeout(timeout_ms / 1000, (timeout_ms % 1000) * 1000);
    if (!bearer.empty()) cli.set_bearer_token_auth(bearer);
    return cli;
}

json post_json(const std::string& url, const std::string& path, const json& body,
               int timeout_ms, const char* what, const std::string& bearer = "") {
    httplib::Client cli = make_client(url, timeout_ms, bearer);
    auto res = cli.Post(path, body.dump(), "application/json");
    if (!res)
        throw TransportError(std::string(what) + ": " + url + path + " unreachable (" +
                             httplib::to_string(res.error()) + ")");
    if (res->status != 200)
        throw TransportError(std::string(what) + ": " + url + path + " returned " +
                             std::to_string(res->status));
    json parsed = json::parse(res->body, nullptr, false);
    if (parsed.is_discarded())
        throw TransportError(std::string(what) + ": non-JSON response body");
    return parsed;
}

}  // namespace

TemplateSet TemplateSet::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open templates: " + path.string());
    json j = json::parse(in);
    TemplateSet set;
    for (auto it = j.begin(); it != j.end(); ++it)
        set.templates_[it.key()] = it.value().get<std::string>();
    return set;
}

TemplateSet TemplateSet::builtin_defaults() {
    TemplateSet set;
    set.templates_ = {
        {"lemma_from_goalpost",
         "You are the task proposer. Here is a hard target question:\n"
         "{{goalpost}}\n"
         "Write an easier variant that keeps the same underlying idea but is "
         "solvable at an intermediate rate. Adjust difficulty along the "
         "{{axis}} axis. Reply with a JSON object: statement, function_source, "
         "examples (5 input/output pairs), public_count (2)."},
        {"one_step_from_goalpost",
         "You are the task proposer. Here is a hard target question:\n"
         "{{goalpost}}\n"
         "Write a {{variant}}-difficulty variant that keeps the same underlying "
         "idea. Adjust difficulty along the {{axis}} axis. Reply with a JSON "
         "object: statement, function_source, examples (5 input/output pairs), "
         "public_count (2)."},
        {"lift_from_lemma",
         "You are the task proposer. Here is a question:\n"
         "{{lemma}}\n"
         "Write a harder variant of it, increasing difficulty along the same "
         "axis it already varies on. Reply with a JSON object: statement, "
         "function_source, examples (5 input/output pairs), public_count (2)."},
        {"solve_induction",
         "Infer the underlying program from the examples and reply with the "
         "program only.\n{{task}}"},
        {"solve_deduction",
         "Predict the output of the program on the given input. Reply with the "
         "value only.\n{{task}}"},
        {"solve_abduction",
         "Find any input the program maps to the given output. Reply with the "
         "value only.\n{{task}}"}};
    return set;
}

bool TemplateSet::contains(const std::string& id) const {
    return templates_.count(id) > 0;
}

std::string TemplateSet::render(const std::string& id, const json& variables) const {
    auto it = templates_.find(id);
    if (it == templates_.end())
        throw std::runtime_error("unknown template id: " + id);
    std::string out = it->second;
    for (auto v = variables.begin(); v != variables.end(); ++v) {
        const std::string needle = "{{" + v.key() + "}}";
        const std::string value =
            v.value().is_string() ? v.value().get<std::string>() : v.value().dump();
        std::size_t pos = 0;
        while ((pos = out.find(needle, pos)) != std::string::npos) {
            out.replace(pos, needle.size(), value);
            pos += value.size();
        }
    }
    return out;
}

std::string gasp_bearer_from_env() {
    const char* token = std::getenv("GASP_API_TOKEN");
    return token != nullptr ? token : "";
}

HttpPolicyClient::HttpPolicyClient(std::string url, std::string version,
                                   std::shared_ptr<TemplateSet> templates,
                                   int timeout_ms, std::string bearer)
    : url_(std::move(url)),
      version_(std::move(version)),
      templates_(std::move(templates)),
      timeout_ms_(timeout_ms),
      bearer_(std::move(bearer)) {}

GenerateResponse HttpPolicyClient::generate(const GenerateRequest& req) {
    json body = req.to_json();
    body["version"] = version_;
    if (templates_ && templates_->contains(req.template_id))
        body["prompt"] = templates_->render(req.template_id, req.variables);
    json resp = post_json(url_, "/generate", body, timeout_ms_, "policy", bearer_);
    if (!resp.contains("text") || !resp["text"].is_string())
        throw TransportError("policy: response lacks text field");
    return {resp["text"].get<std::string>()};
}

HttpTrainerClient::HttpTrainerClient(std::string url, std::string version,
                                     int timeout_ms, std::string bearer)
    : url_(std::move(url)),
      version_(std::move(version)),
      timeout_ms_(timeout_ms),
      bearer_(std::move(bearer)) {}

TrainAck HttpTrainerClient::update(TrainPhase phase, std::span<const TrainItem> items) {
    json body{{"version", version_}, {"phase", to_string(phase)}};
    json arr = json::array();
    for (const TrainItem& it : items)
        arr.push_back({{"payload", it.payload}, {"reward", it.reward}});
    body["items"] = std::move(arr);
    json resp = post_json(url_, "/update", body, timeout_ms_, "trainer", bearer_);
    try {
        TrainAck ack;
        ack.ok = resp.value("ack", false);
        ack.version = resp.value("version", "");
        return ack;
    } catch (const json::exception& e) {
        throw TransportError(std::string("trainer: bad response: ") + e.what());
    }
}

HttpExecutorClient::HttpExecutorClient(std::string url, int timeout_ms,
                                       std::string bearer)
    : url_(std::move(url)), timeout_ms_(timeout_ms), bearer_(std::move(bearer)) {}

ExecResult HttpExecutorClient::run(const ExecRequest& req) {
    json body{{"program", req.program}, {"input", req.input},
              {"timeout_ms", req.timeout_ms}};
    json resp;
    try {
        resp = post_json(url_, "/run", body, timeout_ms_, "executor", bearer_);
    } catch (const TransportError& e) {
        throw ExecutorUnavailable(e.what());
    }
    try {
        const std::string status = resp.value("status", "error");
        ExecResult out;
        out.status = status == "ok"        ? ExecStatus::ok
                     : status == "timeout" ? ExecStatus::timeout
                                           : ExecStatus::error;
        if (resp.contains("output")) out.output = resp["output"];
        out.message = resp.value("message", "");
        return out;
    } catch (const json::exception& e) {
        throw ExecutorUnavailable(std::string("executor: bad response: ") + e.what());
    }
}

HttpEmbedderClient::HttpEmbedderClient(std::string url, int dimension,
                                       int timeout_ms, std::string bearer)
    : url_(std::move(url)),
      dim_(dimension),
      timeout_ms_(timeout_ms),
      bearer_(std::move(bearer)) {}

std::vector<double> HttpEmbedderClient::embed(std::string_view text) {
    json resp = post_json(url_, "/embed", json{{"text", std::string(text)}},
                          timeout_ms_, "embedder", bearer_);
    if (!resp.contains("embedding") || !resp["embedding"].is_array())
        throw TransportError("embedder: response lacks embedding array");
    std::vector<double> v;
    try {
        v = resp["embedding"].get<std::vector<double>>();
    } catch (const json::exception& e) {
        throw TransportError(std::string("embedder: bad embedding array: ") + e.what());
    }
    if (static_cast<int>(v.size()) != dim_)
        throw TransportError("embedder: dimension mismatch");
    for (double x : v)
        if (!std::isfinite(x)) throw TransportError("embedder: non-finite value");
    return v;
}

}  // namespace gasp
