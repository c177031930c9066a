#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>

#include "gasp/embedding.hpp"
#include "gasp/executor.hpp"
#include "gasp/policy.hpp"

namespace gasp {

// Prompt templates are configuration data, not code constants. {{name}}
// placeholders interpolate from the request variables (strings verbatim,
// everything else as compact JSON).
class TemplateSet {
public:
    TemplateSet() = default;
    static TemplateSet load(const std::filesystem::path& path);
    static TemplateSet builtin_defaults();

    bool contains(const std::string& id) const;
    std::string render(const std::string& id, const nlohmann::json& variables) const;

private:
    std::map<std::string, std::string> templates_;
};

// Credentials for remote endpoints; sent as a bearer Authorization header
// when nonempty. gasp_bearer_from_env() reads GASP_API_TOKEN.
std::string gasp_bearer_from_env();

// POST {url}/generate with the v1 policy contract body; when templates are
// provided the rendered prompt rides along for endpoints that want plain
// text. Non-200 or malformed responses raise TransportError.
class HttpPolicyClient final : public PolicyHandle {
public:
    HttpPolicyClient(std::string url, std::string version = "v1",
                     std::shared_ptr<TemplateSet> templates = nullptr,
                     int timeout_ms = 30000, std::string bearer = "");
    GenerateResponse generate(const GenerateRequest& req) override;
    bool concurrent_safe() const override { return true; }

private:
    std::string url_;
    std::string version_;
    std::shared_ptr<TemplateSet> templates_;
    int timeout_ms_;
    std::string bearer_;
};

// POST {url}/update with {version, phase, items: [{payload, reward}]};
// expects {ack: true, version}.
class HttpTrainerClient final : public TrainerHook {
public:
    explicit HttpTrainerClient(std::string url, std::string version = "v1",
                               int timeout_ms = 30000, std::string bearer = "");
    TrainAck update(TrainPhase phase, std::span<const TrainItem> items) override;

private:
    std::string url_;
    std::string version_;
    int timeout_ms_;
    std::string bearer_;
};

// POST {url}/run with {program, input, timeout_ms}; expects
// {status: ok|error|timeout, output, message}. Transport problems raise
// ExecutorUnavailable so callers can tell an outage from a failing program.
class HttpExecutorClient final : public Executor {
public:
    explicit HttpExecutorClient(std::string url, int timeout_ms = 30000,
                                std::string bearer = "");
    ExecResult run(const ExecRequest& req) override;
    bool concurrent_safe() const override { return true; }

private:
    std::string url_;
    int timeout_ms_;
    std::string bearer_;
};

// POST {url}/embed with {text}; expects {embedding: [...]}.
class HttpEmbedderClient final : public Embedder {
public:
    HttpEmbedderClient(std::string url, int dimension, int timeout_ms = 30000,
                       std::string bearer = "");
    std::vector<double> embed(std::string_view text) override;
    int dimension() const override { return dim_; }

private:
    std::string url_;
    int dim_;
    int timeout_ms_;
    std::string bearer_;
};

}  // namespace gasp
