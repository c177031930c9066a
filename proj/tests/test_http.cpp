#include <doctest.h>

#include <atomic>
#include <thread>

#include <httplib.h>

#include "gasp/evaluation.hpp"
#include "gasp/http.hpp"
#include "gasp/lab.hpp"

using namespace gasp;
using nlohmann::json;

namespace {

// In-process endpoint for exercising the wire contracts.
struct TestServer {
    httplib::Server server;
    std::thread thread;
    int port = 0;

    explicit TestServer() = default;

    void start() {
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }

    std::string url() const { return "http://127.0.0.1:" + std::to_string(port); }

    ~TestServer() {
        server.stop();
        if (thread.joinable()) thread.join();
    }
};

}  // namespace

TEST_CASE("policy client speaks the v1 generate contract") {
    TestServer ts;
    json seen;
    ts.server.Post("/generate", [&](const httplib::Request& req, httplib::Response& res) {
        seen = json::parse(req.body);
        res.set_content(json{{"text", "(+ x 1)"}}.dump(), "application/json");
    });
    ts.start();

    auto templates = std::make_shared<TemplateSet>(TemplateSet::builtin_defaults());
    HttpPolicyClient client(ts.url(), "v1", templates);

    GenerateRequest req;
    req.role = PolicyRole::teacher;
    req.template_id = "lemma_from_goalpost";
    req.variables = {{"goalpost", "find the path count"}, {"axis", "f"}};
    req.sampling = {1.0, 42};
    GenerateResponse resp = client.generate(req);

    CHECK(resp.text == "(+ x 1)");
    CHECK(seen.at("version") == "v1");
    CHECK(seen.at("role") == "teacher");
    CHECK(seen.at("template_id") == "lemma_from_goalpost");
    CHECK(seen.at("variables").at("axis") == "f");
    CHECK(seen.at("sampling").at("seed") == 42);
    CHECK(seen.at("sampling").at("temperature") == 1.0);
    // Rendered prompt included for template-aware endpoints.
    const std::string prompt = seen.at("prompt").get<std::string>();
    CHECK(prompt.find("find the path count") != std::string::npos);
    CHECK(prompt.find("{{goalpost}}") == std::string::npos);
}

TEST_CASE("policy client maps failures to TransportError") {
    TestServer ts;
    ts.server.Post("/generate", [](const httplib::Request&, httplib::Response& res) {
        res.status = 500;
    });
    ts.start();
    HttpPolicyClient client(ts.url());
    GenerateRequest req;
    CHECK_THROWS_AS(client.generate(req), TransportError);

    HttpPolicyClient nowhere("http://127.0.0.1:1");
    CHECK_THROWS_AS(nowhere.generate(req), TransportError);
}

TEST_CASE("trainer client posts batches and reads the ack") {
    TestServer ts;
    json seen;
    ts.server.Post("/update", [&](const httplib::Request& req, httplib::Response& res) {
        seen = json::parse(req.body);
        res.set_content(json{{"ack", true}, {"version", "trainer-7"}}.dump(),
                        "application/json");
    });
    ts.start();

    HttpTrainerClient client(ts.url());
    std::vector<TrainItem> items{{{{"proposal_id", "p1"}, {"p", 0.4}}, 0.9},
                                 {{{"proposal_id", "p2"}}, -0.5}};
    TrainAck ack = client.update(TrainPhase::lemma, items);
    CHECK(ack.ok);
    CHECK(ack.version == "trainer-7");
    CHECK(seen.at("phase") == "lemma");
    REQUIRE(seen.at("items").size() == 2);
    CHECK(seen["items"][0].at("reward") == 0.9);
    CHECK(seen["items"][1].at("payload").at("proposal_id") == "p2");
}

TEST_CASE("executor client maps statuses and outages") {
    TestServer ts;
    ts.server.Post("/run", [](const httplib::Request& req, httplib::Response& res) {
        json body = json::parse(req.body);
        const std::string program = body.at("program").get<std::string>();
        json out;
        if (program == "ok")
            out = {{"status", "ok"}, {"output", body.at("input").get<int>() * 2}};
        else if (program == "slow")
            out = {{"status", "timeout"}, {"message", "deadline"}};
        else
            out = {{"status", "error"}, {"message", "boom"}};
        res.set_content(out.dump(), "application/json");
    });
    ts.start();

    HttpExecutorClient client(ts.url());
    ExecResult ok = client.run({"ok", 21, 1000});
    CHECK(ok.status == ExecStatus::ok);
    CHECK(ok.output == json(42));
    CHECK(client.run({"slow", 0, 1000}).status == ExecStatus::timeout);
    CHECK(client.run({"bad", 0, 1000}).status == ExecStatus::error);

    HttpExecutorClient nowhere("http://127.0.0.1:1");
    CHECK_THROWS_AS(nowhere.run({"ok", 1, 1000}), ExecutorUnavailable);
}

TEST_CASE("embedder client validates the dimension and finiteness") {
    TestServer ts;
    ts.server.Post("/embed", [](const httplib::Request& req, httplib::Response& res) {
        json body = json::parse(req.body);
        const std::string text = body.at("text").get<std::string>();
        if (text == "poison") {
            res.set_content(R"({"embedding": [1.0, null, 0.0, 0.0]})",
                            "application/json");
            return;
        }
        res.set_content(
            json{{"embedding", std::vector<double>(4, double(text.size()))}}.dump(),
            "application/json");
    });
    ts.start();

    HttpEmbedderClient good(ts.url(), 4);
    CHECK(good.embed("abc") == std::vector<double>(4, 3.0));

    HttpEmbedderClient mismatched(ts.url(), 8);
    CHECK_THROWS_AS(mismatched.embed("abc"), TransportError);

    CHECK_THROWS_AS(good.embed("poison"), TransportError);
}

TEST_CASE("a remote executor carries a full estimate end to end") {
    // Serve the real interpreter behind the wire contract and run a pass-rate
    // estimate through the HTTP client.
    TestServer ts;
    ExprExecutor backend;
    ts.server.Post("/run", [&](const httplib::Request& req, httplib::Response& res) {
        json body = json::parse(req.body);
        ExecResult r = backend.run({body.at("program").get<std::string>(),
                                    body.at("input"),
                                    body.at("timeout_ms").get<int>()});
        json out{{"status", r.status == ExecStatus::ok        ? "ok"
                            : r.status == ExecStatus::timeout ? "timeout"
                                                              : "error"},
                 {"message", r.message}};
        if (r.ok()) out["output"] = r.output;
        res.set_content(out.dump(), "application/json");
    });
    ts.start();

    HttpExecutorClient remote(ts.url());
    std::vector<Example> ex;
    for (int i = 0; i < 5; ++i) {
        json list = json::array({i, i + 2, 7 * i});
        json sum = 9 * i + 2;
        ex.push_back({list, sum});
    }
    TaskSpec task = make_induction_task("remote-task", "sum the list", "(sum x)",
                                        std::move(ex), 2, &remote);
    FixedProbabilityStudent perfect(1.0, "(sum x)", "(+ x 1)");
    Rng rng(3);
    EstimateResult est = estimate_pass_rate(perfect, task, 6, rng, remote);
    REQUIRE(est.ok());
    CHECK(est.estimate->rate == 1.0);

    // Validity checks on the remote executor behave like the local one.
    CHECK(check_proposal(task.to_json().dump(), remote).validity.ok());
}

TEST_CASE("bearer credentials ride along as an Authorization header") {
    TestServer ts;
    std::string auth_seen;
    ts.server.Post("/update", [&](const httplib::Request& req, httplib::Response& res) {
        auth_seen = req.get_header_value("Authorization");
        res.set_content(json{{"ack", true}, {"version", "v1"}}.dump(),
                        "application/json");
    });
    ts.start();

    HttpTrainerClient client(ts.url(), "v1", 30000, "sekrit-token");
    std::vector<TrainItem> items;
    client.update(TrainPhase::solver, items);
    CHECK(auth_seen == "Bearer sekrit-token");

    setenv("GASP_API_TOKEN", "from-env", 1);
    CHECK(gasp_bearer_from_env() == "from-env");
    unsetenv("GASP_API_TOKEN");
    CHECK(gasp_bearer_from_env().empty());
}

TEST_CASE("template rendering substitutes every occurrence") {
    TemplateSet set = TemplateSet::builtin_defaults();
    CHECK(set.contains("lift_from_lemma"));
    const std::string out =
        set.render("lift_from_lemma", {{"lemma", "count the ripples"}});
    CHECK(out.find("count the ripples") != std::string::npos);
    CHECK(out.find("{{lemma}}") == std::string::npos);
    CHECK_THROWS(set.render("nope", {}));
}
