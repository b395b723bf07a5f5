#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "scm/error.hpp"
#include "scm/json.hpp"
#include "scm/service.hpp"
#include "scm/snapshot.hpp"

#include <httplib.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>
#include <vector>

using namespace scm;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("scm-service-" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

struct Fixture {
    std::shared_ptr<SimulatedClock> clock = std::make_shared<SimulatedClock>();
    std::shared_ptr<Engine> engine;
    std::unique_ptr<Service> service;
    int port = 0;

    explicit Fixture(EngineConfig cfg = {}, ServiceOptions opts = {}) {
        engine = std::make_shared<Engine>(cfg, clock);
        opts.port = 0;
        opts.simulated_clock = true;
        service = std::make_unique<Service>(engine, clock, opts);
        port = service->start();
    }

    httplib::Client client() const {
        httplib::Client c("127.0.0.1", port);
        c.set_read_timeout(30, 0);
        return c;
    }

    std::pair<int, json> post(const std::string& path, const json& body) const {
        auto res = client().Post(path, body.dump(), "application/json");
        REQUIRE(res);
        return {res->status, json::parse(res->body)};
    }

    std::pair<int, json> get(const std::string& path) const {
        auto res = client().Get(path);
        REQUIRE(res);
        return {res->status, json::parse(res->body)};
    }
};

std::vector<std::string> lines_of(const std::string& path) {
    std::ifstream in(path);
    std::vector<std::string> out;
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}

}  // namespace

TEST_CASE("health and stats on a fresh engine") {
    Fixture f;
    auto [hs, health] = f.get("/v1/health");
    CHECK(hs == 200);
    CHECK(health.at("status") == "ok");
    CHECK(health.at("simulated_clock") == true);

    auto [ss, stats] = f.get("/v1/stats");
    CHECK(ss == 200);
    CHECK(stats.at("concepts") == 11);
    CHECK(stats.at("edges") == 10);
    CHECK(stats.at("wm_size") == 0);
}

TEST_CASE("messages, queries and the self endpoint") {
    EngineConfig cfg;
    cfg.auto_sleep = false;
    Fixture f(cfg);
    auto [ms, report] = f.post("/v1/messages", json{{"text", "I live in Mumbai"}});
    CHECK(ms == 200);
    json mumbai;
    for (const auto& c : report.at("concepts")) {
        if (c.at("label") == "Mumbai") mumbai = c;
    }
    REQUIRE(mumbai.is_object());
    CHECK(mumbai.at("ctype") == "location");
    CHECK(report.at("sleep").is_null());

    auto [qs, q] = f.get("/v1/query?q=where%20do%20I%20live&k=3");
    CHECK(qs == 200);
    REQUIRE_FALSE(q.at("hits").empty());
    CHECK(q.at("hits")[0].at("label") == "Mumbai");
    const auto& hit = q.at("hits")[0];
    CHECK(hit.at("score").get<double>() ==
          doctest::Approx(0.5 * hit.at("semantic").get<double>() + 0.3 * hit.at("importance").get<double>() +
                          0.2 * hit.at("graph_proximity").get<double>())
              .epsilon(1e-12));

    auto [sf, self] = f.get("/v1/self?q=what%20can%20you%20do");
    CHECK(sf == 200);
    CHECK(self.at("capabilities").size() == 10);
    CHECK(self.at("counters").at("messages_processed") == 1);
    CHECK(self.at("summary").get<std::string>().find("answer queries") != std::string::npos);
}

TEST_CASE("forced sleep returns a report") {
    Fixture f;
    auto [st, report] = f.post("/v1/sleep", json{{"force", true}});
    CHECK(st == 200);
    CHECK(report.at("trigger").at("reason") == "manual");
    CHECK(report.contains("theta_f"));
    CHECK(report.at("concepts_forgotten") == 0);
    CHECK(f.engine->counters().sleep_cycles_completed == 1);
}

TEST_CASE("messages during a running sleep get 409") {
    Fixture f;
    std::atomic<int> inner_status{0};
    std::string inner_body;
    f.engine->set_sleep_observer([&](std::string_view phase) {
        if (phase != "nrem") return;
        auto res = f.client().Post("/v1/messages", R"({"text":"I live in Paris"})", "application/json");
        if (res) {
            inner_status = res->status;
            inner_body = res->body;
        }
    });
    auto [st, report] = f.post("/v1/sleep", json{{"force", true}});
    CHECK(st == 200);
    CHECK(inner_status.load() == 409);
    CHECK(json::parse(inner_body).at("error") == "busy");
    CHECK(f.engine->counters().messages_processed == 0);
}

TEST_CASE("concurrent posts are all counted") {
    EngineConfig cfg;
    cfg.auto_sleep = false;
    Fixture f(cfg);
    constexpr int kThreads = 8;
    constexpr int kPerThread = 6;
    std::atomic<int> ok{0};
    std::vector<std::thread> threads;
    for (int t = 0; t < kThreads; ++t) {
        threads.emplace_back([&, t] {
            auto c = f.client();
            for (int i = 0; i < kPerThread; ++i) {
                const json body{{"text", "I work at Company" + std::to_string(t * 100 + i)}};
                auto res = c.Post("/v1/messages", body.dump(), "application/json");
                if (res && res->status == 200) ++ok;
            }
        });
    }
    for (auto& th : threads) th.join();
    CHECK(ok.load() == kThreads * kPerThread);
    CHECK(f.engine->counters().messages_processed == kThreads * kPerThread);
}

TEST_CASE("concurrent posts with automatic sleep stay consistent") {
    Fixture f;
    std::atomic<int> ok{0};
    std::vector<std::thread> threads;
    for (int t = 0; t < 6; ++t) {
        threads.emplace_back([&, t] {
            auto c = f.client();
            for (int i = 0; i < 8; ++i) {
                const json body{{"text", "I like topic" + std::to_string(t * 100 + i)}};
                auto res = c.Post("/v1/messages", body.dump(), "application/json");
                if (res && res->status == 200) ++ok;
                else CHECK((res && res->status == 409));
            }
        });
    }
    for (auto& th : threads) th.join();
    CHECK(f.engine->counters().messages_processed == static_cast<std::uint64_t>(ok.load()));
}

TEST_CASE("forgetting is in the audit log before the sleep response") {
    TempDir dir;
    ServiceOptions opts;
    opts.audit_log_path = dir.file("audit.jsonl");
    Fixture f(EngineConfig{}, opts);
    for (int i = 0; i < 10; ++i) {
        f.engine->inject(Injection{"noise item " + std::to_string(i), ConceptType::kFact, "", 0.03, false});
    }
    f.engine->inject(Injection{"keeper", ConceptType::kFact, "", 0.9, false});
    auto [as, adv] = f.post("/v1/clock/advance", json{{"hours", 336}});
    CHECK(as == 200);

    auto [st, report] = f.post("/v1/sleep", json{{"force", true}});
    REQUIRE(st == 200);
    CHECK(report.at("concepts_forgotten").get<int>() > 0);
    const auto lines = lines_of(opts.audit_log_path);
    REQUIRE(lines.size() == 1);
    const json logged = json::parse(lines.back());
    CHECK(logged.at("event") == "sleep");
    CHECK(logged.at("report").at("forgotten_ids") == report.at("forgotten_ids"));
}

TEST_CASE("graph endpoint respects the limit") {
    Fixture f;
    auto [st, g] = f.get("/v1/graph");
    CHECK(st == 200);
    CHECK(g.at("nodes").size() == 11);
    CHECK(g.at("edges").size() == 10);
    CHECK(g.at("nodes")[0].at("label") == "SCM");

    auto [st3, g3] = f.get("/v1/graph?limit=3");
    CHECK(st3 == 200);
    CHECK(g3.at("nodes").size() == 3);
    CHECK(g3.at("edges").size() == 2);
    CHECK(g3.at("total_nodes") == 11);
}

TEST_CASE("snapshot save and load swap the engine") {
    TempDir dir;
    EngineConfig cfg;
    cfg.auto_sleep = false;
    Fixture f(cfg);
    f.post("/v1/messages", json{{"text", "My name is Asha"}});
    const std::string path = dir.file("snap.json");
    auto [ss, saved] = f.post("/v1/snapshot/save", json{{"path", path}});
    CHECK(ss == 200);
    CHECK(saved.at("bytes").get<std::size_t>() == fs::file_size(path));

    f.post("/v1/messages", json{{"text", "I live in Lima"}});
    CHECK(f.get("/v1/stats").second.at("concepts") == 14);

    auto [ls, loaded] = f.post("/v1/snapshot/load", json{{"path", path}});
    CHECK(ls == 200);
    CHECK(loaded.at("concepts") == 12);
    CHECK(f.get("/v1/stats").second.at("concepts") == 12);
    CHECK(f.get("/v1/self").second.at("counters").at("messages_processed") == 1);
}

TEST_CASE("errors carry a kind and a status") {
    TempDir dir;
    Fixture f;
    auto res = f.client().Post("/v1/messages", "{not json", "application/json");
    REQUIRE(res);
    CHECK(res->status == 400);
    CHECK(json::parse(res->body).at("error") == "invalid_argument");

    CHECK(f.post("/v1/messages", json{{"text", ""}}).first == 400);
    CHECK(f.post("/v1/messages", json{{"txt", "hello"}}).first == 400);
    CHECK(f.get("/v1/query").first == 400);
    CHECK(f.get("/v1/query?q=x&k=-1").first == 400);

    auto [nf, nfb] = f.get("/v1/nothing-here");
    CHECK(nf == 404);
    CHECK(nfb.at("error") == "not_found");

    auto [ms, msb] = f.post("/v1/snapshot/load", json{{"path", dir.file("missing.json")}});
    CHECK(ms == 404);
    CHECK(msb.at("error") == "not_found");

    {
        std::ofstream out(dir.file("bad.json"));
        out << "{\"version\":";
    }
    CHECK(f.post("/v1/snapshot/load", json{{"path", dir.file("bad.json")}}).first == 422);
    {
        std::ofstream out(dir.file("future.json"));
        out << "{\"version\":999}";
    }
    auto [fs_, fb] = f.post("/v1/snapshot/load", json{{"path", dir.file("future.json")}});
    CHECK(fs_ == 422);
    CHECK(fb.at("error") == "unsupported_version");
    CHECK(f.get("/v1/stats").second.at("concepts") == 11);
}

TEST_CASE("clock control needs a simulated clock") {
    auto clock = make_clock(false);
    auto engine = std::make_shared<Engine>(EngineConfig{}, clock);
    ServiceOptions opts;
    opts.port = 0;
    Service service(engine, clock, opts);
    const int port = service.start();
    httplib::Client c("127.0.0.1", port);
    auto res = c.Post("/v1/clock/advance", R"({"hours":1})", "application/json");
    REQUIRE(res);
    CHECK(res->status == 400);
}

TEST_CASE("CORS headers are sent") {
    Fixture f;
    auto res = f.client().Get("/v1/health");
    REQUIRE(res);
    CHECK(res->get_header_value("Access-Control-Allow-Origin") == "*");
    auto pre = f.client().Options("/v1/messages");
    REQUIRE(pre);
    CHECK(pre->status == 204);
}

TEST_CASE("a taken port fails at startup") {
    Fixture f;
    auto clock = std::make_shared<SimulatedClock>();
    ServiceOptions opts;
    opts.port = f.port;
    Service second(std::make_shared<Engine>(EngineConfig{}, clock), clock, opts);
    try {
        second.bind();
        FAIL("expected bind to fail");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::kIo);
    }
}

TEST_CASE("environment configures the service") {
    ::setenv("SCM_PORT", "9123", 1);
    ::setenv("SCM_SIMULATED_CLOCK", "true", 1);
    ::setenv("SCM_AUDIT_LOG_PATH", "/tmp/a.jsonl", 1);
    ::setenv("SCM_SNAPSHOT_PATH", "/tmp/s.json", 1);
    const auto o = ServiceOptions::from_env();
    CHECK(o.port == 9123);
    CHECK(o.simulated_clock);
    CHECK(o.audit_log_path == "/tmp/a.jsonl");
    CHECK(o.snapshot_path == "/tmp/s.json");
    ::setenv("SCM_PORT", "eighty", 1);
    CHECK_THROWS_AS(ServiceOptions::from_env(), Error);
    for (const char* k : {"SCM_PORT", "SCM_SIMULATED_CLOCK", "SCM_AUDIT_LOG_PATH", "SCM_SNAPSHOT_PATH"}) ::unsetenv(k);
}

TEST_CASE("a periodic tick runs triggered sleeps") {
    auto clock = std::make_shared<SimulatedClock>();
    auto engine = std::make_shared<Engine>(EngineConfig{}, clock);
    ServiceOptions opts;
    opts.port = 0;
    opts.tick_seconds = 0.02;
    Service service(engine, clock, opts);
    service.start();
    clock->advance_hours(25.0);
    for (int i = 0; i < 200 && engine->counters().sleep_cycles_completed == 0; ++i) {
        std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    CHECK(engine->counters().sleep_cycles_completed >= 1);
}
