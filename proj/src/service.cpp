#include "scm/service.hpp"

#include "scm/error.hpp"
#include "scm/json.hpp"
#include "scm/snapshot.hpp"

#include <httplib.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <set>
#include <vector>

namespace scm {

namespace {

using Handler = std::function<json(const httplib::Request&)>;

std::string env_or(const char* key, std::string fallback) {
    const char* v = std::getenv(key);
    return (v != nullptr && *v != '\0') ? std::string(v) : fallback;
}

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump() + "\n", "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view kind, const std::string& detail) {
    send_json(res, status, json{{"error", kind}, {"detail", detail}});
}

// Runs a handler and maps whatever it throws onto {error, detail}.
httplib::Server::Handler wrap(Handler h) {
    return [h = std::move(h)](const httplib::Request& req, httplib::Response& res) {
        try {
            send_json(res, 200, h(req));
        } catch (const Error& e) {
            send_error(res, http_status(e.kind()), to_string(e.kind()), e.what());
        } catch (const json::exception& e) {
            send_error(res, 400, to_string(ErrorKind::kInvalidArgument), e.what());
        } catch (const std::exception& e) {
            send_error(res, 500, to_string(ErrorKind::kInternal), e.what());
        }
    };
}

json body_of(const httplib::Request& req) {
    if (req.body.empty()) return json::object();
    json j;
    try {
        j = json::parse(req.body);
    } catch (const json::parse_error& e) {
        fail(ErrorKind::kInvalidArgument, std::string("malformed JSON body: ") + e.what());
    }
    if (!j.is_object()) fail(ErrorKind::kInvalidArgument, "request body must be a JSON object");
    return j;
}

std::size_t size_param(const httplib::Request& req, const char* name, std::size_t fallback) {
    if (!req.has_param(name)) return fallback;
    const std::string raw = req.get_param_value(name);
    std::size_t v = 0;
    const auto [end, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), v);
    if (ec != std::errc{} || end != raw.data() + raw.size()) {
        fail(ErrorKind::kInvalidArgument, std::string("parameter ") + name + " must be a non-negative integer");
    }
    return v;
}

json graph_view(const MemoryGraph& g, std::size_t limit) {
    std::vector<const Concept*> nodes;
    nodes.reserve(g.node_count());
    for (const auto& [id, c] : g.concepts()) nodes.push_back(&c);
    std::stable_sort(nodes.begin(), nodes.end(),
                     [](const Concept* a, const Concept* b) { return a->importance > b->importance; });
    if (nodes.size() > limit) nodes.resize(limit);

    json jn = json::array();
    std::set<ConceptId> kept;
    for (const Concept* c : nodes) {
        kept.insert(c->id);
        jn.push_back(json{{"id", c->id},
                          {"label", c->label},
                          {"ctype", to_string(c->ctype)},
                          {"importance", c->importance},
                          {"value", c->value},
                          {"access_count", c->access_count},
                          {"protected", c->is_protected}});
    }
    json je = json::array();
    for (const auto& [key, r] : g.relations()) {
        if (kept.count(r.src) == 0 || kept.count(r.dst) == 0) continue;
        je.push_back(json{{"src", r.src},
                          {"dst", r.dst},
                          {"predicate", to_string(r.predicate)},
                          {"strength", r.strength}});
    }
    return json{{"nodes", std::move(jn)},
                {"edges", std::move(je)},
                {"total_nodes", g.node_count()},
                {"total_edges", g.edge_count()}};
}

}  // namespace

int http_status(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::kInvalidArgument:
        case ErrorKind::kConfig: return 400;
        case ErrorKind::kPermission: return 403;
        case ErrorKind::kNotFound: return 404;
        case ErrorKind::kBusy: return 409;
        case ErrorKind::kUnsupportedVersion:
        case ErrorKind::kCorruptSnapshot:
        case ErrorKind::kIntegrity: return 422;
        case ErrorKind::kIo:
        case ErrorKind::kInternal: return 500;
    }
    return 500;
}

ServiceOptions ServiceOptions::from_env() {
    ServiceOptions o;
    const std::string port = env_or("SCM_PORT", "");
    if (!port.empty()) {
        int p = 0;
        const auto [end, ec] = std::from_chars(port.data(), port.data() + port.size(), p);
        if (ec != std::errc{} || end != port.data() + port.size() || p < 0 || p > 65535) {
            fail(ErrorKind::kConfig, "SCM_PORT is not a valid port: " + port);
        }
        o.port = p;
    }
    o.snapshot_path = default_snapshot_path();
    o.audit_log_path = env_or("SCM_AUDIT_LOG_PATH", "");
    const std::string sim = env_or("SCM_SIMULATED_CLOCK", "false");
    if (sim == "true" || sim == "1") {
        o.simulated_clock = true;
    } else if (sim != "false" && sim != "0") {
        fail(ErrorKind::kConfig, "SCM_SIMULATED_CLOCK must be true or false");
    }
    return o;
}

Service::Service(std::shared_ptr<Engine> engine, std::shared_ptr<Clock> clock, ServiceOptions options)
    : options_(std::move(options)), clock_(std::move(clock)), server_(std::make_unique<httplib::Server>()) {
    if (options_.snapshot_path.empty()) options_.snapshot_path = default_snapshot_path();
    install(std::move(engine));
    routes();
}

Service::~Service() { stop(); }

std::shared_ptr<Engine> Service::engine() const {
    std::lock_guard lock(engine_mu_);
    return engine_;
}

void Service::install(std::shared_ptr<Engine> engine) {
    if (!options_.audit_log_path.empty()) engine->set_audit_log(options_.audit_log_path);
    std::lock_guard lock(engine_mu_);
    engine_ = std::move(engine);
}

void Service::routes() {
    auto& s = *server_;

    // SO_REUSEADDR only: a second server on a live port must fail to bind.
    s.set_socket_options([](socket_t sock) {
        int yes = 1;
        ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const char*>(&yes), sizeof(yes));
    });

    if (!options_.cors_origin.empty()) {
        s.set_default_headers({{"Access-Control-Allow-Origin", options_.cors_origin},
                               {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                               {"Access-Control-Allow-Headers", "Content-Type"}});
        s.Options(R"(/v1/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
    }

    s.Get("/v1/health", wrap([this](const httplib::Request&) {
        auto e = engine();
        return json{{"status", "ok"},
                    {"sleeping", e->is_sleeping()},
                    {"simulated_clock", e->simulated_clock()},
                    {"now", e->now()}};
    }));

    s.Post("/v1/messages", wrap([this](const httplib::Request& req) {
        const json body = body_of(req);
        if (!body.contains("text") || !body.at("text").is_string()) {
            fail(ErrorKind::kInvalidArgument, "body must carry a string field \"text\"");
        }
        return json(engine()->process_message(body.at("text").get<std::string>()));
    }));

    s.Get("/v1/query", wrap([this](const httplib::Request& req) {
        if (!req.has_param("q")) fail(ErrorKind::kInvalidArgument, "missing query parameter q");
        const std::string q = req.get_param_value("q");
        const std::size_t k = size_param(req, "k", 5);
        return json{{"query", q}, {"k", k}, {"hits", engine()->query(q, k)}};
    }));

    s.Post("/v1/sleep", wrap([this](const httplib::Request& req) {
        const json body = body_of(req);
        const bool force = body.value("force", true);
        auto e = engine();
        if (force) return json(e->sleep(SleepTrigger::manual()));
        auto report = e->maybe_sleep();
        if (!report) return json{{"slept", false}};
        return json(*report);
    }));

    s.Get("/v1/self", wrap([this](const httplib::Request& req) {
        auto e = engine();
        const std::string q = req.has_param("q") ? req.get_param_value("q") : "";
        const std::string summary = e->introspect(q);
        return e->read([&](const MemoryGraph& g, const WorkingMemory&, const SelfState& self) {
            json caps = json::array();
            for (const auto& id : self.capability_ids) {
                if (const Concept* c = g.find(id)) caps.push_back(c->label);
            }
            json j{{"summary", summary}, {"counters", self.counters}, {"capabilities", std::move(caps)}};
            j["self_id"] = self.self_id.value.empty() ? json(nullptr) : json(self.self_id);
            return j;
        });
    }));

    s.Get("/v1/stats", wrap([this](const httplib::Request&) { return json(engine()->stats()); }));

    s.Get("/v1/graph", wrap([this](const httplib::Request& req) {
        const std::size_t limit = size_param(req, "limit", 500);
        return engine()->read([&](const MemoryGraph& g, const WorkingMemory&, const SelfState&) {
            return graph_view(g, limit);
        });
    }));

    s.Post("/v1/snapshot/save", wrap([this](const httplib::Request& req) {
        const json body = body_of(req);
        const std::string path = body.value("path", options_.snapshot_path);
        auto e = engine();
        if (e->is_sleeping()) fail(ErrorKind::kBusy, "a sleep cycle is running");
        const std::size_t bytes = save_snapshot(*e, path);
        return json{{"path", path}, {"bytes", bytes}};
    }));

    s.Post("/v1/snapshot/load", wrap([this](const httplib::Request& req) {
        const json body = body_of(req);
        const std::string path = body.value("path", options_.snapshot_path);
        std::lock_guard serial(load_mu_);
        if (engine()->is_sleeping()) fail(ErrorKind::kBusy, "a sleep cycle is running");
        std::shared_ptr<Engine> fresh = load_engine(path, clock_, options_.encoder);
        const EngineStats st = fresh->stats();
        install(std::move(fresh));
        return json{{"path", path}, {"concepts", st.concepts}, {"edges", st.edges}};
    }));

    s.Post("/v1/clock/advance", wrap([this](const httplib::Request& req) {
        auto e = engine();
        if (!e->simulated_clock()) fail(ErrorKind::kInvalidArgument, "clock control requires a simulated clock");
        const json body = body_of(req);
        if (!body.contains("hours") || !body.at("hours").is_number()) {
            fail(ErrorKind::kInvalidArgument, "body must carry a numeric field \"hours\"");
        }
        e->advance_clock(body.at("hours").get<double>());
        return json{{"now", e->now()}};
    }));

    s.set_error_handler([](const httplib::Request&, httplib::Response& res) {
        if (res.status == 404 && res.body.empty()) send_error(res, 404, to_string(ErrorKind::kNotFound), "no such endpoint");
    });
}

int Service::bind() {
    if (port_ >= 0) return port_;
    if (options_.port == 0) {
        port_ = server_->bind_to_any_port(options_.host);
    } else if (server_->bind_to_port(options_.host, options_.port)) {
        port_ = options_.port;
    }
    if (port_ < 0) {
        fail(ErrorKind::kIo, "cannot listen on " + options_.host + ":" + std::to_string(options_.port));
    }
    return port_;
}

void Service::run() {
    if (port_ < 0) fail(ErrorKind::kInvalidArgument, "run() before bind()");
    if (options_.tick_seconds > 0.0 && !ticker_.joinable()) ticker_ = std::thread([this] { tick_loop(); });
    server_->listen_after_bind();
}

int Service::start() {
    const int port = bind();
    listener_ = std::thread([this] { run(); });
    server_->wait_until_ready();
    return port;
}

void Service::stop() {
    {
        std::lock_guard lock(tick_mu_);
        stopping_ = true;
    }
    tick_cv_.notify_all();
    server_->stop();
    if (listener_.joinable()) listener_.join();
    if (ticker_.joinable()) ticker_.join();
}

void Service::tick_loop() {
    const auto period = std::chrono::duration<double>(options_.tick_seconds);
    std::unique_lock lock(tick_mu_);
    while (!tick_cv_.wait_for(lock, period, [this] { return stopping_; })) {
        lock.unlock();
        try {
            engine()->maybe_sleep();
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::kBusy) std::cerr << "scm: scheduled sleep failed: " << e.what() << "\n";
        } catch (const std::exception& e) {
            std::cerr << "scm: scheduled sleep failed: " << e.what() << "\n";
        }
        lock.lock();
    }
}

}  // namespace scm
