#include "scm/benchmark.hpp"
#include "scm/engine.hpp"
#include "scm/error.hpp"
#include "scm/json.hpp"
#include "scm/service.hpp"
#include "scm/snapshot.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace scm;

namespace {

void print_hits(const std::vector<QueryHit>& hits) {
    for (const auto& h : hits) {
        std::printf("  %-24s %-10s score %.3f (sem %.3f, imp %.3f, prox %.3f)\n", h.label.c_str(),
                    std::string(to_string(h.ctype)).c_str(), h.hit.fused_score, h.hit.semantic, h.hit.importance,
                    h.hit.graph_proximity);
    }
}

void print_sleep(const SleepReport& r) { std::cout << json(r).dump(2) << "\n"; }

std::unique_ptr<Engine> open_engine(const std::string& path, const std::shared_ptr<Clock>& clock,
                                    const EngineConfig& config) {
    if (!path.empty() && std::filesystem::exists(path)) return load_engine(path, clock);
    return std::make_unique<Engine>(config, clock);
}

// ─── chat ──────────────────────────────────────────────────────

int chat(const std::string& snapshot, bool simulated, const EngineConfig& config) {
    auto clock = make_clock(simulated);
    std::unique_ptr<Engine> engine = open_engine(snapshot, clock, config);
    std::cout << "scm chat. Type text, or :sleep :stats :self :save [path] :load [path] :advance <hours> :quit\n";

    std::string line;
    while (std::cout << "> " << std::flush, std::getline(std::cin, line)) {
        std::istringstream words(line);
        std::string cmd;
        words >> cmd;
        std::string arg;
        std::getline(words >> std::ws, arg);
        try {
            if (cmd.empty()) continue;
            if (cmd == ":quit" || cmd == ":q") break;
            if (cmd == ":sleep") {
                print_sleep(engine->sleep());
            } else if (cmd == ":stats") {
                std::cout << json(engine->stats()).dump(2) << "\n";
            } else if (cmd == ":self") {
                std::cout << engine->introspect(arg) << "\n";
            } else if (cmd == ":save") {
                const std::string path = arg.empty() ? snapshot : arg;
                std::cout << "saved " << save_snapshot(*engine, path) << " bytes to " << path << "\n";
            } else if (cmd == ":load") {
                const std::string path = arg.empty() ? snapshot : arg;
                engine = load_engine(path, clock);
                std::cout << "loaded " << engine->stats().concepts << " concepts from " << path << "\n";
            } else if (cmd == ":advance") {
                if (!simulated) fail(ErrorKind::kInvalidArgument, ":advance needs --simulated-clock");
                engine->advance_clock(std::stod(arg));
                std::cout << "clock now " << json(engine->now()).dump() << "\n";
            } else if (cmd[0] == ':') {
                std::cout << "unknown command " << cmd << "\n";
            } else {
                const IngestReport r = engine->process_message(line);
                for (const auto& c : r.concepts) {
                    std::printf("  %s %-24s %-10s importance %.3f\n", c.is_new ? "+" : "~", c.label.c_str(),
                                std::string(to_string(c.ctype)).c_str(), c.importance);
                }
                if (r.sleep) {
                    std::cout << "  slept (" << to_string(r.sleep->trigger.reason) << "), forgot "
                              << r.sleep->concepts_forgotten << "\n";
                }
                print_hits(engine->query(line, 3));
            }
        } catch (const std::exception& e) {
            std::cout << "error: " << e.what() << "\n";
        }
    }
    if (!snapshot.empty()) save_snapshot(*engine, snapshot);
    return 0;
}

// ─── serve ─────────────────────────────────────────────────────

int serve(ServiceOptions options, const EngineConfig& config) {
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    auto clock = make_clock(options.simulated_clock);
    std::shared_ptr<Engine> engine = open_engine(options.snapshot_path, clock, config);
    if (!options.audit_log_path.empty()) engine->set_audit_log(options.audit_log_path);
    Service service(engine, clock, options);
    const int port = service.start();
    std::cerr << "scm: listening on " << options.host << ":" << port << "\n";

    int sig = 0;
    sigwait(&signals, &sig);
    service.stop();
    if (!options.snapshot_path.empty()) {
        save_snapshot(*service.engine(), options.snapshot_path);
        std::cerr << "scm: saved " << options.snapshot_path << "\n";
    }
    return 0;
}

// ─── bench ─────────────────────────────────────────────────────

int run_bench(const std::string& suite, std::size_t runs, const std::string& csv_path, bool timings,
          const bench::BenchContext& ctx) {
    std::vector<std::string> ids;
    if (suite == "all") {
        ids = bench::test_ids();
    } else {
        ids.push_back(suite);
    }
    std::vector<bench::CsvRow> rows;
    bool all = true;
    std::printf("%-14s %-6s %s\n", "Test", "Result", "Metric");
    for (const auto& id : ids) {
        bool pass = true;
        bench::TestResult last;
        for (std::size_t run = 1; run <= runs; ++run) {
            last = bench::run_test(id, ctx);
            pass = pass && last.pass;
            rows.push_back(bench::to_row(last, run));
        }
        all = all && pass;
        std::printf("%-14s %-6s %s\n", id.c_str(), pass ? "PASS" : "FAIL", last.metric.c_str());
    }
    if (!csv_path.empty()) {
        std::ofstream out(csv_path, std::ios::binary);
        if (!out) fail(ErrorKind::kIo, "cannot write " + csv_path);
        out << bench::to_csv(rows, timings);
    }
    return all ? 0 : 1;
}

void print_outcome(const std::string& label, const bench::Outcome& o) {
    std::printf("%-10s recall %2zu/%zu  ltm %3zu  noise retained %2zu/%zu\n", label.c_str(), o.recalled, o.probes,
                o.ltm_size, o.noise_retained, o.noise_total);
}

int baseline(const std::string& which, const bench::BenchContext& ctx) {
    const auto full = bench::run_baseline("full", ctx);
    std::vector<std::string> kinds = which == "all" ? bench::kBackends : std::vector<std::string>{which};
    bool all = true;
    for (const auto& kind : kinds) {
        const auto row = kind == "full" ? full : bench::run_baseline(kind, ctx);
        const auto check = bench::baseline_check(row, full);
        all = all && check.pass;
        print_outcome(kind, row.outcome);
        std::printf("%-10s %s  %s\n", "", check.pass ? "PASS" : "FAIL", check.detail.c_str());
    }
    return all ? 0 : 1;
}

int ablate(const std::string& which, const bench::BenchContext& ctx) {
    const auto full = bench::run_ablation("none", ctx);
    print_outcome("full", full.outcome);
    std::vector<std::string> kinds = which == "all" ? bench::kComponents : std::vector<std::string>{which};
    bool all = true;
    for (const auto& kind : kinds) {
        const auto row = bench::run_ablation(kind, ctx);
        const auto check = bench::ablation_check(row, full);
        all = all && check.pass;
        print_outcome("-" + kind, row.outcome);
        std::printf("%-10s %s  %s\n", "", check.pass ? "PASS" : "FAIL", check.detail.c_str());
    }
    return all ? 0 : 1;
}

int growth(std::size_t cycles, bool forgetting, const EngineConfig& config) {
    const auto series = bench::run_growth(cycles, forgetting, config);
    std::printf("cycle,concepts\n");
    for (std::size_t i = 0; i < series.size(); ++i) std::printf("%zu,%zu\n", i + 1, series[i]);
    const auto check = bench::growth_check(series, forgetting);
    std::printf("%s  %s\n", check.pass ? "PASS" : "FAIL", check.detail.c_str());
    return check.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sleep-consolidated memory engine"};
    app.require_subcommand(1);

    EngineConfig config;
    std::string data_dir = bench::default_data_dir();
    app.add_option("--seed", config.rng_seed, "RNG seed for dreaming and benchmark noise");

    std::string snapshot = default_snapshot_path();
    bool simulated = false;
    auto* chat_cmd = app.add_subcommand("chat", "Interactive session");
    chat_cmd->add_option("--snapshot", snapshot, "Snapshot loaded at start and saved at exit");
    chat_cmd->add_flag("--simulated-clock", simulated, "Use a manually advanced clock");

    ServiceOptions service_opts = ServiceOptions::from_env();
    auto* serve_cmd = app.add_subcommand("serve", "HTTP JSON service");
    serve_cmd->add_option("--host", service_opts.host);
    serve_cmd->add_option("--port", service_opts.port);
    serve_cmd->add_option("--snapshot", service_opts.snapshot_path);
    serve_cmd->add_option("--audit-log", service_opts.audit_log_path);
    serve_cmd->add_option("--tick-seconds", service_opts.tick_seconds, "Period of the background trigger check");
    serve_cmd->add_option("--cors-origin", service_opts.cors_origin);
    serve_cmd->add_flag("--simulated-clock", service_opts.simulated_clock);

    std::string suite = "all";
    std::size_t runs = 1;
    std::string csv;
    bool timings = false;
    auto* bench_cmd = app.add_subcommand("bench", "Run the benchmark suite");
    std::vector<std::string> suites{"all"};
    suites.insert(suites.end(), bench::test_ids().begin(), bench::test_ids().end());
    bench_cmd->add_option("--suite", suite)->check(CLI::IsMember(suites));
    bench_cmd->add_option("--runs", runs)->check(CLI::PositiveNumber);
    bench_cmd->add_option("--csv", csv, "Write per-run rows here");
    bench_cmd->add_flag("--timings", timings, "Include measured latency in the CSV");
    bench_cmd->add_option("--data-dir", data_dir);

    std::string backend = "all";
    auto* baseline_cmd = app.add_subcommand("baseline", "Compare memory backends on the conversation");
    std::vector<std::string> backends{"all"};
    backends.insert(backends.end(), bench::kBackends.begin(), bench::kBackends.end());
    baseline_cmd->add_option("--backend", backend)->check(CLI::IsMember(backends));
    baseline_cmd->add_option("--data-dir", data_dir);

    std::string component = "all";
    auto* ablate_cmd = app.add_subcommand("ablate", "Disable one component");
    std::vector<std::string> components{"all"};
    components.insert(components.end(), bench::kComponents.begin(), bench::kComponents.end());
    ablate_cmd->add_option("--disable", component)->check(CLI::IsMember(components));
    ablate_cmd->add_option("--data-dir", data_dir);

    std::size_t cycles = 20;
    std::string forgetting = "on";
    auto* growth_cmd = app.add_subcommand("growth", "Memory growth over repeated sleep cycles");
    growth_cmd->add_option("--cycles", cycles)->check(CLI::PositiveNumber);
    growth_cmd->add_option("--forgetting", forgetting)->check(CLI::IsMember({"on", "off"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help();
        return 2;
    }

    try {
        const bench::BenchContext ctx{config, data_dir, {}};
        if (*chat_cmd) return chat(snapshot, simulated, config);
        if (*serve_cmd) return serve(service_opts, config);
        if (*bench_cmd) return run_bench(suite, runs, csv, timings, ctx);
        if (*baseline_cmd) return baseline(backend, ctx);
        if (*ablate_cmd) return ablate(component, ctx);
        if (*growth_cmd) return growth(cycles, forgetting == "on", config);
    } catch (const Error& e) {
        std::cerr << "scm: " << to_string(e.kind()) << ": " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "scm: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
