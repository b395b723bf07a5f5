#include "scm/benchmark.hpp"

#include "scm/encoding.hpp"
#include "scm/error.hpp"
#include "scm/json.hpp"
#include "scm/memory_graph.hpp"
#include "scm/sleep_cycle.hpp"
#include "scm/snapshot.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <deque>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <unistd.h>

#ifndef SCM_SOURCE_DATA_DIR
#define SCM_SOURCE_DATA_DIR "data"
#endif

namespace scm::bench {

namespace fs = std::filesystem;

// ─── Scenarios ─────────────────────────────────────────────────

void Scenario::validate() const {
    std::set<std::string> known;
    for (const auto& turn : turns) {
        for (const auto& c : extract_rule_based(turn).concepts) known.insert(normalize_label(c.label));
    }
    for (const auto& p : important) known.insert(normalize_label(p.label));
    for (const auto& probe : probes) {
        if (known.count(normalize_label(probe.expect)) == 0) {
            fail(ErrorKind::kInvalidArgument,
                 "scenario " + name + ": probe expects \"" + probe.expect + "\" which nothing introduces");
        }
    }
    if (noise && noise->importance_min > noise->importance_max) {
        fail(ErrorKind::kInvalidArgument, "scenario " + name + ": empty noise importance range");
    }
}

Scenario parse_scenario(std::string_view json_text) {
    Scenario s;
    try {
        const json j = json::parse(json_text);
        s.name = j.at("name").get<std::string>();
        s.description = j.value("description", "");
        s.turns = j.value("turns", std::vector<std::string>{});
        for (const auto& p : j.value("probes", json::array())) {
            s.probes.push_back({p.at("query").get<std::string>(), p.at("expect").get<std::string>()});
        }
        s.probe_k = j.value("probe_k", std::size_t{3});
        for (const auto& p : j.value("important", json::array())) {
            Planted planted;
            planted.label = p.at("label").get<std::string>();
            planted.ctype = concept_type_from_string(p.value("ctype", "fact"));
            planted.importance = p.at("importance").get<double>();
            planted.touch = p.value("touch", false);
            s.important.push_back(std::move(planted));
        }
        if (j.contains("noise")) {
            const json& n = j.at("noise");
            NoiseSpec ns;
            ns.count = n.at("count").get<std::size_t>();
            ns.importance_min = n.value("importance_min", ns.importance_min);
            ns.importance_max = n.value("importance_max", ns.importance_max);
            ns.per_turn = n.value("per_turn", std::size_t{0});
            ns.as_episodes = n.value("as_episodes", false);
            ns.label_prefix = n.value("label_prefix", ns.label_prefix);
            s.noise = ns;
        }
        s.hours_between_turns = j.value("hours_between_turns", 0.0);
        s.aging_hours = j.value("aging_hours", 0.0);
        s.final_sleep = j.value("final_sleep", false);
        s.auto_sleep = j.value("auto_sleep", true);
    } catch (const json::exception& e) {
        fail(ErrorKind::kInvalidArgument, std::string("malformed scenario: ") + e.what());
    }
    s.validate();
    return s;
}

std::string default_data_dir() {
    const char* env = std::getenv("SCM_DATA_DIR");
    return (env != nullptr && *env != '\0') ? std::string(env) : std::string(SCM_SOURCE_DATA_DIR);
}

Scenario load_scenario(std::string_view name, const std::string& data_dir) {
    const fs::path path = fs::path(data_dir) / "scenarios" / (std::string(name) + ".json");
    std::ifstream in(path);
    if (!in) fail(ErrorKind::kNotFound, "no scenario file " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_scenario(text.str());
}

std::vector<NoiseItem> draw_noise(const NoiseSpec& ns, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<NoiseItem> out;
    out.reserve(ns.count);
    for (std::size_t i = 0; i < ns.count; ++i) {
        char label[64];
        std::snprintf(label, sizeof label, "%s %02zu", ns.label_prefix.c_str(), i + 1);
        const double t = ns.importance_min + (ns.importance_max - ns.importance_min) * unit_uniform(rng);
        out.push_back({label, t});
    }
    return out;
}

// ─── Backends ──────────────────────────────────────────────────

bool MemoryBackend::matches(std::string_view answer, std::string_view expect) const {
    return normalize_label(answer) == normalize_label(expect);
}

namespace {

const Concept* find_by_label(const MemoryGraph& g, std::string_view label) {
    const std::string want = normalize_label(label);
    for (const auto& [id, c] : g.concepts()) {
        if (normalize_label(c.label) == want) return &c;
    }
    return nullptr;
}

// Last seven episode texts, no long-term store.
class FifoBackend final : public MemoryBackend {
public:
    explicit FifoBackend(std::size_t capacity) : capacity_(capacity) {}

    std::string name() const override { return "fifo"; }

    void ingest(std::string_view text) override { push(std::string(text)); }

    std::vector<std::string> query(std::string_view, std::size_t) override {
        return {buffer_.rbegin(), buffer_.rend()};
    }

    void sleep() override {}
    std::size_t size() const override { return buffer_.size(); }
    void inject(const Injection& injection) override { push(injection.label); }
    void advance_hours(double) override {}
    void touch(std::string_view) override {}

    bool holds(std::string_view label) const override {
        return std::any_of(buffer_.begin(), buffer_.end(),
                           [&](const std::string& text) { return matches(text, label); });
    }

    // Substring match of the fact's object against the raw utterance.
    bool matches(std::string_view answer, std::string_view expect) const override {
        std::string needle = normalize_label(expect);
        if (needle.rfind("not ", 0) == 0) needle.erase(0, 4);
        return !needle.empty() && normalize_label(answer).find(needle) != std::string::npos;
    }

private:
    void push(std::string text) {
        buffer_.push_back(std::move(text));
        while (buffer_.size() > capacity_) buffer_.pop_front();
    }

    std::size_t capacity_;
    std::deque<std::string> buffer_;
};

// Cosine over every concept ever seen. No importance, no graph, no forgetting.
class VectorBackend final : public MemoryBackend {
public:
    explicit VectorBackend(const EngineConfig& config)
        : encoder_([&] {
              EncoderSettings s;
              s.embedding_dim = config.embedding_dim;
              return s;
          }()) {}

    std::string name() const override { return "vector"; }

    void ingest(std::string_view text) override {
        for (const auto& c : encoder_.extract(text).concepts) store(c.label, c.ctype, c.description);
    }

    std::vector<std::string> query(std::string_view text, std::size_t k) override {
        std::vector<std::string> out;
        for (const auto& hit : store_.semantic_search(encoder_.embed(text), k)) {
            out.push_back(store_.find(hit.id)->label);
        }
        return out;
    }

    void sleep() override {}
    std::size_t size() const override { return store_.node_count(); }
    void inject(const Injection& injection) override {
        store(injection.label, injection.ctype, injection.description);
    }
    void advance_hours(double) override {}
    void touch(std::string_view) override {}
    bool holds(std::string_view label) const override { return find_by_label(store_, label) != nullptr; }

private:
    void store(const std::string& label, ConceptType ctype, const std::string& description) {
        Concept c;
        c.id = make_concept_id(label, ctype);
        if (store_.contains(c.id)) return;
        c.label = label;
        c.ctype = ctype;
        c.description = description;
        c.embedding = encoder_.embed(label + " " + description);
        store_.put_concept(std::move(c));
    }

    MeaningEncoder encoder_;
    MemoryGraph store_;
};

class EngineBackend final : public MemoryBackend {
public:
    EngineBackend(std::string name, const EngineConfig& config)
        : name_(std::move(name)), clock_(std::make_shared<SimulatedClock>()), engine_(config, clock_) {}

    std::string name() const override { return name_; }
    void ingest(std::string_view text) override { engine_.process_message(text); }

    std::vector<std::string> query(std::string_view text, std::size_t k) override {
        std::vector<std::string> out;
        for (const auto& hit : engine_.query(text, k)) out.push_back(hit.label);
        return out;
    }

    void sleep() override { last_ = engine_.sleep(SleepTrigger::manual()); }
    std::size_t size() const override { return engine_.graph().unprotected_count(); }
    const std::optional<SleepReport>& last_report() const { return last_; }
    void inject(const Injection& injection) override { engine_.inject(injection); }
    void advance_hours(double hours) override { engine_.advance_clock(hours); }

    void touch(std::string_view label) override {
        if (const Concept* c = find_by_label(engine_.graph(), label)) engine_.touch(c->id);
    }

    bool holds(std::string_view label) const override {
        return find_by_label(engine_.graph(), label) != nullptr;
    }

private:
    std::string name_;
    std::shared_ptr<SimulatedClock> clock_;
    Engine engine_;
    std::optional<SleepReport> last_;
};

}  // namespace

std::unique_ptr<MemoryBackend> make_engine_backend(std::string name, const EngineConfig& config) {
    return std::make_unique<EngineBackend>(std::move(name), config);
}

std::unique_ptr<MemoryBackend> make_backend(std::string_view kind, const EngineConfig& config) {
    if (kind == "fifo") return std::make_unique<FifoBackend>(config.wm_capacity);
    if (kind == "vector") return std::make_unique<VectorBackend>(config);
    if (kind == "noforget") return make_engine_backend("noforget", disable(config, "forget"));
    if (kind == "full") return make_engine_backend("full", config);
    fail(ErrorKind::kInvalidArgument, "unknown backend: " + std::string(kind));
}

// ─── Running scenarios ─────────────────────────────────────────

Outcome play(const Scenario& scenario, MemoryBackend& backend, std::uint64_t seed) {
    const std::vector<NoiseItem> noise = scenario.noise ? draw_noise(*scenario.noise, seed) : std::vector<NoiseItem>{};
    const bool noise_episodes = scenario.noise && scenario.noise->as_episodes;
    const std::size_t per_turn = scenario.noise ? scenario.noise->per_turn : 0;
    std::size_t next_noise = 0;
    auto inject_noise = [&](std::size_t n) {
        for (; n > 0 && next_noise < noise.size(); --n, ++next_noise) {
            backend.inject(Injection{noise[next_noise].label, ConceptType::kFact, "", noise[next_noise].importance,
                                     noise_episodes});
        }
    };

    for (const auto& p : scenario.important) backend.inject(Injection{p.label, p.ctype, "", p.importance, false});
    for (const auto& turn : scenario.turns) {
        backend.ingest(turn);
        if (per_turn > 0) inject_noise(per_turn);
        if (scenario.hours_between_turns > 0.0) backend.advance_hours(scenario.hours_between_turns);
    }
    inject_noise(noise.size());
    if (scenario.aging_hours > 0.0) backend.advance_hours(scenario.aging_hours);
    for (const auto& p : scenario.important) {
        if (p.touch) backend.touch(p.label);
    }
    if (scenario.final_sleep) backend.sleep();

    Outcome o;
    o.ltm_size = backend.size();
    o.noise_total = noise.size();
    for (const auto& n : noise) o.noise_retained += backend.holds(n.label) ? 1 : 0;
    o.important_total = scenario.important.size();
    for (const auto& p : scenario.important) o.important_retained += backend.holds(p.label) ? 1 : 0;

    o.probes = scenario.probes.size();
    for (const auto& probe : scenario.probes) {
        const auto answers = backend.query(probe.query, scenario.probe_k);
        if (std::any_of(answers.begin(), answers.end(),
                        [&](const std::string& a) { return backend.matches(a, probe.expect); })) {
            ++o.recalled;
        }
    }
    return o;
}

// ─── Suite ─────────────────────────────────────────────────────

namespace {

std::string ratio(std::size_t a, std::size_t b) { return std::to_string(a) + "/" + std::to_string(b); }

double fraction(std::size_t a, std::size_t b) { return b == 0 ? 1.0 : static_cast<double>(a) / static_cast<double>(b); }

EngineConfig for_scenario(EngineConfig config, const Scenario& s) {
    config.auto_sleep = s.auto_sleep;
    return config;
}

TestResult recall_test(std::string id, const BenchContext& ctx) {
    const Scenario s = load_scenario(id, ctx.data_dir);
    auto backend = make_engine_backend("full", for_scenario(ctx.config, s));
    const Outcome o = play(s, *backend, ctx.config.rng_seed);
    TestResult r;
    r.test = std::move(id);
    r.numer = o.recalled;
    r.denom = o.probes;
    r.score = fraction(o.recalled, o.probes);
    r.pass = o.recalled == o.probes;
    r.ltm_size = o.ltm_size;
    r.metric = ratio(o.recalled, o.probes) + (r.test == "traversal" ? " related concepts found" : " facts recalled");
    return r;
}

TestResult capacity_test(const BenchContext& ctx) {
    const Scenario s = load_scenario("capacity", ctx.data_dir);
    Engine engine(for_scenario(ctx.config, s), std::make_shared<SimulatedClock>());
    std::vector<std::string> eids;
    for (const auto& turn : s.turns) eids.push_back(engine.process_message(turn).episode_id);

    const auto& wm = engine.working_memory().episodes();
    const std::size_t cap = ctx.config.wm_capacity;
    const std::size_t keep = std::min(cap, eids.size());
    bool order_ok = wm.size() == keep;
    for (std::size_t i = 0; order_ok && i < keep; ++i) order_ok = wm[i].eid == eids[eids.size() - keep + i];

    TestResult r;
    r.test = "capacity";
    r.numer = wm.size();
    r.denom = cap;
    r.pass = order_ok;
    r.score = r.pass ? 1.0 : 0.0;
    r.ltm_size = engine.graph().unprotected_count();
    r.metric = ratio(wm.size(), cap) + " items enforced, " + std::to_string(eids.size() - keep) + " oldest evicted";
    return r;
}

TestResult pruning_test(std::string id, const BenchContext& ctx) {
    const Scenario s = load_scenario(id, ctx.data_dir);
    auto backend = make_engine_backend("full", for_scenario(ctx.config, s));
    const Outcome o = play(s, *backend, ctx.config.rng_seed);
    const std::size_t removed = o.noise_total - o.noise_retained;
    TestResult r;
    r.test = std::move(id);
    r.numer = removed;
    r.denom = o.noise_total;
    r.score = fraction(removed, o.noise_total);
    r.pass = o.important_retained == o.important_total && removed * 10 >= o.noise_total * 9;
    r.ltm_size = o.ltm_size;
    r.metric = ratio(o.important_retained, o.important_total) + " important preserved, " +
               ratio(removed, o.noise_total) + " noise removed";
    return r;
}

TestResult latency_test(const BenchContext& ctx) {
    const auto rows = run_latency(ctx.config);
    std::size_t within = 0;
    bool pass = true;
    for (const auto& row : rows) {
        const double budget = row.graph_size <= 10 ? 100.0 : 1000.0;
        const bool ok = row.mean_us < budget && row.p99_us < 5000.0;
        within += ok ? 1 : 0;
        pass = pass && ok;
    }
    pass = pass && rows.back().mean_us >= rows.front().mean_us;
    TestResult r;
    r.test = "latency";
    r.numer = within;
    r.denom = rows.size();
    r.pass = pass;
    r.score = pass ? 1.0 : 0.0;
    r.latency_us = rows.back().mean_us;
    r.ltm_size = rows.back().graph_size;
    char buf[128];
    std::snprintf(buf, sizeof buf, "mean %.1f us at %zu concepts, %.1f us at %zu", rows.back().mean_us,
                  rows.back().graph_size, rows.front().mean_us, rows.front().graph_size);
    r.metric = buf;
    return r;
}

TestResult persistence_test(const BenchContext& ctx) {
    const Scenario s = load_scenario("persistence", ctx.data_dir);
    auto clock = std::make_shared<SimulatedClock>();
    Engine engine(for_scenario(ctx.config, s), clock);
    for (const auto& turn : s.turns) engine.process_message(turn);

    const fs::path dir = ctx.work_dir.empty() ? fs::temp_directory_path() : fs::path(ctx.work_dir);
    const fs::path path = dir / ("scm-bench-persistence-" + std::to_string(::getpid()) + ".json");
    save_snapshot(engine, path.string());
    const auto loaded = load_engine(path.string(), clock);
    std::error_code ec;
    fs::remove(path, ec);

    std::size_t same = 0;
    for (const auto& probe : s.probes) {
        const Concept* a = find_by_label(engine.graph(), probe.expect);
        const Concept* b = find_by_label(loaded->graph(), probe.expect);
        if (a != nullptr && b != nullptr && *a == *b) ++same;
    }
    TestResult r;
    r.test = "persistence";
    r.numer = same;
    r.denom = s.probes.size();
    r.score = fraction(same, s.probes.size());
    r.pass = same == s.probes.size() && engine.export_state().concepts == loaded->export_state().concepts;
    r.ltm_size = loaded->graph().unprotected_count();
    r.metric = ratio(same, s.probes.size()) + " concepts survive restart";
    return r;
}

}  // namespace

const std::vector<std::string>& test_ids() {
    static const std::vector<std::string> kIds{"capacity",   "retention5", "retention10", "consolidation",
                                               "forgetting", "traversal",  "latency",     "persistence"};
    return kIds;
}

TestResult run_test(std::string_view id, const BenchContext& ctx) {
    if (id == "capacity") return capacity_test(ctx);
    if (id == "retention5" || id == "retention10" || id == "traversal") return recall_test(std::string(id), ctx);
    if (id == "consolidation" || id == "forgetting") return pruning_test(std::string(id), ctx);
    if (id == "latency") return latency_test(ctx);
    if (id == "persistence") return persistence_test(ctx);
    fail(ErrorKind::kInvalidArgument, "unknown test: " + std::string(id));
}

std::vector<LatencyRow> run_latency(const EngineConfig& config, std::size_t queries,
                                    const std::vector<std::size_t>& sizes) {
    static const char* kWords[] = {
        "river",  "garden", "violin", "harbor", "pepper", "canyon", "lantern", "marble", "orchid", "saddle",
        "tunnel", "velvet", "walnut", "anchor", "bamboo", "copper", "desert", "ember",   "falcon", "glacier",
        "hammer", "island", "jasmine", "kettle", "ladder", "meadow", "nectar", "oyster", "pillow", "quartz",
        "ribbon", "salmon", "thistle", "umber",  "valley", "willow", "yarrow", "zephyr", "basil",  "cinder"};
    constexpr std::size_t kN = std::size(kWords);
    std::vector<LatencyRow> rows;
    for (const std::size_t n : sizes) {
        EngineConfig cfg = config;
        cfg.auto_sleep = false;
        cfg.components.self_model = false;
        Engine engine(cfg, std::make_shared<SimulatedClock>());
        for (std::size_t i = 0; i < n; ++i) {
            const std::string label =
                std::string(kWords[i % kN]) + " " + kWords[(i * 7 + 3) % kN] + " " + std::to_string(i);
            engine.inject(Injection{label, ConceptType::kFact, "", 0.1 + 0.8 * static_cast<double>(i % 10) / 10.0,
                                    false});
        }
        std::vector<std::string> texts;
        texts.reserve(queries);
        for (std::size_t q = 0; q < queries; ++q) {
            texts.push_back(std::string("what about ") + kWords[q % kN] + " " + kWords[(q * 13 + 5) % kN] + " " +
                            std::to_string(q));
        }
        for (std::size_t w = 0; w < std::min<std::size_t>(20, queries); ++w) engine.query(texts[w], 3);

        std::vector<double> us;
        us.reserve(queries);
        for (const auto& text : texts) {
            const auto t0 = std::chrono::steady_clock::now();
            const auto hits = engine.query(text, 3);
            const auto t1 = std::chrono::steady_clock::now();
            if (hits.empty() && n > 0) fail(ErrorKind::kInternal, "latency probe returned nothing");
            us.push_back(std::chrono::duration<double, std::micro>(t1 - t0).count());
        }
        LatencyRow row;
        row.graph_size = engine.graph().node_count();
        double sum = 0.0;
        for (double v : us) sum += v;
        row.mean_us = us.empty() ? 0.0 : sum / static_cast<double>(us.size());
        std::sort(us.begin(), us.end());
        if (!us.empty()) {
            const auto idx = static_cast<std::size_t>(std::ceil(0.99 * static_cast<double>(us.size()))) - 1;
            row.p99_us = us[std::min(idx, us.size() - 1)];
        }
        rows.push_back(row);
    }
    return rows;
}

ForgettingRun run_forgetting(const BenchContext& ctx, double beta1, double beta2) {
    const Scenario s = load_scenario("forgetting", ctx.data_dir);
    EngineConfig cfg = for_scenario(ctx.config, s);
    cfg.beta1 = beta1;
    cfg.beta2 = beta2;
    EngineBackend backend("full", cfg);
    const Outcome o = play(s, backend, ctx.config.rng_seed);
    ForgettingRun run;
    if (backend.last_report()) run.theta_f = backend.last_report()->theta_f;
    run.noise_total = o.noise_total;
    run.important_total = o.important_total;
    run.noise_removed = o.noise_total - o.noise_retained;
    run.important_retained = o.important_retained;
    run.removed = run.noise_removed + (o.important_total - o.important_retained);
    return run;
}

// ─── Baselines, ablations, growth ──────────────────────────────

EngineConfig disable(EngineConfig config, std::string_view component) {
    auto& c = config.components;
    if (component == "wm_limit") c.working_memory_limit = false;
    else if (component == "tagger") c.value_tagger = false;
    else if (component == "nrem") c.nrem = false;
    else if (component == "rem") c.rem = false;
    else if (component == "forget") c.forgetting = false;
    else if (component == "self") c.self_model = false;
    else if (component != "none") fail(ErrorKind::kInvalidArgument, "unknown component: " + std::string(component));
    return config;
}

ComparisonRow run_baseline(std::string_view backend, const BenchContext& ctx) {
    const Scenario s = load_scenario("conversation", ctx.data_dir);
    auto b = make_backend(backend, for_scenario(ctx.config, s));
    return {std::string(backend), play(s, *b, ctx.config.rng_seed)};
}

ComparisonRow run_ablation(std::string_view component, const BenchContext& ctx) {
    const Scenario s = load_scenario("conversation", ctx.data_dir);
    const EngineConfig cfg = disable(for_scenario(ctx.config, s), component);
    auto b = make_engine_backend(std::string(component), cfg);
    return {std::string(component), play(s, *b, ctx.config.rng_seed)};
}

std::vector<std::size_t> run_growth(std::size_t cycles, bool forgetting, const EngineConfig& config) {
    static const char* kTopics[] = {"quarterly report", "team offsite",  "product roadmap", "hiring plan",
                                    "security audit",   "customer churn", "pricing model",  "launch checklist",
                                    "vendor contract",  "design review"};
    constexpr double kHoursPerCycle = 336.0;
    constexpr std::size_t kLowValuePerCycle = 5;

    EngineConfig cfg = config;
    cfg.auto_sleep = false;
    cfg.components.forgetting = forgetting;
    auto clock = std::make_shared<SimulatedClock>();
    Engine engine(cfg, clock);
    std::mt19937_64 rng(config.rng_seed);

    std::vector<std::size_t> series;
    for (std::size_t c = 0; c < cycles; ++c) {
        engine.inject(Injection{kTopics[c % std::size(kTopics)], ConceptType::kFact, "", 0.8, false});
        for (std::size_t i = 0; i < kLowValuePerCycle; ++i) {
            const double t = 0.02 + 0.08 * unit_uniform(rng);
            engine.inject(Injection{"chatter " + std::to_string(c + 1) + "." + std::to_string(i + 1),
                                    ConceptType::kFact, "", t, false});
        }
        engine.advance_clock(kHoursPerCycle);
        engine.sleep(SleepTrigger::manual());
        series.push_back(engine.graph().unprotected_count());
    }
    return series;
}

// ─── Directional checks ────────────────────────────────────────

namespace {

std::string describe(const Outcome& o) {
    return "recall " + ratio(o.recalled, o.probes) + ", ltm " + std::to_string(o.ltm_size) + ", noise retained " +
           ratio(o.noise_retained, o.noise_total);
}

}  // namespace

Check baseline_check(const ComparisonRow& backend, const ComparisonRow& full) {
    const Outcome& b = backend.outcome;
    const Outcome& f = full.outcome;
    Check c;
    if (backend.label == "fifo") {
        c.pass = b.recalled < f.recalled;
        c.detail = "recall below full";
    } else if (backend.label == "vector") {
        c.pass = b.recalled <= f.recalled && b.ltm_size > f.ltm_size;
        c.detail = "recall at most full, larger store";
    } else if (backend.label == "noforget") {
        c.pass = b.recalled == f.recalled && b.ltm_size > f.ltm_size;
        c.detail = "recall equal to full, larger store";
    } else {
        c.pass = b.recalled == b.probes;
        c.detail = "every probe recalled";
    }
    c.detail = describe(b) + " (expected " + c.detail + ")";
    return c;
}

Check ablation_check(const ComparisonRow& ablated, const ComparisonRow& full) {
    const Outcome& a = ablated.outcome;
    const Outcome& f = full.outcome;
    Check c;
    const std::string& k = ablated.label;
    if (k == "forget" || k == "tagger") {
        c.pass = a.noise_retained == a.noise_total;
        c.detail = "all noise retained";
    } else if (k == "wm_limit") {
        c.pass = a.noise_retained > f.noise_retained;
        c.detail = "more noise retained than full (" + std::to_string(f.noise_retained) + ")";
    } else if (k == "self") {
        c.pass = a.recalled == f.recalled && a.noise_retained == f.noise_retained;
        c.detail = "recall and noise identical to full";
    } else if (k == "rem") {
        c.pass = a.recalled == f.recalled && a.ltm_size >= f.ltm_size;
        c.detail = "recall unchanged, ltm at least full (" + std::to_string(f.ltm_size) + ")";
    } else if (k == "none") {
        c.pass = a.recalled == a.probes;
        c.detail = "every probe recalled";
    } else {
        c.pass = true;
        c.detail = "reported only";
    }
    c.detail = describe(a) + " (expected " + c.detail + ")";
    return c;
}

Check growth_check(const std::vector<std::size_t>& series, bool forgetting) {
    Check c;
    if (series.empty()) return {false, "no cycles"};
    const std::size_t last = series.back();
    if (!forgetting) {
        bool increasing = true;
        for (std::size_t i = 1; i < series.size(); ++i) increasing = increasing && series[i] > series[i - 1];
        const bool level = series.size() != 20 || std::abs(static_cast<double>(last) - 110.0) <= 11.0;
        c.pass = increasing && level;
        c.detail = "final " + std::to_string(last) + (increasing ? ", strictly increasing" : ", not increasing");
        return c;
    }
    const std::size_t peak = *std::max_element(series.begin(), series.end());
    const auto tail = series.end() - static_cast<std::ptrdiff_t>(std::min<std::size_t>(5, series.size()));
    const auto [lo, hi] = std::minmax_element(tail, series.end());
    c.pass = static_cast<double>(*hi - *lo) <= 0.1 * static_cast<double>(peak);
    c.detail = "peak " + std::to_string(peak) + ", last-5 spread " + std::to_string(*hi - *lo);
    return c;
}

// ─── Output ────────────────────────────────────────────────────

CsvRow to_row(const TestResult& r, std::size_t run) {
    return CsvRow{r.test, run, r.score, r.numer, r.denom, r.latency_us, r.ltm_size};
}

std::string to_csv(const std::vector<CsvRow>& rows, bool timings) {
    std::string out = "test,run,score,metric_numer,metric_denom,latency_us,ltm_size\n";
    char buf[256];
    for (const auto& r : rows) {
        std::string latency;
        if (timings && r.latency_us) {
            char l[32];
            std::snprintf(l, sizeof l, "%.3f", *r.latency_us);
            latency = l;
        }
        std::snprintf(buf, sizeof buf, "%s,%zu,%.4f,%zu,%zu,%s,%zu\n", r.test.c_str(), r.run, r.score, r.numer,
                      r.denom, latency.c_str(), r.ltm_size);
        out += buf;
    }
    return out;
}

}  // namespace scm::bench
