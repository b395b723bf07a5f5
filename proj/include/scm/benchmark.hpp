#pragma once

#include "scm/config.hpp"
#include "scm/engine.hpp"
#include "scm/types.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace scm::bench {

// ─── Scenarios ─────────────────────────────────────────────────

struct Probe {
    std::string query;
    std::string expect;  // concept label
};

struct NoiseSpec {
    std::size_t count = 0;
    double importance_min = 0.02;
    double importance_max = 0.10;
    std::size_t per_turn = 0;  // 0: all after the last turn
    bool as_episodes = false;  // admit each item into working memory too
    std::string label_prefix = "noise";
};

struct Planted {
    std::string label;
    ConceptType ctype = ConceptType::kFact;
    double importance = 0.9;
    bool touch = false;  // probed right before the final sleep
};

struct Scenario {
    std::string name;
    std::string description;
    std::vector<std::string> turns;
    std::vector<Probe> probes;
    std::size_t probe_k = 3;
    std::vector<Planted> important;
    std::optional<NoiseSpec> noise;
    double hours_between_turns = 0.0;
    double aging_hours = 0.0;  // before the final sleep
    bool final_sleep = false;
    bool auto_sleep = true;

    /// Throws kInvalidArgument when a probe expects a label that no turn or
    /// injection can introduce.
    void validate() const;
};

Scenario parse_scenario(std::string_view json_text);

/// $SCM_DATA_DIR, else the data directory of the source tree.
std::string default_data_dir();
Scenario load_scenario(std::string_view name, const std::string& data_dir = default_data_dir());

/// Noise labels and importances, drawn uniformly from the configured range.
struct NoiseItem {
    std::string label;
    double importance = 0.0;
};
std::vector<NoiseItem> draw_noise(const NoiseSpec& ns, std::uint64_t seed);

// ─── Backends ──────────────────────────────────────────────────

/// The surface every memory system under comparison exposes.
class MemoryBackend {
public:
    virtual ~MemoryBackend() = default;

    virtual std::string name() const = 0;
    virtual void ingest(std::string_view text) = 0;
    virtual std::vector<std::string> query(std::string_view text, std::size_t k) = 0;
    virtual void sleep() = 0;
    virtual std::size_t size() const = 0;

    /// Places a concept with a chosen importance (noise, planted facts).
    virtual void inject(const Injection& injection) = 0;
    virtual void advance_hours(double hours) = 0;
    virtual void touch(std::string_view label) = 0;
    virtual bool holds(std::string_view label) const = 0;

    /// Whether a query answer counts as recalling `expect`.
    virtual bool matches(std::string_view answer, std::string_view expect) const;
};

/// fifo | vector | noforget | full. Throws kInvalidArgument otherwise.
std::unique_ptr<MemoryBackend> make_backend(std::string_view kind, const EngineConfig& config);

/// The full engine under an arbitrary configuration.
std::unique_ptr<MemoryBackend> make_engine_backend(std::string name, const EngineConfig& config);

// ─── Running scenarios ─────────────────────────────────────────

struct Outcome {
    std::size_t recalled = 0;
    std::size_t probes = 0;
    std::size_t ltm_size = 0;
    std::size_t noise_total = 0;
    std::size_t noise_retained = 0;
    std::size_t important_total = 0;
    std::size_t important_retained = 0;
};

Outcome play(const Scenario& scenario, MemoryBackend& backend, std::uint64_t seed);

// ─── Suite ─────────────────────────────────────────────────────

struct TestResult {
    std::string test;
    bool pass = false;
    double score = 0.0;
    std::size_t numer = 0;
    std::size_t denom = 0;
    std::optional<double> latency_us;
    std::size_t ltm_size = 0;
    std::string metric;  // human-readable
};

struct BenchContext {
    EngineConfig config;
    std::string data_dir = default_data_dir();
    std::string work_dir;  // scratch space; empty uses the system temp directory
};

/// capacity, retention5, retention10, consolidation, forgetting, traversal,
/// latency, persistence.
const std::vector<std::string>& test_ids();

/// Throws kInvalidArgument for an unknown id.
TestResult run_test(std::string_view id, const BenchContext& ctx);

struct LatencyRow {
    std::size_t graph_size = 0;
    double mean_us = 0.0;
    double p99_us = 0.0;
};

inline const std::vector<std::size_t> kLatencySizes{10, 60, 120, 240, 360};
std::vector<LatencyRow> run_latency(const EngineConfig& config, std::size_t queries = 1000,
                                    const std::vector<std::size_t>& sizes = kLatencySizes);

struct ForgettingRun {
    std::size_t removed = 0;
    std::size_t noise_removed = 0;
    std::size_t important_retained = 0;
    std::size_t noise_total = 0;
    std::size_t important_total = 0;
    double theta_f = 0.0;
};

/// The forgetting scenario under the given retention weights.
ForgettingRun run_forgetting(const BenchContext& ctx, double beta1, double beta2);

// ─── Baselines, ablations, growth ──────────────────────────────

inline const std::vector<std::string> kBackends{"fifo", "vector", "noforget", "full"};
inline const std::vector<std::string> kComponents{"wm_limit", "tagger", "nrem", "rem", "forget", "self"};

struct ComparisonRow {
    std::string label;
    Outcome outcome;
};

ComparisonRow run_baseline(std::string_view backend, const BenchContext& ctx);

/// "none" runs the full engine. Throws kInvalidArgument for unknown names.
ComparisonRow run_ablation(std::string_view component, const BenchContext& ctx);
EngineConfig disable(EngineConfig config, std::string_view component);

/// Unprotected concept count after each cycle's sleep.
std::vector<std::size_t> run_growth(std::size_t cycles, bool forgetting, const EngineConfig& config);

// ─── Directional checks ────────────────────────────────────────

struct Check {
    bool pass = false;
    std::string detail;
};

/// `backend` against the full engine on the same conversation.
Check baseline_check(const ComparisonRow& backend, const ComparisonRow& full);

/// The expected effect of disabling `component`, judged against "none".
Check ablation_check(const ComparisonRow& ablated, const ComparisonRow& full);

/// Forgetting off: strictly increasing, and within 10% of 110 at 20 cycles.
/// Forgetting on: spread of the last five cycles at most 10% of the peak.
Check growth_check(const std::vector<std::size_t>& series, bool forgetting);

// ─── Output ────────────────────────────────────────────────────

struct CsvRow {
    std::string test;
    std::size_t run = 1;
    double score = 0.0;
    std::size_t numer = 0;
    std::size_t denom = 0;
    std::optional<double> latency_us;
    std::size_t ltm_size = 0;
};

CsvRow to_row(const TestResult& r, std::size_t run);

/// test,run,score,metric_numer,metric_denom,latency_us,ltm_size. Timings are
/// left empty unless `timings` is set, so fixed-seed output is byte-stable.
std::string to_csv(const std::vector<CsvRow>& rows, bool timings);

}  // namespace scm::bench
