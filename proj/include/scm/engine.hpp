#pragma once

#include "scm/clock.hpp"
#include "scm/config.hpp"
#include "scm/encoding.hpp"
#include "scm/memory_graph.hpp"
#include "scm/self_model.hpp"
#include "scm/sleep_cycle.hpp"
#include "scm/valuation.hpp"
#include "scm/working_memory.hpp"

#include <atomic>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

namespace scm {

struct IngestedConcept {
    ConceptId id;
    std::string label;
    ConceptType ctype = ConceptType::kAbstract;
    ValueVector value;      // as tagged for this mention
    double importance = 0;  // stored importance after the upsert
    bool is_new = false;
};

struct IngestReport {
    std::vector<IngestedConcept> concepts;
    std::vector<Relation> new_relations;
    std::string episode_id;  // empty when nothing was extracted
    std::optional<Episode> evicted;
    bool degraded = false;
    std::optional<SleepReport> sleep;
};

struct QueryHit {
    RetrievalHit hit;
    std::string label;
    ConceptType ctype = ConceptType::kAbstract;
};

struct EngineStats {
    std::size_t concepts = 0;
    std::size_t edges = 0;
    std::size_t wm_size = 0;
    double entropy = 0.0;
    double conflict_density = 0.0;
    Timestamp last_sleep;
};

/// A concept placed directly with a chosen importance, bypassing the
/// extractor and the tagger (benchmarks, demos).
struct Injection {
    std::string label;
    ConceptType ctype = ConceptType::kFact;
    std::string description;
    double importance = 0.5;  // in [0,1)
    bool admit_episode = false;
};

/// Full engine image; what a snapshot stores.
struct EngineState {
    EngineConfig config;
    SelfCounters counters;
    std::vector<Concept> concepts;
    std::vector<Relation> relations;
    std::vector<Episode> episodes;
    Timestamp last_sleep_time;
    std::optional<SessionGoal> goal;
    Timestamp saved_at;

    bool operator==(const EngineState&) const = default;
};

/// Wake-phase pipeline plus the sleep orchestrator.
///
/// One writer at a time: every mutating call (messages, queries, which
/// update access statistics, sleep, injection) takes the exclusive lock.
/// Calls arriving while a sleep cycle runs fail fast with kBusy.
class Engine {
public:
    using SleepObserver = std::function<void(std::string_view phase)>;

    Engine(EngineConfig config, std::shared_ptr<Clock> clock, EncoderSettings encoder = {});
    Engine(EngineState state, std::shared_ptr<Clock> clock, EncoderSettings encoder = {});

    Engine(const Engine&) = delete;
    Engine& operator=(const Engine&) = delete;

    IngestReport process_message(std::string_view text);
    std::vector<QueryHit> query(std::string_view text, std::size_t k);

    /// Runs the trigger check and sleeps if one fires.
    std::optional<SleepReport> maybe_sleep();
    std::optional<SleepTrigger> pending_trigger() const;

    /// NREM -> REM -> forgetting -> sleep episode. kBusy if already sleeping.
    SleepReport sleep(SleepTrigger trigger = SleepTrigger::manual());

    ConceptId inject(const Injection& injection);
    Concept touch(const ConceptId& id);

    /// Pins the task-relevance goal; an empty text unpins it.
    void set_goal(std::string_view text);

    void advance_clock(double hours);
    Timestamp now() const { return clock_->now(); }
    bool simulated_clock() const { return clock_->is_simulated(); }

    std::string introspect(std::string_view query) const;
    EngineStats stats() const;
    SelfCounters counters() const;
    EngineState export_state() const;

    /// Appends one JSON line per sleep cycle; empty path disables.
    void set_audit_log(std::string path);
    void set_sleep_observer(SleepObserver observer);
    bool is_sleeping() const { return sleeping_.load(); }

    /// Runs f(graph, wm, self) under the shared lock.
    template <typename F>
    auto read(F&& f) const {
        std::shared_lock lock(mu_);
        return f(graph_, wm_, self_);
    }

    // Unlocked accessors; for single-threaded callers and tests.
    const EngineConfig& config() const { return config_; }
    const MemoryGraph& graph() const { return graph_; }
    const WorkingMemory& working_memory() const { return wm_; }
    const SelfState& self_state() const { return self_; }
    const std::optional<SessionGoal>& goal() const { return goal_; }
    Timestamp last_sleep_time() const { return last_sleep_; }
    const MeaningEncoder& encoder() const { return encoder_; }

private:
    void init();
    void throw_if_sleeping() const;
    Embedding embed(std::string_view text, bool* degraded = nullptr) const;
    ConceptExists exists_fn() const;
    std::string next_episode_id();
    std::optional<Episode> admit(Episode ep);
    std::optional<SleepReport> check_and_sleep_locked();
    SleepReport sleep_locked(SleepTrigger trigger);
    void notify(std::string_view phase) const;

    EngineConfig config_;
    std::shared_ptr<Clock> clock_;
    MeaningEncoder encoder_;
    MemoryGraph graph_;
    WorkingMemory wm_;
    SelfState self_;
    Timestamp last_sleep_;
    std::optional<SessionGoal> goal_;
    bool goal_pinned_ = false;
    std::uint64_t episode_seq_ = 0;
    std::string audit_path_;
    SleepObserver observer_;

    mutable std::shared_mutex mu_;
    std::atomic<bool> sleeping_{false};
};

}  // namespace scm
