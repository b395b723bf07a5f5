#include "scm/engine.hpp"

#include "scm/error.hpp"
#include "scm/json.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iostream>
#include <set>

namespace scm {

namespace {

ImportanceRule rule_for(const EngineConfig& c) {
    ImportanceRule rule{c.tagger_weights, std::nullopt};
    if (!c.components.value_tagger) rule.fixed = 0.5;
    return rule;
}

WorkingMemory wm_for(const EngineConfig& c) {
    const auto cap = c.components.working_memory_limit ? c.wm_capacity : WorkingMemory::kUnbounded;
    return WorkingMemory(cap, c.tagger_weights,
                         c.components.value_tagger ? std::nullopt : std::optional<double>(0.5));
}

EncoderSettings with_dim(EncoderSettings s, std::size_t dim) {
    s.embedding_dim = dim;
    return s;
}

std::uint64_t episode_number(const std::string& eid) {
    constexpr std::string_view prefix = "ep-";
    if (eid.rfind(prefix, 0) != 0) return 0;
    std::uint64_t n = 0;
    const char* first = eid.data() + prefix.size();
    std::from_chars(first, eid.data() + eid.size(), n);
    return n;
}

// Clears the sleeping flag however the cycle exits.
struct SleepGuard {
    std::atomic<bool>& flag;
    ~SleepGuard() { flag.store(false); }
};

}  // namespace

Engine::Engine(EngineConfig config, std::shared_ptr<Clock> clock, EncoderSettings encoder)
    : config_(std::move(config)),
      clock_(std::move(clock)),
      encoder_(with_dim(std::move(encoder), config_.embedding_dim)),
      graph_(rule_for(config_)),
      wm_(wm_for(config_)) {
    config_.validate();
    if (!clock_) fail(ErrorKind::kConfig, "engine needs a clock");
    last_sleep_ = clock_->now();
    init();
}

Engine::Engine(EngineState state, std::shared_ptr<Clock> clock, EncoderSettings encoder)
    : config_(std::move(state.config)),
      clock_(std::move(clock)),
      encoder_(with_dim(std::move(encoder), config_.embedding_dim)),
      graph_(rule_for(config_)),
      wm_(wm_for(config_)) {
    config_.validate();
    if (!clock_) fail(ErrorKind::kConfig, "engine needs a clock");
    for (auto& c : state.concepts) {
        if (c.embedding.dim() != config_.embedding_dim) {
            fail(ErrorKind::kIntegrity, "embedding dimension mismatch for " + c.id.value);
        }
        if (graph_.contains(c.id)) fail(ErrorKind::kIntegrity, "duplicate concept " + c.id.value);
        graph_.put_concept(std::move(c));
    }
    for (const auto& r : state.relations) {
        if (!graph_.contains(r.src) || !graph_.contains(r.dst)) {
            fail(ErrorKind::kIntegrity, "relation endpoint missing");
        }
        if (graph_.strength(r.src, r.dst, r.predicate)) {
            fail(ErrorKind::kIntegrity, "duplicate relation");
        }
        graph_.put_relation(r);
    }
    if (auto problem = graph_.check_integrity()) fail(ErrorKind::kIntegrity, *problem);
    std::set<std::string> eids;
    for (const auto& ep : state.episodes) {
        if (!eids.insert(ep.eid).second) fail(ErrorKind::kIntegrity, "duplicate episode " + ep.eid);
        for (const auto& id : ep.concept_ids) {
            if (!graph_.contains(id)) {
                fail(ErrorKind::kIntegrity, "episode " + ep.eid + " references unknown concept");
            }
        }
        episode_seq_ = std::max(episode_seq_, episode_number(ep.eid));
    }
    wm_.restore(std::deque<Episode>(state.episodes.begin(), state.episodes.end()));
    last_sleep_ = state.last_sleep_time;
    goal_ = std::move(state.goal);
    init();
    self_.counters = state.counters;
    episode_seq_ = std::max(episode_seq_, state.counters.messages_processed +
                                              state.counters.sleep_cycles_completed);
}

void Engine::init() {
    if (!config_.components.self_model) return;
    self_ = init_self(graph_, config_, clock_->now(),
                      [this](std::string_view text) { return embed(text); });
}

void Engine::throw_if_sleeping() const {
    if (sleeping_.load()) fail(ErrorKind::kBusy, "a sleep cycle is running");
}

Embedding Engine::embed(std::string_view text, bool* degraded) const {
    return encoder_.embed(text, degraded);
}

ConceptExists Engine::exists_fn() const {
    return [this](const ConceptId& id) { return graph_.contains(id); };
}

std::string Engine::next_episode_id() { return "ep-" + std::to_string(++episode_seq_); }

std::optional<Episode> Engine::admit(Episode ep) { return wm_.admit(std::move(ep)); }

void Engine::notify(std::string_view phase) const {
    if (observer_) observer_(phase);
}

// ─── wake ──────────────────────────────────────────────────────

IngestReport Engine::process_message(std::string_view text) {
    throw_if_sleeping();
    std::unique_lock lock(mu_);
    const Timestamp now = clock_->now();

    IngestReport report;
    ExtractionResult extraction = encoder_.extract(text, exists_fn());
    report.degraded = extraction.degraded;

    std::vector<const Embedding*> memory;
    memory.reserve(graph_.node_count());
    for (const auto& [_, c] : graph_.concepts()) memory.push_back(&c.embedding);
    const SessionGoal goal = goal_.value_or(SessionGoal{});
    const std::uint64_t graph_max = graph_.max_access_count();

    std::vector<Concept> tagged;
    std::set<ConceptId> seen;
    for (const auto& ec : extraction.concepts) {
        const ConceptId id = make_concept_id(ec.label, ec.ctype);
        if (!seen.insert(id).second) continue;
        bool degraded = false;
        Embedding emb = embed(ec.label + " " + ec.description, &degraded);
        report.degraded = report.degraded || degraded;

        ValueVector v;
        v.novelty = emb.is_null() ? 1.0 : novelty(emb, memory);
        v.emotional = sentiment(ec.sentiment_hint, ec.description.empty() ? ec.label : ec.description);
        v.task = task_relevance(emb, goal);
        const Concept* existing = graph_.find(id);
        const std::uint64_t count = (existing != nullptr ? existing->access_count : 0) + 1;
        v.repetition = repetition(count, std::max(graph_max, count));

        Concept c;
        c.id = id;
        c.label = ec.label;
        c.ctype = ec.ctype;
        c.description = ec.description;
        c.embedding = std::move(emb);
        c.value = v;
        c.created_at = now;
        c.last_access = now;
        c.access_count = 1;
        tagged.push_back(std::move(c));
    }

    ValueVector mean;
    for (auto& c : tagged) {
        IngestedConcept out{c.id, c.label, c.ctype, c.value, 0.0, !graph_.contains(c.id)};
        mean.novelty += c.value.novelty;
        mean.emotional += c.value.emotional;
        mean.task += c.value.task;
        mean.repetition += c.value.repetition;
        graph_.upsert_concept(c, now);
        out.importance = graph_.find(c.id)->importance;
        report.concepts.push_back(std::move(out));
    }

    for (const auto& er : extraction.relations) {
        const ConceptId src = make_concept_id(er.src_label, er.src_type);
        const ConceptId dst = make_concept_id(er.dst_label, er.dst_type);
        const Concept* a = graph_.find(src);
        const Concept* b = graph_.find(dst);
        if (a == nullptr || b == nullptr || src == dst) continue;
        const bool existed = graph_.strength(src, dst, er.predicate).has_value();
        graph_.add_or_strengthen(src, dst, er.predicate, config_.eta * a->importance * b->importance,
                                 now);
        if (!existed) report.new_relations.push_back(graph_.relations().at(EdgeKey{src, dst, er.predicate}));
    }

    if (!tagged.empty()) {
        const double n = static_cast<double>(tagged.size());
        mean.novelty /= n;
        mean.emotional /= n;
        mean.task /= n;
        mean.repetition /= n;
        Episode ep;
        ep.eid = next_episode_id();
        ep.timestamp = now;
        for (const auto& c : tagged) ep.concept_ids.push_back(c.id);
        ep.text = std::string(text);
        ep.value = mean;
        ep.importance = graph_.importance_rule()(mean);
        ep.last_access = now;
        ep.access_count = 1;
        report.episode_id = ep.eid;
        report.evicted = admit(std::move(ep));
    }

    ++self_.counters.messages_processed;
    if (!goal_pinned_) {
        goal_ = SessionGoal{std::string(text), embed(text)};
    }
    if (config_.auto_sleep) report.sleep = check_and_sleep_locked();
    return report;
}

std::vector<QueryHit> Engine::query(std::string_view text, std::size_t k) {
    throw_if_sleeping();
    std::unique_lock lock(mu_);
    std::vector<QueryHit> out;
    if (k == 0) return out;
    const Embedding q = embed(text);
    for (auto& hit : graph_.retrieve(q, k, config_.fusion_weights, clock_->now())) {
        const Concept* c = graph_.find(hit.concept_id);
        out.push_back(QueryHit{std::move(hit), c->label, c->ctype});
    }
    return out;
}

ConceptId Engine::inject(const Injection& injection) {
    throw_if_sleeping();
    std::unique_lock lock(mu_);
    if (!(injection.importance >= 0.0 && injection.importance < 1.0)) {
        fail(ErrorKind::kInvalidArgument, "injected importance must lie in [0,1)");
    }
    const Timestamp now = clock_->now();
    const ConceptId id = make_concept_id(injection.label, injection.ctype);
    const double t = injection.importance;

    Concept c;
    c.id = id;
    c.label = injection.label;
    c.ctype = injection.ctype;
    c.description = injection.description;
    c.embedding = embed(injection.label + " " + injection.description);
    c.value = ValueVector{t, t, t, t};
    c.importance = graph_.importance_rule().fixed.value_or(t);
    c.created_at = now;
    c.last_access = now;
    if (const Concept* existing = graph_.find(id)) {
        if (existing->is_protected) fail(ErrorKind::kPermission, "cannot overwrite a protected concept");
        c.created_at = existing->created_at;
        c.access_count = existing->access_count;
    }
    graph_.put_concept(c);

    if (injection.admit_episode) {
        Episode ep;
        ep.eid = next_episode_id();
        ep.timestamp = now;
        ep.concept_ids = {id};
        ep.text = injection.label;
        ep.value = c.value;
        ep.importance = c.importance;
        ep.last_access = now;
        admit(std::move(ep));
        if (config_.auto_sleep) check_and_sleep_locked();
    }
    return id;
}

Concept Engine::touch(const ConceptId& id) {
    throw_if_sleeping();
    std::unique_lock lock(mu_);
    return graph_.touch(id, clock_->now());
}

void Engine::set_goal(std::string_view text) {
    throw_if_sleeping();
    std::unique_lock lock(mu_);
    if (text.empty()) {
        goal_.reset();
        goal_pinned_ = false;
        return;
    }
    goal_ = SessionGoal{std::string(text), embed(text)};
    goal_pinned_ = true;
}

void Engine::advance_clock(double hours) { clock_->advance_hours(hours); }

// ─── sleep ─────────────────────────────────────────────────────

std::optional<SleepTrigger> Engine::pending_trigger() const {
    std::shared_lock lock(mu_);
    return should_sleep(wm_, graph_, last_sleep_, clock_->now(), config_);
}

std::optional<SleepReport> Engine::maybe_sleep() {
    throw_if_sleeping();
    std::unique_lock lock(mu_);
    return check_and_sleep_locked();
}

SleepReport Engine::sleep(SleepTrigger trigger) {
    throw_if_sleeping();
    std::unique_lock lock(mu_);
    return sleep_locked(trigger);
}

std::optional<SleepReport> Engine::check_and_sleep_locked() {
    const auto trigger = should_sleep(wm_, graph_, last_sleep_, clock_->now(), config_);
    if (!trigger) return std::nullopt;
    return sleep_locked(*trigger);
}

SleepReport Engine::sleep_locked(SleepTrigger trigger) {
    bool expected = false;
    if (!sleeping_.compare_exchange_strong(expected, true)) {
        fail(ErrorKind::kBusy, "a sleep cycle is running");
    }
    SleepGuard guard{sleeping_};

    const Timestamp now = clock_->now();
    const Components& on = config_.components;
    SleepReport report;
    report.trigger = trigger;
    report.started_at = now;

    NremResult nrem = nrem_consolidate(wm_, graph_, config_, now, on.nrem);
    report.pairs_strengthened = nrem.pairs_strengthened;
    report.edges_downscaled = nrem.edges_downscaled;
    report.episodes_transferred = nrem.episodes_transferred;
    notify("nrem");

    if (on.rem) {
        std::mt19937_64 rng(dream_seed(config_.rng_seed, self_.counters.sleep_cycles_completed));
        for (auto& d : rem_dream(graph_, nrem.replayed, rng, config_, now)) {
            ++report.dreams_attempted;
            if (d.integrated) ++report.dreams_integrated;
            report.dream_paths.push_back(std::move(d.path));
        }
    }
    notify("rem");

    if (on.forgetting) {
        ForgetResult f = forget(graph_, now, config_);
        report.theta_f = f.theta_f;
        report.concepts_forgotten = f.forgotten.size();
        report.forgotten_ids = std::move(f.forgotten);
    } else {
        report.theta_f = adaptive_threshold(graph_, config_);
    }
    notify("forget");

    ++self_.counters.sleep_cycles_completed;
    self_.counters.dreams_generated += report.dreams_integrated;
    last_sleep_ = now;

    if (const Concept* self = on.self_model ? graph_.find(self_.self_id) : nullptr) {
        Episode ep;
        ep.eid = next_episode_id();
        ep.timestamp = now;
        ep.concept_ids = {self->id};
        ep.text = "sleep cycle " + std::to_string(self_.counters.sleep_cycles_completed) + " (" +
                  std::string(to_string(trigger.reason)) + ")";
        ep.value = self->value;
        ep.importance = self->importance;
        ep.last_access = now;
        admit(std::move(ep));
    }
    report.ended_at = clock_->now();

    if (!audit_path_.empty()) {
        std::ofstream out(audit_path_, std::ios::app);
        if (out) {
            out << json{{"event", "sleep"}, {"report", report}}.dump() << '\n';
            out.flush();
        }
        if (!out) std::cerr << "scm: could not append to audit log " << audit_path_ << '\n';
    }
    return report;
}

// ─── introspection and state ───────────────────────────────────

std::string Engine::introspect(std::string_view query) const {
    std::shared_lock lock(mu_);
    if (!config_.components.self_model) return "The self-model is disabled.";
    return scm::introspect(self_, graph_, query);
}

EngineStats Engine::stats() const {
    std::shared_lock lock(mu_);
    return EngineStats{graph_.node_count(), graph_.edge_count(), wm_.size(),
                       wm_.entropy(),       graph_.conflict_density(), last_sleep_};
}

SelfCounters Engine::counters() const {
    std::shared_lock lock(mu_);
    return self_.counters;
}

EngineState Engine::export_state() const {
    std::shared_lock lock(mu_);
    EngineState s;
    s.config = config_;
    s.counters = self_.counters;
    s.concepts.reserve(graph_.node_count());
    for (const auto& [_, c] : graph_.concepts()) s.concepts.push_back(c);
    s.relations.reserve(graph_.edge_count());
    for (const auto& [_, r] : graph_.relations()) s.relations.push_back(r);
    s.episodes.assign(wm_.episodes().begin(), wm_.episodes().end());
    s.last_sleep_time = last_sleep_;
    s.goal = goal_;
    s.saved_at = clock_->now();
    return s;
}

void Engine::set_audit_log(std::string path) {
    std::unique_lock lock(mu_);
    audit_path_ = std::move(path);
}

void Engine::set_sleep_observer(SleepObserver observer) {
    std::unique_lock lock(mu_);
    observer_ = std::move(observer);
}

}  // namespace scm
