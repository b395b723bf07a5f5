#include "scm/json.hpp"

#include "scm/error.hpp"

namespace scm {

void to_json(json& j, const Timestamp& t) { j = format_timestamp(t); }

void from_json(const json& j, Timestamp& t) {
    const auto parsed = parse_timestamp(j.get<std::string>());
    if (!parsed) fail(ErrorKind::kInvalidArgument, "bad timestamp: " + j.get<std::string>());
    t = *parsed;
}

void to_json(json& j, const ConceptId& id) { j = id.value; }
void from_json(const json& j, ConceptId& id) { id.value = j.get<std::string>(); }

// Floats are widened exactly, so the shortest double text reads back to
// the same float.
void to_json(json& j, const Embedding& e) {
    j = json::array();
    auto& arr = j.get_ref<json::array_t&>();
    arr.reserve(e.values.size());
    for (float f : e.values) arr.emplace_back(static_cast<double>(f));
}

void from_json(const json& j, Embedding& e) {
    e.values.clear();
    e.values.reserve(j.size());
    for (const auto& v : j) {
        if (!v.is_number()) fail(ErrorKind::kInvalidArgument, "embedding entry is not a number");
        e.values.push_back(static_cast<float>(v.get<double>()));
    }
}

void to_json(json& j, const ValueVector& v) {
    j = json{{"novelty", v.novelty},
             {"emotional", v.emotional},
             {"task", v.task},
             {"repetition", v.repetition}};
}

void from_json(const json& j, ValueVector& v) {
    j.at("novelty").get_to(v.novelty);
    j.at("emotional").get_to(v.emotional);
    j.at("task").get_to(v.task);
    j.at("repetition").get_to(v.repetition);
}

void to_json(json& j, const Concept& c) {
    j = json{{"id", c.id},
             {"label", c.label},
             {"ctype", to_string(c.ctype)},
             {"description", c.description},
             {"embedding", c.embedding},
             {"value", c.value},
             {"importance", c.importance},
             {"created_at", c.created_at},
             {"last_access", c.last_access},
             {"access_count", c.access_count},
             {"is_protected", c.is_protected}};
}

void from_json(const json& j, Concept& c) {
    j.at("id").get_to(c.id);
    j.at("label").get_to(c.label);
    const auto type = parse_concept_type(j.at("ctype").get<std::string>());
    if (!type) fail(ErrorKind::kInvalidArgument, "unknown concept type");
    c.ctype = *type;
    j.at("description").get_to(c.description);
    j.at("embedding").get_to(c.embedding);
    j.at("value").get_to(c.value);
    j.at("importance").get_to(c.importance);
    j.at("created_at").get_to(c.created_at);
    j.at("last_access").get_to(c.last_access);
    j.at("access_count").get_to(c.access_count);
    j.at("is_protected").get_to(c.is_protected);
}

void to_json(json& j, const Relation& r) {
    j = json{{"src", r.src},
             {"dst", r.dst},
             {"predicate", to_string(r.predicate)},
             {"strength", r.strength},
             {"created_at", r.created_at}};
}

void from_json(const json& j, Relation& r) {
    j.at("src").get_to(r.src);
    j.at("dst").get_to(r.dst);
    const auto pred = parse_predicate(j.at("predicate").get<std::string>());
    if (!pred) fail(ErrorKind::kInvalidArgument, "unknown predicate");
    r.predicate = *pred;
    j.at("strength").get_to(r.strength);
    j.at("created_at").get_to(r.created_at);
}

void to_json(json& j, const Episode& e) {
    j = json{{"eid", e.eid},
             {"timestamp", e.timestamp},
             {"concept_ids", e.concept_ids},
             {"text", e.text},
             {"value", e.value},
             {"importance", e.importance},
             {"last_access", e.last_access},
             {"access_count", e.access_count}};
}

void from_json(const json& j, Episode& e) {
    j.at("eid").get_to(e.eid);
    j.at("timestamp").get_to(e.timestamp);
    j.at("concept_ids").get_to(e.concept_ids);
    j.at("text").get_to(e.text);
    j.at("value").get_to(e.value);
    j.at("importance").get_to(e.importance);
    j.at("last_access").get_to(e.last_access);
    j.at("access_count").get_to(e.access_count);
}

void to_json(json& j, const SessionGoal& g) {
    j = json{{"text", g.text}, {"embedding", g.embedding}};
}

void from_json(const json& j, SessionGoal& g) {
    j.at("text").get_to(g.text);
    j.at("embedding").get_to(g.embedding);
}

void to_json(json& j, const SelfCounters& c) {
    j = json{{"messages_processed", c.messages_processed},
             {"sleep_cycles_completed", c.sleep_cycles_completed},
             {"dreams_generated", c.dreams_generated}};
}

void from_json(const json& j, SelfCounters& c) {
    j.at("messages_processed").get_to(c.messages_processed);
    j.at("sleep_cycles_completed").get_to(c.sleep_cycles_completed);
    j.at("dreams_generated").get_to(c.dreams_generated);
}

void to_json(json& j, const EngineConfig& c) {
    j = json{
        {"wm_capacity", c.wm_capacity},
        {"tagger_weights",
         {{"novelty", c.tagger_weights.novelty},
          {"emotional", c.tagger_weights.emotional},
          {"task", c.tagger_weights.task},
          {"repetition", c.tagger_weights.repetition}}},
        {"eta", c.eta},
        {"alpha", c.alpha},
        {"lambda_per_hour", c.lambda_per_hour},
        {"beta1", c.beta1},
        {"beta2", c.beta2},
        {"theta_e", c.theta_e},
        {"theta_c", c.theta_c},
        {"tau_hours", c.tau_hours},
        {"target_size", c.target_size},
        {"theta_f_floor", c.theta_f_floor},
        {"rem_seed_count", c.rem_seed_count},
        {"rem_walk_steps", c.rem_walk_steps},
        {"embedding_dim", c.embedding_dim},
        {"fusion_weights",
         {{"semantic", c.fusion_weights.semantic},
          {"importance", c.fusion_weights.importance},
          {"graph", c.fusion_weights.graph}}},
        {"rng_seed", c.rng_seed},
        {"auto_sleep", c.auto_sleep},
        {"self_label", c.self_label},
        {"components",
         {{"working_memory_limit", c.components.working_memory_limit},
          {"value_tagger", c.components.value_tagger},
          {"nrem", c.components.nrem},
          {"rem", c.components.rem},
          {"forgetting", c.components.forgetting},
          {"self_model", c.components.self_model}}},
    };
}

namespace {

template <typename T>
void maybe(const json& j, const char* key, T& out) {
    if (auto it = j.find(key); it != j.end()) it->get_to(out);
}

}  // namespace

void from_json(const json& j, EngineConfig& c) {
    maybe(j, "wm_capacity", c.wm_capacity);
    if (auto it = j.find("tagger_weights"); it != j.end()) {
        maybe(*it, "novelty", c.tagger_weights.novelty);
        maybe(*it, "emotional", c.tagger_weights.emotional);
        maybe(*it, "task", c.tagger_weights.task);
        maybe(*it, "repetition", c.tagger_weights.repetition);
    }
    maybe(j, "eta", c.eta);
    maybe(j, "alpha", c.alpha);
    maybe(j, "lambda_per_hour", c.lambda_per_hour);
    maybe(j, "beta1", c.beta1);
    maybe(j, "beta2", c.beta2);
    maybe(j, "theta_e", c.theta_e);
    maybe(j, "theta_c", c.theta_c);
    maybe(j, "tau_hours", c.tau_hours);
    maybe(j, "target_size", c.target_size);
    maybe(j, "theta_f_floor", c.theta_f_floor);
    maybe(j, "rem_seed_count", c.rem_seed_count);
    maybe(j, "rem_walk_steps", c.rem_walk_steps);
    maybe(j, "embedding_dim", c.embedding_dim);
    if (auto it = j.find("fusion_weights"); it != j.end()) {
        maybe(*it, "semantic", c.fusion_weights.semantic);
        maybe(*it, "importance", c.fusion_weights.importance);
        maybe(*it, "graph", c.fusion_weights.graph);
    }
    maybe(j, "rng_seed", c.rng_seed);
    maybe(j, "auto_sleep", c.auto_sleep);
    maybe(j, "self_label", c.self_label);
    if (auto it = j.find("components"); it != j.end()) {
        maybe(*it, "working_memory_limit", c.components.working_memory_limit);
        maybe(*it, "value_tagger", c.components.value_tagger);
        maybe(*it, "nrem", c.components.nrem);
        maybe(*it, "rem", c.components.rem);
        maybe(*it, "forgetting", c.components.forgetting);
        maybe(*it, "self_model", c.components.self_model);
    }
}

void to_json(json& j, const SleepTrigger& t) {
    j = json{{"reason", to_string(t.reason)}, {"measured", t.measured}, {"threshold", t.threshold}};
}

void to_json(json& j, const SleepReport& r) {
    j = json{{"trigger", r.trigger},
             {"pairs_strengthened", r.pairs_strengthened},
             {"edges_downscaled", r.edges_downscaled},
             {"episodes_transferred", r.episodes_transferred},
             {"dreams_attempted", r.dreams_attempted},
             {"dreams_integrated", r.dreams_integrated},
             {"dream_paths", r.dream_paths},
             {"theta_f", r.theta_f},
             {"concepts_forgotten", r.concepts_forgotten},
             {"forgotten_ids", r.forgotten_ids},
             {"started_at", r.started_at},
             {"ended_at", r.ended_at}};
}

void to_json(json& j, const IngestReport& r) {
    json concepts = json::array();
    for (const auto& c : r.concepts) {
        concepts.push_back({{"id", c.id},
                            {"label", c.label},
                            {"ctype", to_string(c.ctype)},
                            {"value", c.value},
                            {"importance", c.importance},
                            {"is_new", c.is_new}});
    }
    j = json{{"concepts", std::move(concepts)},
             {"new_relations", r.new_relations},
             {"episode_id", r.episode_id},
             {"degraded", r.degraded},
             {"sleep", r.sleep ? json(*r.sleep) : json(nullptr)}};
    if (r.evicted) j["evicted_episode"] = r.evicted->eid;
}

void to_json(json& j, const QueryHit& h) {
    j = json{{"concept_id", h.hit.concept_id},
             {"label", h.label},
             {"ctype", to_string(h.ctype)},
             {"score", h.hit.fused_score},
             {"semantic", h.hit.semantic},
             {"importance", h.hit.importance},
             {"graph_proximity", h.hit.graph_proximity}};
}

void to_json(json& j, const EngineStats& s) {
    j = json{{"concepts", s.concepts},
             {"edges", s.edges},
             {"wm_size", s.wm_size},
             {"entropy", s.entropy},
             {"conflict_density", s.conflict_density},
             {"last_sleep", s.last_sleep}};
}

}  // namespace scm
