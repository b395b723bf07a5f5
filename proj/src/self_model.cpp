#include "scm/self_model.hpp"

#include "scm/encoding.hpp"

#include <sstream>

namespace scm {

namespace {

Concept protected_node(std::string label, std::string description, double importance,
                       Timestamp now, const EmbedFn& embed) {
    Concept c;
    c.id = make_concept_id(label, ConceptType::kAbstract);
    c.ctype = ConceptType::kAbstract;
    c.embedding = embed(label + " " + description);
    c.label = std::move(label);
    c.description = std::move(description);
    // equal dimensions under weights summing to 1 reproduce the importance
    c.value = ValueVector{importance, importance, importance, importance};
    c.importance = importance;
    c.created_at = now;
    c.last_access = now;
    c.is_protected = true;
    return c;
}

bool mentions(const std::vector<std::string>& tokens, std::initializer_list<std::string_view> words) {
    for (const auto& t : tokens) {
        for (auto w : words) {
            // trailing '*' marks a prefix match
            if (!w.empty() && w.back() == '*') {
                if (t.rfind(w.substr(0, w.size() - 1), 0) == 0) return true;
            } else if (t == w) {
                return true;
            }
        }
    }
    return false;
}

}  // namespace

SelfState init_self(MemoryGraph& ltm, const EngineConfig& config, Timestamp now,
                    const EmbedFn& embed) {
    SelfState state;
    Concept self = protected_node(config.self_label, "the memory system itself", kSelfImportance,
                                  now, embed);
    state.self_id = self.id;
    if (!ltm.contains(self.id)) ltm.put_concept(std::move(self));
    for (auto cap : kCapabilities) {
        Concept c = protected_node(std::string(cap), "capability of the memory system",
                                   kCapabilityImportance, now, embed);
        const ConceptId id = c.id;
        if (!ltm.contains(id)) ltm.put_concept(std::move(c));
        if (!ltm.strength(state.self_id, id, Predicate::kHasProperty)) {
            ltm.add_or_strengthen(state.self_id, id, Predicate::kHasProperty,
                                  kCapabilityEdgeStrength, now);
        }
        state.capability_ids.push_back(id);
    }
    return state;
}

std::string introspect(const SelfState& state, const MemoryGraph& ltm, std::string_view query) {
    const auto tokens = tokenize(query);
    const SelfCounters& n = state.counters;
    std::ostringstream out;
    std::string name = "this memory system";
    if (const Concept* self = ltm.find(state.self_id)) name = self->label;

    if (mentions(tokens, {"slept", "sleep*"})) {
        out << "I have completed " << n.sleep_cycles_completed << " sleep cycles and generated "
            << n.dreams_generated << " dreams.";
    } else if (mentions(tokens, {"dream*"})) {
        out << "I have generated " << n.dreams_generated << " dreams across "
            << n.sleep_cycles_completed << " sleep cycles.";
    } else if (mentions(tokens, {"capabilit*", "can", "able"})) {
        out << "I am " << name << ". I can:";
        for (const auto& id : state.capability_ids) {
            if (const Concept* c = ltm.find(id)) out << "\n- " << c->label;
        }
    } else if (mentions(tokens, {"memory", "memories", "remember", "know", "concept*"})) {
        out << "I hold " << ltm.node_count() << " concepts connected by " << ltm.edge_count()
            << " relations, built from " << n.messages_processed << " messages.";
    } else {
        out << "I am " << name << ". I hold " << ltm.node_count() << " concepts and "
            << ltm.edge_count() << " relations, have processed " << n.messages_processed
            << " messages, completed " << n.sleep_cycles_completed << " sleep cycles and generated "
            << n.dreams_generated << " dreams.";
    }
    return out.str();
}

}  // namespace scm
