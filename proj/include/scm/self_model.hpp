#pragma once

#include "scm/config.hpp"
#include "scm/memory_graph.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace scm {

inline constexpr double kSelfImportance = 0.95;
inline constexpr double kCapabilityImportance = 0.5;
inline constexpr double kCapabilityEdgeStrength = 0.5;

inline constexpr std::array<std::string_view, 10> kCapabilities{
    "encode meaning",          "tag value",           "hold working memory",
    "store long-term memory",  "consolidate in NREM", "dream in REM",
    "forget intentionally",    "introspect",          "persist memory",
    "answer queries",
};

struct SelfCounters {
    std::uint64_t messages_processed = 0;
    std::uint64_t sleep_cycles_completed = 0;
    std::uint64_t dreams_generated = 0;

    bool operator==(const SelfCounters&) const = default;
};

struct SelfState {
    ConceptId self_id;
    std::vector<ConceptId> capability_ids;
    SelfCounters counters;
};

using EmbedFn = std::function<Embedding(std::string_view)>;

/// Ensures the protected self node and its ten capability nodes exist,
/// each capability linked from the self node by has_property. Idempotent:
/// existing nodes and edges are left as they are.
SelfState init_self(MemoryGraph& ltm, const EngineConfig& config, Timestamp now,
                    const EmbedFn& embed);

/// Deterministic, template-based self report chosen by keyword.
std::string introspect(const SelfState& state, const MemoryGraph& ltm, std::string_view query);

}  // namespace scm
