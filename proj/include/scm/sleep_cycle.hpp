#pragma once

#include "scm/config.hpp"
#include "scm/memory_graph.hpp"
#include "scm/types.hpp"
#include "scm/working_memory.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

namespace scm {

enum class SleepReason { kEntropy, kConflict, kTime, kManual };

std::string_view to_string(SleepReason r);

struct SleepTrigger {
    SleepReason reason = SleepReason::kManual;
    double measured = 0.0;
    double threshold = 0.0;

    static SleepTrigger manual() { return SleepTrigger{}; }
};

struct DreamOutcome {
    std::vector<ConceptId> path;  // includes the seed
    bool integrated = false;
};

struct SleepReport {
    SleepTrigger trigger;
    std::size_t pairs_strengthened = 0;
    std::size_t edges_downscaled = 0;
    std::size_t episodes_transferred = 0;
    std::size_t dreams_attempted = 0;
    std::size_t dreams_integrated = 0;
    std::vector<std::vector<ConceptId>> dream_paths;
    double theta_f = 0.0;
    std::size_t concepts_forgotten = 0;
    std::vector<ConceptId> forgotten_ids;
    Timestamp started_at;
    Timestamp ended_at;
};

/// Checks entropy, conflict density and elapsed time, in that order, and
/// returns the first exceeded. The entropy trigger is only armed while the
/// working memory is at capacity.
std::optional<SleepTrigger> should_sleep(const WorkingMemory& wm, const MemoryGraph& ltm,
                                         Timestamp last_sleep, Timestamp now,
                                         const EngineConfig& config);

struct NremResult {
    std::size_t pairs_strengthened = 0;
    std::size_t edges_downscaled = 0;
    std::size_t episodes_transferred = 0;
    std::vector<ConceptId> replayed;  // episode concepts, in replay order, deduplicated
};

/// Hebbian replay of every episode pair, one global downscale, then the
/// working memory is handed over to long-term memory and cleared.
NremResult nrem_consolidate(WorkingMemory& wm, MemoryGraph& ltm, const EngineConfig& config,
                            Timestamp now, bool enabled = true);

/// Uniform double in [0,1) from the top 53 bits.
double unit_uniform(std::mt19937_64& rng);

/// P(next | node) over outgoing non-contradicts edges with positive strength.
std::vector<std::pair<ConceptId, double>> transition_probabilities(const MemoryGraph& ltm,
                                                                   const ConceptId& node);

/// Strength-weighted walk of at most `steps` transitions.
std::vector<ConceptId> random_walk(const MemoryGraph& ltm, const ConceptId& seed,
                                   std::size_t steps, std::mt19937_64& rng);

/// Top rem_seed_count of `replayed` by importance, then one walk per seed;
/// non-contradicting walks become related_to edges start -> end.
std::vector<DreamOutcome> rem_dream(MemoryGraph& ltm, const std::vector<ConceptId>& replayed,
                                    std::mt19937_64& rng, const EngineConfig& config,
                                    Timestamp now);

double retention_score(const Concept& c, Timestamp now, const EngineConfig& config);

/// mu_I - sigma_I * n / target_size over unprotected concepts, floored.
double adaptive_threshold(const MemoryGraph& ltm, const EngineConfig& config);

struct ForgetResult {
    double theta_f = 0.0;
    std::vector<ConceptId> forgotten;
};

ForgetResult forget(MemoryGraph& ltm, Timestamp now, const EngineConfig& config);

/// Seed for the REM walks of cycle number `cycle`.
std::uint64_t dream_seed(std::uint64_t rng_seed, std::uint64_t cycle);

}  // namespace scm
