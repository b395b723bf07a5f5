#include "scm/sleep_cycle.hpp"

#include "scm/error.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace scm {

std::string_view to_string(SleepReason r) {
    switch (r) {
        case SleepReason::kEntropy: return "entropy";
        case SleepReason::kConflict: return "conflict";
        case SleepReason::kTime: return "time";
        case SleepReason::kManual: return "manual";
    }
    return "manual";
}

std::optional<SleepTrigger> should_sleep(const WorkingMemory& wm, const MemoryGraph& ltm,
                                         Timestamp last_sleep, Timestamp now,
                                         const EngineConfig& config) {
    if (wm.size() >= wm.capacity()) {
        const double h = wm.entropy();
        if (h > config.theta_e) return SleepTrigger{SleepReason::kEntropy, h, config.theta_e};
    }
    const double rho = ltm.conflict_density();
    if (rho > config.theta_c) return SleepTrigger{SleepReason::kConflict, rho, config.theta_c};
    const double elapsed = hours_between(last_sleep, now);
    if (elapsed > config.tau_hours) {
        return SleepTrigger{SleepReason::kTime, elapsed, config.tau_hours};
    }
    return std::nullopt;
}

// ─── NREM ──────────────────────────────────────────────────────

NremResult nrem_consolidate(WorkingMemory& wm, MemoryGraph& ltm, const EngineConfig& config,
                            Timestamp now, bool enabled) {
    NremResult result;
    std::set<ConceptId> seen;
    for (const auto& ep : wm.episodes()) {
        for (const auto& id : ep.concept_ids) {
            if (ltm.contains(id) && seen.insert(id).second) result.replayed.push_back(id);
        }
    }

    if (enabled) {
        // Increments use pre-downscale importance and all land before the
        // single downscale pass.
        for (const auto& ep : wm.episodes()) {
            const auto& ids = ep.concept_ids;
            for (std::size_t i = 0; i < ids.size(); ++i) {
                for (std::size_t j = i + 1; j < ids.size(); ++j) {
                    if (ids[i] == ids[j]) continue;
                    const Concept* a = ltm.find(ids[i]);
                    const Concept* b = ltm.find(ids[j]);
                    if (a == nullptr || b == nullptr) continue;
                    const double delta = config.eta * a->importance * b->importance;
                    ltm.add_or_strengthen(a->id, b->id, Predicate::kRelatedTo, delta, now);
                    ++result.pairs_strengthened;
                }
            }
        }
        result.edges_downscaled = ltm.downscale(config.alpha);
    }

    // Concepts reach long-term memory at ingest, so the hand-over is the
    // replay itself followed by clearing the buffer.
    result.episodes_transferred = wm.size();
    wm.clear();
    return result;
}

// ─── REM ───────────────────────────────────────────────────────

double unit_uniform(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::vector<std::pair<ConceptId, double>> transition_probabilities(const MemoryGraph& ltm,
                                                                   const ConceptId& node) {
    std::vector<std::pair<ConceptId, double>> out;
    double total = 0.0;
    for (const Relation* r : ltm.out_edges(node)) {
        if (r->predicate == Predicate::kContradicts || r->strength <= 0.0) continue;
        // parallel edges to the same neighbor pool their strength
        if (!out.empty() && out.back().first == r->dst) {
            out.back().second += r->strength;
        } else {
            out.emplace_back(r->dst, r->strength);
        }
        total += r->strength;
    }
    for (auto& [_, p] : out) p /= total;
    return out;
}

std::vector<ConceptId> random_walk(const MemoryGraph& ltm, const ConceptId& seed,
                                   std::size_t steps, std::mt19937_64& rng) {
    std::vector<ConceptId> path{seed};
    ConceptId cur = seed;
    for (std::size_t s = 0; s < steps; ++s) {
        const auto probs = transition_probabilities(ltm, cur);
        if (probs.empty()) break;
        const double u = unit_uniform(rng);
        double acc = 0.0;
        ConceptId next = probs.back().first;
        for (const auto& [id, p] : probs) {
            acc += p;
            if (u < acc) {
                next = id;
                break;
            }
        }
        path.push_back(next);
        cur = next;
    }
    return path;
}

std::vector<DreamOutcome> rem_dream(MemoryGraph& ltm, const std::vector<ConceptId>& replayed,
                                    std::mt19937_64& rng, const EngineConfig& config,
                                    Timestamp now) {
    std::vector<const Concept*> seeds;
    for (const auto& id : replayed) {
        if (const Concept* c = ltm.find(id)) seeds.push_back(c);
    }
    std::sort(seeds.begin(), seeds.end(), [](const Concept* a, const Concept* b) {
        if (a->importance != b->importance) return a->importance > b->importance;
        return a->id < b->id;
    });
    if (seeds.size() > config.rem_seed_count) seeds.resize(config.rem_seed_count);
    std::vector<ConceptId> seed_ids;
    for (const Concept* c : seeds) seed_ids.push_back(c->id);

    std::vector<DreamOutcome> dreams;
    for (const auto& seed : seed_ids) {
        DreamOutcome d;
        d.path = random_walk(ltm, seed, config.rem_walk_steps, rng);
        const ConceptId& start = d.path.front();
        const ConceptId& end = d.path.back();
        bool valid = d.path.size() > 1 && start != end && !ltm.linked(start, end);
        for (std::size_t i = 0; valid && i + 1 < d.path.size(); ++i) {
            if (ltm.contradicts_between(d.path[i], d.path[i + 1])) valid = false;
        }
        if (valid) {
            ltm.add_or_strengthen(start, end, Predicate::kRelatedTo, config.eta, now);
            d.integrated = true;
        }
        dreams.push_back(std::move(d));
    }
    return dreams;
}

// ─── Forgetting ────────────────────────────────────────────────

double retention_score(const Concept& c, Timestamp now, const EngineConfig& config) {
    const double dt = std::max(0.0, hours_between(c.last_access, now));
    const double recency = std::exp(-config.lambda_per_hour * dt);
    return config.beta1 * c.importance + config.beta2 * recency;
}

double adaptive_threshold(const MemoryGraph& ltm, const EngineConfig& config) {
    std::vector<double> importances;
    for (const auto& [_, c] : ltm.concepts()) {
        if (!c.is_protected) importances.push_back(c.importance);
    }
    if (importances.empty()) return config.theta_f_floor;
    const double n = static_cast<double>(importances.size());
    double mean = 0.0;
    for (double v : importances) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : importances) var += (v - mean) * (v - mean);
    const double sigma = std::sqrt(var / n);
    const double raw = mean - sigma * (n / static_cast<double>(config.target_size));
    return std::max(config.theta_f_floor, raw);
}

ForgetResult forget(MemoryGraph& ltm, Timestamp now, const EngineConfig& config) {
    ForgetResult result;
    result.theta_f = adaptive_threshold(ltm, config);
    for (const auto& [id, c] : ltm.concepts()) {
        if (c.is_protected) continue;
        if (retention_score(c, now, config) < result.theta_f) result.forgotten.push_back(id);
    }
    for (const auto& id : result.forgotten) ltm.remove_concept(id);
    return result;
}

std::uint64_t dream_seed(std::uint64_t rng_seed, std::uint64_t cycle) {
    // splitmix64 finalizer
    std::uint64_t z = rng_seed + 0x9e3779b97f4a7c15ULL * (cycle + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace scm
