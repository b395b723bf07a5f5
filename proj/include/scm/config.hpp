#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

namespace scm {

struct TaggerWeights {
    double novelty = 0.30;
    double emotional = 0.20;
    double task = 0.35;
    double repetition = 0.15;

    double sum() const { return novelty + emotional + task + repetition; }
    bool operator==(const TaggerWeights&) const = default;
};

struct FusionWeights {
    double semantic = 0.5;
    double importance = 0.3;
    double graph = 0.2;

    double sum() const { return semantic + importance + graph; }
    bool operator==(const FusionWeights&) const = default;
};

/// Switches for the ablation study. Everything on is the full engine.
struct Components {
    bool working_memory_limit = true;
    bool value_tagger = true;  // off: every unprotected importance is 0.5
    bool nrem = true;
    bool rem = true;
    bool forgetting = true;
    bool self_model = true;

    bool operator==(const Components&) const = default;
};

struct EngineConfig {
    std::size_t wm_capacity = 7;
    TaggerWeights tagger_weights;
    double eta = 0.1;               // Hebbian learning rate
    double alpha = 0.8;             // synaptic downscale factor
    double lambda_per_hour = 0.01;  // recency decay
    double beta1 = 0.8;             // retention weight on importance
    double beta2 = 0.2;             // retention weight on recency
    double theta_e = 0.9;           // entropy trigger
    double theta_c = 0.3;           // conflict-density trigger
    double tau_hours = 1.0;         // elapsed-time trigger
    std::size_t target_size = 100;
    double theta_f_floor = 0.05;
    std::size_t rem_seed_count = 3;
    std::size_t rem_walk_steps = 5;
    std::size_t embedding_dim = 384;
    FusionWeights fusion_weights;
    std::uint64_t rng_seed = 42;

    // Evaluate the sleep triggers after every processed message.
    bool auto_sleep = true;

    std::string self_label = "SCM";
    Components components;

    bool operator==(const EngineConfig&) const = default;

    /// Throws Error(kConfig) describing the first violated constraint.
    void validate() const;
};

}  // namespace scm
