#pragma once

#include "scm/config.hpp"
#include "scm/types.hpp"

#include <cstdint>
#include <span>
#include <string>

namespace scm {

struct SessionGoal {
    std::string text;
    Embedding embedding;  // null when no goal is set

    bool operator==(const SessionGoal&) const = default;
};

/// 1 - max cosine against memory, clamped to [0,1]; empty memory is fully
/// novel. Throws kInvalidArgument for a null embedding.
double novelty(const Embedding& embedding, std::span<const Embedding* const> memory);
double novelty(const Embedding& embedding, std::span<const Embedding> memory);

/// Cosine to the goal; 0 when either side is null.
double task_relevance(const Embedding& embedding, const SessionGoal& goal);

/// access_count / (max_access_count + 1), in [0,1).
double repetition(std::uint64_t access_count, std::uint64_t max_access_count);

/// Weighted sum with |emotional| and the task term rectified at zero,
/// clamped to [0,1].
double composite_importance(const ValueVector& v, const TaggerWeights& weights = {});

}  // namespace scm
