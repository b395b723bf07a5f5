#include "scm/valuation.hpp"

#include "scm/error.hpp"

#include <algorithm>
#include <cmath>

namespace scm {

double novelty(const Embedding& embedding, std::span<const Embedding* const> memory) {
    if (embedding.is_null()) fail(ErrorKind::kInvalidArgument, "novelty of a null embedding");
    if (memory.empty()) return 1.0;
    double best = -1.0;
    for (const Embedding* other : memory) best = std::max(best, cosine(embedding, *other));
    return std::clamp(1.0 - best, 0.0, 1.0);
}

double novelty(const Embedding& embedding, std::span<const Embedding> memory) {
    std::vector<const Embedding*> ptrs;
    ptrs.reserve(memory.size());
    for (const auto& e : memory) ptrs.push_back(&e);
    return novelty(embedding, std::span<const Embedding* const>(ptrs));
}

double task_relevance(const Embedding& embedding, const SessionGoal& goal) {
    if (embedding.is_null() || goal.embedding.is_null()) return 0.0;
    return std::clamp(cosine(embedding, goal.embedding), -1.0, 1.0);
}

double repetition(std::uint64_t access_count, std::uint64_t max_access_count) {
    if (access_count > max_access_count) {
        fail(ErrorKind::kInvalidArgument, "access_count exceeds max_access_count");
    }
    return static_cast<double>(access_count) / (static_cast<double>(max_access_count) + 1.0);
}

double composite_importance(const ValueVector& v, const TaggerWeights& w) {
    const double raw = w.novelty * v.novelty + w.emotional * std::abs(v.emotional) +
                       w.task * std::max(v.task, 0.0) + w.repetition * v.repetition;
    return std::clamp(raw, 0.0, 1.0);
}

}  // namespace scm
