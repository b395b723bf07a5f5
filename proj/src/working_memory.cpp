#include "scm/working_memory.hpp"

#include "scm/error.hpp"
#include "scm/valuation.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace scm {

WorkingMemory::WorkingMemory(std::size_t capacity, TaggerWeights weights,
                             std::optional<double> fixed_importance)
    : capacity_(capacity), weights_(weights), fixed_importance_(fixed_importance) {
    if (capacity_ == 0) fail(ErrorKind::kConfig, "working memory capacity must be positive");
}

std::optional<Episode> WorkingMemory::admit(Episode episode) {
    if (episode.concept_ids.empty()) {
        fail(ErrorKind::kInvalidArgument, "episode has no concepts");
    }
    episodes_.push_back(std::move(episode));
    if (episodes_.size() > capacity_) {
        Episode evicted = std::move(episodes_.front());
        episodes_.pop_front();
        return evicted;
    }
    return std::nullopt;
}

const Episode& WorkingMemory::touch(std::string_view eid, Timestamp now) {
    auto it = std::find_if(episodes_.begin(), episodes_.end(),
                           [&](const Episode& e) { return e.eid == eid; });
    if (it == episodes_.end()) fail(ErrorKind::kNotFound, "episode " + std::string(eid));
    it->access_count += 1;
    it->last_access = std::max(it->last_access, now);
    std::uint64_t max_count = 0;
    for (const auto& e : episodes_) max_count = std::max(max_count, e.access_count);
    it->value.repetition = repetition(it->access_count, max_count);
    it->importance = fixed_importance_.value_or(composite_importance(it->value, weights_));
    return *it;
}

double WorkingMemory::entropy() const {
    std::vector<double> weights;
    weights.reserve(episodes_.size());
    for (const auto& e : episodes_) weights.push_back(e.importance);
    return normalized_entropy(weights);
}

void WorkingMemory::restore(std::deque<Episode> episodes) {
    if (episodes.size() > capacity_) {
        fail(ErrorKind::kIntegrity, "working memory holds more episodes than its capacity");
    }
    episodes_ = std::move(episodes);
}

double normalized_entropy(std::span<const double> weights) {
    if (weights.size() <= 1) return 0.0;
    double total = 0.0;
    for (double w : weights) total += std::max(w, 0.0);
    if (total <= 0.0) return 0.0;
    double h = 0.0;
    for (double w : weights) {
        const double p = std::max(w, 0.0) / total;
        if (p > 0.0) h -= p * std::log(p);
    }
    return std::clamp(h / std::log(static_cast<double>(weights.size())), 0.0, 1.0);
}

}  // namespace scm
