#pragma once

#include "scm/config.hpp"
#include "scm/types.hpp"

#include <cstddef>
#include <deque>
#include <optional>
#include <string_view>

namespace scm {

/// Capacity-limited episodic buffer. Strict FIFO: a full buffer evicts its
/// oldest episode no matter how important it is.
class WorkingMemory {
public:
    static constexpr std::size_t kUnbounded = static_cast<std::size_t>(-1);

    explicit WorkingMemory(std::size_t capacity = 7, TaggerWeights weights = {},
                           std::optional<double> fixed_importance = std::nullopt);

    /// Appends; returns the evicted (oldest) episode when over capacity.
    std::optional<Episode> admit(Episode episode);

    /// Records an access: bumps the counter, refreshes the repetition
    /// dimension against the buffer's max count and recomputes importance.
    /// Throws kNotFound.
    const Episode& touch(std::string_view eid, Timestamp now);

    /// Shannon entropy of the importance distribution normalized by
    /// ln(size); 0 for size <= 1 or zero total importance.
    double entropy() const;

    const std::deque<Episode>& episodes() const { return episodes_; }
    std::size_t size() const { return episodes_.size(); }
    std::size_t capacity() const { return capacity_; }
    bool empty() const { return episodes_.empty(); }
    void clear() { episodes_.clear(); }

    /// Restores contents verbatim (snapshot load). Throws kIntegrity when the
    /// list exceeds capacity.
    void restore(std::deque<Episode> episodes);

private:
    std::size_t capacity_;
    TaggerWeights weights_;
    std::optional<double> fixed_importance_;
    std::deque<Episode> episodes_;
};

/// Shannon entropy of weights normalized by ln(n). Shared by the working
/// memory and tests.
double normalized_entropy(std::span<const double> weights);

}  // namespace scm
