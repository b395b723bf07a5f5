#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace scm {

// ─── Time ──────────────────────────────────────────────────────
// UTC, microsecond resolution. Arithmetic on elapsed time is done in
// fractional hours because the decay rate is specified per hour.

struct Timestamp {
    std::int64_t micros = 0;

    auto operator<=>(const Timestamp&) const = default;

    static Timestamp from_hours(double hours) {
        return Timestamp{static_cast<std::int64_t>(hours * 3.6e9)};
    }
};

inline double hours_between(Timestamp earlier, Timestamp later) {
    return static_cast<double>(later.micros - earlier.micros) / 3.6e9;
}

std::string format_timestamp(Timestamp t);
std::optional<Timestamp> parse_timestamp(std::string_view text);

// ─── Identifiers and closed taxonomies ─────────────────────────

struct ConceptId {
    std::string value;

    auto operator<=>(const ConceptId&) const = default;
    bool empty() const { return value.empty(); }
};

enum class ConceptType { kPerson, kPreference, kFact, kEvent, kObject, kLocation, kAbstract };

enum class Predicate { kHasProperty, kPrefers, kRelatedTo, kContradicts, kCauses, kPartOf };

std::string_view to_string(ConceptType t);
std::string_view to_string(Predicate p);

/// Unknown names map to kAbstract.
ConceptType concept_type_from_string(std::string_view name);
std::optional<ConceptType> parse_concept_type(std::string_view name);

/// Unknown names map to kRelatedTo.
Predicate predicate_from_string(std::string_view name);
std::optional<Predicate> parse_predicate(std::string_view name);

/// Case-folds, trims and collapses internal whitespace.
std::string normalize_label(std::string_view label);

/// Content hash of (normalized label, type). Throws kInvalidArgument on a
/// label that is empty after trimming.
ConceptId make_concept_id(std::string_view label, ConceptType type);

// ─── Embedding ─────────────────────────────────────────────────
// Stored L2-normalized, or all-zero (the null embedding).

struct Embedding {
    std::vector<float> values;

    bool operator==(const Embedding&) const = default;

    static Embedding null(std::size_t dim) { return Embedding{std::vector<float>(dim, 0.0F)}; }

    std::size_t dim() const { return values.size(); }
    bool is_null() const;
    double norm() const;
};

/// Cosine similarity; 0 when either side is null or dimensions differ.
double cosine(const Embedding& a, const Embedding& b);

/// Dot product for vectors already known to be unit-length.
double dot(std::span<const float> a, std::span<const float> b);

// ─── Value tagging ─────────────────────────────────────────────

struct ValueVector {
    double novelty = 0.0;     // [0,1]
    double emotional = 0.0;   // [-1,1]
    double task = 0.0;        // [-1,1]
    double repetition = 0.0;  // [0,1)

    bool operator==(const ValueVector&) const = default;
    bool in_range() const;
};

// ─── Graph and episodic records ────────────────────────────────

struct Concept {
    ConceptId id;
    std::string label;
    ConceptType ctype = ConceptType::kAbstract;
    std::string description;
    Embedding embedding;
    ValueVector value;
    double importance = 0.0;
    Timestamp created_at;
    Timestamp last_access;
    std::uint64_t access_count = 0;
    bool is_protected = false;  // self-model nodes; exempt from forgetting

    bool operator==(const Concept&) const = default;
};

struct Relation {
    ConceptId src;
    ConceptId dst;
    Predicate predicate = Predicate::kRelatedTo;
    double strength = 0.0;
    Timestamp created_at;

    bool operator==(const Relation&) const = default;
};

struct Episode {
    std::string eid;
    Timestamp timestamp;
    std::vector<ConceptId> concept_ids;
    std::string text;
    ValueVector value;
    double importance = 0.0;
    Timestamp last_access;
    std::uint64_t access_count = 0;

    bool operator==(const Episode&) const = default;
};

}  // namespace scm

template <>
struct std::hash<scm::ConceptId> {
    std::size_t operator()(const scm::ConceptId& id) const noexcept {
        return std::hash<std::string>{}(id.value);
    }
};
