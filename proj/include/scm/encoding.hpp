#pragma once

#include "scm/types.hpp"

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace scm {

enum class ExtractorKind { kRuleBased, kRemoteLlm };

struct ExtractedConcept {
    std::string label;
    ConceptType ctype = ConceptType::kAbstract;
    std::string description;
    std::optional<double> sentiment_hint;
};

struct ExtractedRelation {
    std::string src_label;
    ConceptType src_type = ConceptType::kAbstract;
    Predicate predicate = Predicate::kRelatedTo;
    std::string dst_label;
    ConceptType dst_type = ConceptType::kAbstract;
};

struct ExtractionResult {
    std::vector<ExtractedConcept> concepts;
    std::vector<ExtractedRelation> relations;
    bool degraded = false;  // remote extractor failed, rule-based result returned
};

/// Lets the extractor ask whether long-term memory already holds a concept
/// (used for contradiction detection). An empty function means "nothing".
using ConceptExists = std::function<bool(const ConceptId&)>;

// Label of the synthetic person concept anchoring first-person statements.
inline constexpr std::string_view kUserLabel = "user";

/// Lowercase alphanumeric tokens of length >= 2.
std::vector<std::string> tokenize(std::string_view text);

/// Frozen pattern table, applied per clause (split on . ! ? ; and "and"),
/// first match wins:
///   my name is X        -> (X, person, "user's name")
///   i live in X         -> (X, location) + user related_to X
///   i work as|at X      -> (X, fact)
///   i like|love|enjoy X -> (X, preference, +hint) + user prefers X
///   i hate|dislike X    -> ("not X", preference, -hint) + user prefers "not X"
///                          + contradicts edge when the opposite stance exists
///   X is Y              -> (X, fact), (Y, abstract) + X has_property Y
/// Throws kInvalidArgument on empty text.
ExtractionResult extract_rule_based(std::string_view text, const ConceptExists& exists = {});

/// Signed feature hashing, L2-normalized. No tokens gives the null embedding.
Embedding hash_embed(std::string_view text, std::size_t dim);

/// Lexicon sentiment in [-1, 1]: mean over lexicon hits, 0 when none.
double lexicon_sentiment(std::string_view text);

/// Hint wins when present (clamped); otherwise the lexicon.
double sentiment(std::optional<double> hint, std::string_view text);

/// Coerces an untrusted extraction document into the closed taxonomies.
/// Unknown types become abstract, unknown predicates related_to; relations
/// whose endpoints cannot be resolved are dropped.
ExtractionResult coerce_extraction_json(std::string_view body, const ConceptExists& exists = {});

struct EncoderSettings {
    ExtractorKind kind = ExtractorKind::kRuleBased;
    std::string extractor_url;
    std::string embedder_url;
    std::size_t embedding_dim = 384;
    double request_timeout_secs = 10.0;

    /// EXTRACTOR_KIND, EXTRACTOR_URL, EMBEDDER_URL, EMBEDDING_DIM,
    /// REQUEST_TIMEOUT_SECS.
    static EncoderSettings from_env();
};

/// Extraction plus embedding, with local deterministic defaults and
/// optional remote endpoints that fall back on failure.
class MeaningEncoder {
public:
    explicit MeaningEncoder(EncoderSettings settings = {});

    const EncoderSettings& settings() const { return settings_; }
    std::size_t dim() const { return settings_.embedding_dim; }

    ExtractionResult extract(std::string_view text, const ConceptExists& exists = {}) const;

    /// Throws kConfig when a remote embedder answers with the wrong dimension.
    Embedding embed(std::string_view text, bool* degraded = nullptr) const;

private:
    EncoderSettings settings_;
};

}  // namespace scm
