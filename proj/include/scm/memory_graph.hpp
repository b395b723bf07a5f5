#pragma once

#include "scm/config.hpp"
#include "scm/types.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <tuple>
#include <utility>
#include <vector>

namespace scm {

struct EdgeKey {
    ConceptId src;
    ConceptId dst;
    Predicate predicate = Predicate::kRelatedTo;

    auto operator<=>(const EdgeKey&) const = default;
};

struct RetrievalHit {
    ConceptId concept_id;
    double fused_score = 0.0;
    double semantic = 0.0;
    double importance = 0.0;
    double graph_proximity = 0.0;
};

struct ScoredConcept {
    ConceptId id;
    double cosine = 0.0;
};

struct Neighbor {
    ConceptId id;
    std::size_t hops = 0;
};

/// How importance is derived from a value vector. With the value tagger
/// ablated every unprotected concept gets a fixed score instead.
struct ImportanceRule {
    TaggerWeights weights;
    std::optional<double> fixed;

    double operator()(const ValueVector& v) const;
};

/// Directed, typed, weighted concept graph: the durable store.
///
/// At most one edge per (src, dst, predicate). Strengths never go negative.
/// Iteration order is by id so every derived quantity is reproducible.
class MemoryGraph {
public:
    explicit MemoryGraph(ImportanceRule rule = {}) : rule_(rule) {}

    void set_importance_rule(ImportanceRule rule) { rule_ = rule; }
    const ImportanceRule& importance_rule() const { return rule_; }

    // ── nodes ──

    /// Inserts, or merges into the existing node: earliest created_at,
    /// summed access counts, per-dimension max magnitude, repetition
    /// refreshed from counts, importance recomputed, last_access = now.
    /// Protected nodes keep their pinned importance.
    ConceptId upsert_concept(Concept c, Timestamp now);

    /// Inserts or replaces verbatim (snapshot load, benchmark injection).
    void put_concept(Concept c);

    /// Counts one access and refreshes repetition/importance.
    const Concept& touch(const ConceptId& id, Timestamp now);

    /// Removes the node and its incident edges. Throws kPermission for
    /// protected nodes, kNotFound for unknown ids.
    std::size_t remove_concept(const ConceptId& id);

    const Concept* find(const ConceptId& id) const;
    bool contains(const ConceptId& id) const { return concepts_.count(id) != 0; }
    const std::map<ConceptId, Concept>& concepts() const { return concepts_; }
    std::size_t node_count() const { return concepts_.size(); }
    std::size_t unprotected_count() const;
    std::uint64_t max_access_count() const;

    // ── edges ──

    /// Creates the edge with strength = delta or adds delta. Throws
    /// kNotFound for a missing endpoint, kInvalidArgument for delta < 0.
    double add_or_strengthen(const ConceptId& src, const ConceptId& dst, Predicate predicate,
                             double delta, Timestamp now);

    /// Inserts or replaces verbatim. Throws kNotFound for missing endpoints.
    void put_relation(const Relation& r);

    std::optional<double> strength(const ConceptId& src, const ConceptId& dst,
                                   Predicate predicate) const;

    /// Any edge in either direction with any predicate.
    bool linked(const ConceptId& a, const ConceptId& b) const;
    bool contradicts_between(const ConceptId& a, const ConceptId& b) const;

    /// Outgoing edges of a node, ordered by (dst, predicate).
    std::vector<const Relation*> out_edges(const ConceptId& id) const;

    /// Multiplies every strength by factor; returns the number of edges.
    std::size_t downscale(double factor);

    const std::map<EdgeKey, Relation>& relations() const { return relations_; }
    std::size_t edge_count() const { return relations_.size(); }
    std::size_t contradicts_count() const { return contradicts_; }

    /// |contradicts| / |E|, 0 for an edgeless graph.
    double conflict_density() const;

    /// Sum of incident edge strengths. Informational only.
    double cumulative_strength(const ConceptId& id) const;

    // ── retrieval ──

    /// Exhaustive cosine scan, top-k. Ties: higher access_count, then newer
    /// created_at, then id ascending.
    std::vector<ScoredConcept> semantic_search(const Embedding& query, std::size_t k) const;

    /// BFS over in- and out-edges (contradicts excluded), each node at its
    /// minimum hop distance, ordered by (hops, id). Throws kNotFound.
    std::vector<Neighbor> neighbors(const ConceptId& seed, std::size_t max_hops) const;

    /// Fuses semantic similarity, importance and graph proximity, returns
    /// the top-k and marks each returned concept accessed.
    std::vector<RetrievalHit> retrieve(const Embedding& query, std::size_t k,
                                       const FusionWeights& weights, Timestamp now);

    /// Full recount of invariants; returns a description of the first
    /// violation or nullopt.
    std::optional<std::string> check_integrity() const;

    void clear();

private:
    bool ranks_before(const Concept& a, const Concept& b) const;
    void refresh_importance(Concept& c, std::uint64_t max_count) const;

    ImportanceRule rule_;
    std::map<ConceptId, Concept> concepts_;
    std::map<EdgeKey, Relation> relations_;
    std::map<ConceptId, std::set<EdgeKey>> out_;
    std::map<ConceptId, std::set<EdgeKey>> in_;
    std::size_t contradicts_ = 0;
};

}  // namespace scm
