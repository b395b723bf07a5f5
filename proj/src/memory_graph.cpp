#include "scm/memory_graph.hpp"

#include "scm/error.hpp"
#include "scm/valuation.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace scm {

namespace {

double larger_magnitude(double a, double b) { return std::abs(b) > std::abs(a) ? b : a; }

}  // namespace

double ImportanceRule::operator()(const ValueVector& v) const {
    if (fixed) return *fixed;
    return composite_importance(v, weights);
}

// ─── nodes ─────────────────────────────────────────────────────

bool MemoryGraph::ranks_before(const Concept& a, const Concept& b) const {
    if (a.access_count != b.access_count) return a.access_count > b.access_count;
    if (a.created_at != b.created_at) return a.created_at > b.created_at;
    return a.id < b.id;
}

void MemoryGraph::refresh_importance(Concept& c, std::uint64_t max_count) const {
    if (c.is_protected) return;
    c.value.repetition = repetition(c.access_count, std::max(max_count, c.access_count));
    c.importance = rule_(c.value);
}

ConceptId MemoryGraph::upsert_concept(Concept c, Timestamp now) {
    if (c.id.empty()) c.id = make_concept_id(c.label, c.ctype);
    auto it = concepts_.find(c.id);
    if (it == concepts_.end()) {
        if (!c.is_protected) c.importance = rule_(c.value);
        if (c.last_access < c.created_at) c.last_access = c.created_at;
        const ConceptId id = c.id;
        concepts_.emplace(id, std::move(c));
        return id;
    }
    Concept& e = it->second;
    e.created_at = std::min(e.created_at, c.created_at);
    e.access_count += c.access_count;
    e.value.novelty = std::max(e.value.novelty, c.value.novelty);
    e.value.emotional = larger_magnitude(e.value.emotional, c.value.emotional);
    e.value.task = larger_magnitude(e.value.task, c.value.task);
    if (e.embedding.is_null() && !c.embedding.is_null()) e.embedding = std::move(c.embedding);
    if (e.description.empty()) e.description = std::move(c.description);
    e.last_access = std::max({e.last_access, now, e.created_at});
    refresh_importance(e, max_access_count());
    return e.id;
}

void MemoryGraph::put_concept(Concept c) {
    const ConceptId id = c.id;
    concepts_.insert_or_assign(id, std::move(c));
}

const Concept& MemoryGraph::touch(const ConceptId& id, Timestamp now) {
    auto it = concepts_.find(id);
    if (it == concepts_.end()) fail(ErrorKind::kNotFound, "concept " + id.value);
    Concept& c = it->second;
    c.access_count += 1;
    c.last_access = std::max(c.last_access, now);
    refresh_importance(c, max_access_count());
    return c;
}

std::size_t MemoryGraph::remove_concept(const ConceptId& id) {
    auto it = concepts_.find(id);
    if (it == concepts_.end()) fail(ErrorKind::kNotFound, "concept " + id.value);
    if (it->second.is_protected) {
        fail(ErrorKind::kPermission, "concept " + id.value + " is protected");
    }
    std::set<EdgeKey> incident;
    if (auto o = out_.find(id); o != out_.end()) incident.insert(o->second.begin(), o->second.end());
    if (auto i = in_.find(id); i != in_.end()) incident.insert(i->second.begin(), i->second.end());
    for (const auto& key : incident) {
        if (key.predicate == Predicate::kContradicts) --contradicts_;
        relations_.erase(key);
        if (auto o = out_.find(key.src); o != out_.end()) o->second.erase(key);
        if (auto i = in_.find(key.dst); i != in_.end()) i->second.erase(key);
    }
    out_.erase(id);
    in_.erase(id);
    concepts_.erase(it);
    return incident.size();
}

const Concept* MemoryGraph::find(const ConceptId& id) const {
    auto it = concepts_.find(id);
    return it == concepts_.end() ? nullptr : &it->second;
}

std::size_t MemoryGraph::unprotected_count() const {
    return static_cast<std::size_t>(std::count_if(
        concepts_.begin(), concepts_.end(), [](const auto& kv) { return !kv.second.is_protected; }));
}

std::uint64_t MemoryGraph::max_access_count() const {
    std::uint64_t m = 0;
    for (const auto& [_, c] : concepts_) m = std::max(m, c.access_count);
    return m;
}

// ─── edges ─────────────────────────────────────────────────────

double MemoryGraph::add_or_strengthen(const ConceptId& src, const ConceptId& dst,
                                      Predicate predicate, double delta, Timestamp now) {
    if (!(delta >= 0.0)) fail(ErrorKind::kInvalidArgument, "strength delta must be >= 0");
    if (!contains(src)) fail(ErrorKind::kNotFound, "concept " + src.value);
    if (!contains(dst)) fail(ErrorKind::kNotFound, "concept " + dst.value);
    EdgeKey key{src, dst, predicate};
    auto it = relations_.find(key);
    if (it != relations_.end()) {
        it->second.strength += delta;
        return it->second.strength;
    }
    put_relation(Relation{src, dst, predicate, delta, now});
    return delta;
}

void MemoryGraph::put_relation(const Relation& r) {
    if (!contains(r.src)) fail(ErrorKind::kNotFound, "concept " + r.src.value);
    if (!contains(r.dst)) fail(ErrorKind::kNotFound, "concept " + r.dst.value);
    if (!(r.strength >= 0.0)) fail(ErrorKind::kInvalidArgument, "relation strength must be >= 0");
    EdgeKey key{r.src, r.dst, r.predicate};
    const bool fresh = relations_.insert_or_assign(key, r).second;
    if (fresh) {
        out_[r.src].insert(key);
        in_[r.dst].insert(key);
        if (r.predicate == Predicate::kContradicts) ++contradicts_;
    }
}

std::optional<double> MemoryGraph::strength(const ConceptId& src, const ConceptId& dst,
                                            Predicate predicate) const {
    auto it = relations_.find(EdgeKey{src, dst, predicate});
    if (it == relations_.end()) return std::nullopt;
    return it->second.strength;
}

bool MemoryGraph::linked(const ConceptId& a, const ConceptId& b) const {
    auto o = out_.find(a);
    if (o != out_.end()) {
        for (const auto& k : o->second) {
            if (k.dst == b) return true;
        }
    }
    auto i = in_.find(a);
    if (i != in_.end()) {
        for (const auto& k : i->second) {
            if (k.src == b) return true;
        }
    }
    return false;
}

bool MemoryGraph::contradicts_between(const ConceptId& a, const ConceptId& b) const {
    return relations_.count(EdgeKey{a, b, Predicate::kContradicts}) != 0 ||
           relations_.count(EdgeKey{b, a, Predicate::kContradicts}) != 0;
}

std::vector<const Relation*> MemoryGraph::out_edges(const ConceptId& id) const {
    std::vector<const Relation*> out;
    auto o = out_.find(id);
    if (o == out_.end()) return out;
    out.reserve(o->second.size());
    for (const auto& k : o->second) out.push_back(&relations_.at(k));
    return out;
}

std::size_t MemoryGraph::downscale(double factor) {
    for (auto& [_, r] : relations_) r.strength = std::max(0.0, r.strength * factor);
    return relations_.size();
}

double MemoryGraph::conflict_density() const {
    if (relations_.empty()) return 0.0;
    return static_cast<double>(contradicts_) / static_cast<double>(relations_.size());
}

double MemoryGraph::cumulative_strength(const ConceptId& id) const {
    double s = 0.0;
    if (auto o = out_.find(id); o != out_.end()) {
        for (const auto& k : o->second) s += relations_.at(k).strength;
    }
    if (auto i = in_.find(id); i != in_.end()) {
        for (const auto& k : i->second) {
            if (k.src != k.dst) s += relations_.at(k).strength;
        }
    }
    return s;
}

// ─── retrieval ─────────────────────────────────────────────────

std::vector<ScoredConcept> MemoryGraph::semantic_search(const Embedding& query,
                                                        std::size_t k) const {
    if (k == 0) fail(ErrorKind::kInvalidArgument, "k must be >= 1");
    struct Row {
        const Concept* c;
        double score;
    };
    std::vector<Row> rows;
    rows.reserve(concepts_.size());
    for (const auto& [_, c] : concepts_) rows.push_back({&c, cosine(query, c.embedding)});
    const std::size_t n = std::min(k, rows.size());
    std::partial_sort(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n), rows.end(),
                      [&](const Row& a, const Row& b) {
                          if (a.score != b.score) return a.score > b.score;
                          return ranks_before(*a.c, *b.c);
                      });
    std::vector<ScoredConcept> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back({rows[i].c->id, rows[i].score});
    return out;
}

std::vector<Neighbor> MemoryGraph::neighbors(const ConceptId& seed, std::size_t max_hops) const {
    if (!contains(seed)) fail(ErrorKind::kNotFound, "concept " + seed.value);
    std::map<ConceptId, std::size_t> dist{{seed, 0}};
    std::deque<ConceptId> frontier{seed};
    while (!frontier.empty()) {
        const ConceptId cur = frontier.front();
        frontier.pop_front();
        const std::size_t d = dist.at(cur);
        if (d >= max_hops) continue;
        auto visit = [&](const ConceptId& next) {
            if (dist.emplace(next, d + 1).second) frontier.push_back(next);
        };
        if (auto o = out_.find(cur); o != out_.end()) {
            for (const auto& k : o->second) {
                if (k.predicate != Predicate::kContradicts) visit(k.dst);
            }
        }
        if (auto i = in_.find(cur); i != in_.end()) {
            for (const auto& k : i->second) {
                if (k.predicate != Predicate::kContradicts) visit(k.src);
            }
        }
    }
    std::vector<Neighbor> out;
    for (const auto& [id, d] : dist) {
        if (d > 0) out.push_back({id, d});
    }
    std::sort(out.begin(), out.end(), [](const Neighbor& a, const Neighbor& b) {
        return std::tie(a.hops, a.id) < std::tie(b.hops, b.id);
    });
    return out;
}

std::vector<RetrievalHit> MemoryGraph::retrieve(const Embedding& query, std::size_t k,
                                                const FusionWeights& weights, Timestamp now) {
    if (k == 0) fail(ErrorKind::kInvalidArgument, "k must be >= 1");
    if (concepts_.empty()) return {};

    const auto semantic = semantic_search(query, 2 * k);
    std::map<ConceptId, double> proximity;
    std::size_t seeds = 0;
    for (const auto& hit : semantic) {
        if (seeds == 3 || hit.cosine <= 0.0) break;
        ++seeds;
        proximity[hit.id] = 1.0;
        for (const auto& n : neighbors(hit.id, 1)) {
            auto [it, _] = proximity.emplace(n.id, 0.0);
            it->second = std::max(it->second, 1.0 / (1.0 + static_cast<double>(n.hops)));
        }
    }
    std::set<ConceptId> candidates;
    for (const auto& hit : semantic) candidates.insert(hit.id);
    for (const auto& [id, _] : proximity) candidates.insert(id);

    std::vector<RetrievalHit> hits;
    hits.reserve(candidates.size());
    for (const auto& id : candidates) {
        const Concept& c = concepts_.at(id);
        RetrievalHit h;
        h.concept_id = id;
        h.semantic = cosine(query, c.embedding);
        h.importance = c.importance;
        auto p = proximity.find(id);
        h.graph_proximity = p == proximity.end() ? 0.0 : p->second;
        h.fused_score = weights.semantic * h.semantic + weights.importance * h.importance +
                        weights.graph * h.graph_proximity;
        hits.push_back(std::move(h));
    }
    std::sort(hits.begin(), hits.end(), [&](const RetrievalHit& a, const RetrievalHit& b) {
        if (a.fused_score != b.fused_score) return a.fused_score > b.fused_score;
        return ranks_before(concepts_.at(a.concept_id), concepts_.at(b.concept_id));
    });
    if (hits.size() > k) hits.resize(k);

    for (const auto& h : hits) {
        Concept& c = concepts_.at(h.concept_id);
        c.access_count += 1;
        c.last_access = std::max(c.last_access, now);
    }
    const std::uint64_t max_count = max_access_count();
    for (const auto& h : hits) refresh_importance(concepts_.at(h.concept_id), max_count);
    return hits;
}

std::optional<std::string> MemoryGraph::check_integrity() const {
    std::size_t contradicts = 0;
    std::size_t dim = 0;
    for (const auto& [id, c] : concepts_) {
        if (id != c.id) return "concept key mismatch for " + id.value;
        if (c.last_access < c.created_at) return "last_access precedes created_at for " + id.value;
        if (!(c.importance >= 0.0 && c.importance <= 1.0)) return "importance out of range for " + id.value;
        if (dim == 0) dim = c.embedding.dim();
        if (c.embedding.dim() != dim) return "embedding dimension mismatch for " + id.value;
    }
    std::size_t out_total = 0, in_total = 0;
    for (const auto& [key, r] : relations_) {
        if (key.src != r.src || key.dst != r.dst || key.predicate != r.predicate) {
            return "relation key mismatch";
        }
        if (!contains(r.src) || !contains(r.dst)) return "dangling relation " + r.src.value + " -> " + r.dst.value;
        if (!(r.strength >= 0.0) || !std::isfinite(r.strength)) return "invalid relation strength";
        if (r.predicate == Predicate::kContradicts) ++contradicts;
    }
    for (const auto& [id, keys] : out_) {
        for (const auto& k : keys) {
            if (k.src != id || relations_.count(k) == 0) return "stale out-adjacency";
        }
        out_total += keys.size();
    }
    for (const auto& [id, keys] : in_) {
        for (const auto& k : keys) {
            if (k.dst != id || relations_.count(k) == 0) return "stale in-adjacency";
        }
        in_total += keys.size();
    }
    if (out_total != relations_.size() || in_total != relations_.size()) {
        return "adjacency count mismatch";
    }
    if (contradicts != contradicts_) return "contradicts count mismatch";
    return std::nullopt;
}

void MemoryGraph::clear() {
    concepts_.clear();
    relations_.clear();
    out_.clear();
    in_.clear();
    contradicts_ = 0;
}

}  // namespace scm
