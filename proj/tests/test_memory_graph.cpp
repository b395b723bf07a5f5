#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "scm/error.hpp"
#include "scm/memory_graph.hpp"
#include "scm/valuation.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <tuple>

using namespace scm;

namespace {

Embedding random_unit(std::mt19937_64& rng, std::size_t dim) {
    std::normal_distribution<float> nd;
    std::vector<float> v(dim);
    double n = 0;
    for (auto& x : v) {
        x = nd(rng);
        n += double(x) * x;
    }
    n = std::sqrt(n);
    for (auto& x : v) x = float(x / n);
    return Embedding{std::move(v)};
}

Concept make(std::string label, double importance = 0.5, Embedding e = Embedding::null(4)) {
    Concept c;
    c.label = std::move(label);
    c.ctype = ConceptType::kFact;
    c.id = make_concept_id(c.label, c.ctype);
    c.embedding = std::move(e);
    c.value = ValueVector{importance, importance, importance, std::min(importance, 0.99)};
    c.importance = importance;
    return c;
}

ConceptId put(MemoryGraph& g, std::string label, double importance = 0.5,
              Embedding e = Embedding::null(4)) {
    Concept c = make(std::move(label), importance, std::move(e));
    const ConceptId id = c.id;
    g.put_concept(std::move(c));
    return id;
}

const Timestamp kNow{1000};

}  // namespace

TEST_CASE("upsert inserts and merges") {
    MemoryGraph g;
    Concept c = make("mumbai");
    c.access_count = 1;
    c.value = {0.4, 0.2, 0.1, 0.0};
    g.upsert_concept(c, Timestamp{10});
    CHECK(g.node_count() == 1);

    Concept again = c;
    again.value = {0.7, -0.5, 0.05, 0.0};
    again.created_at = Timestamp{50};
    g.upsert_concept(again, Timestamp{60});
    CHECK(g.node_count() == 1);
    const Concept* stored = g.find(c.id);
    REQUIRE(stored != nullptr);
    CHECK(stored->access_count == 2);
    CHECK(stored->value.novelty == 0.7);
    CHECK(stored->value.emotional == -0.5);
    CHECK(stored->value.task == 0.1);
    CHECK(stored->created_at == Timestamp{0});
    CHECK(stored->last_access == Timestamp{60});
    CHECK(stored->value.repetition == doctest::Approx(2.0 / 3.0));
    CHECK(stored->importance == doctest::Approx(composite_importance(stored->value)));
}

TEST_CASE("fixed importance rule overrides the tagger") {
    MemoryGraph g(ImportanceRule{{}, 0.5});
    Concept c = make("x", 0.9);
    g.upsert_concept(c, kNow);
    CHECK(g.find(c.id)->importance == 0.5);
}

TEST_CASE("protected nodes keep their importance") {
    MemoryGraph g;
    Concept self = make("SCM", 0.95);
    self.is_protected = true;
    g.upsert_concept(self, kNow);
    Concept mention = make("SCM", 0.1);
    mention.access_count = 1;
    g.upsert_concept(mention, kNow);
    CHECK(g.find(self.id)->importance == 0.95);
}

TEST_CASE("add_or_strengthen") {
    MemoryGraph g;
    const auto a = put(g, "a", 0.8), b = put(g, "b", 0.5);
    const double delta = 0.1 * 0.8 * 0.5;
    CHECK(g.add_or_strengthen(a, b, Predicate::kRelatedTo, delta, kNow) == doctest::Approx(0.04));
    g.put_relation(Relation{a, b, Predicate::kRelatedTo, 0.10, kNow});
    CHECK(g.add_or_strengthen(a, b, Predicate::kRelatedTo, 0.04, kNow) == doctest::Approx(0.14));
    CHECK(g.add_or_strengthen(b, a, Predicate::kCauses, 0.0, kNow) == 0.0);
    CHECK(g.strength(b, a, Predicate::kCauses) == 0.0);
    CHECK(g.edge_count() == 2);
    CHECK_THROWS_AS(g.add_or_strengthen(a, b, Predicate::kRelatedTo, -0.1, kNow), Error);
    try {
        g.add_or_strengthen(a, ConceptId{"fact:missing"}, Predicate::kRelatedTo, 0.1, kNow);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::kNotFound);
    }
}

TEST_CASE("semantic search") {
    MemoryGraph g;
    std::mt19937_64 rng(1);
    std::vector<Embedding> embs;
    for (int i = 0; i < 5; ++i) {
        embs.push_back(random_unit(rng, 8));
        put(g, "c" + std::to_string(i), 0.5, embs.back());
    }
    const auto hits = g.semantic_search(embs[3], 2);
    REQUIRE(hits.size() == 2);
    CHECK(hits[0].id == make_concept_id("c3", ConceptType::kFact));
    CHECK(hits[0].cosine == doctest::Approx(1.0));
    CHECK(g.semantic_search(embs[0], 50).size() == 5);
    CHECK_THROWS_AS(g.semantic_search(embs[0], 0), Error);
}

TEST_CASE("semantic search ties break by access count, recency, then id") {
    MemoryGraph g;
    const Embedding e{{1.0F, 0.0F}};
    Concept a = make("a", 0.5, e), b = make("b", 0.5, e), c = make("c", 0.5, e), d = make("d", 0.5, e);
    a.access_count = 1;
    b.access_count = 3;
    c.access_count = 1;
    c.created_at = Timestamp{5};
    c.last_access = Timestamp{5};
    for (auto* x : {&a, &b, &c, &d}) g.put_concept(*x);
    const auto hits = g.semantic_search(e, 4);
    REQUIRE(hits.size() == 4);
    CHECK(hits[0].id == b.id);
    CHECK(hits[1].id == c.id);
    CHECK(hits[2].id == a.id);
    CHECK(hits[3].id == d.id);
}

TEST_CASE("semantic search equals a brute-force sort") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 20; ++trial) {
        MemoryGraph g;
        const std::size_t n = 1 + rng() % 1000;
        const std::size_t dim = 4 + rng() % 60;
        std::vector<Concept> all;
        for (std::size_t i = 0; i < n; ++i) {
            Concept c = make("n" + std::to_string(i), 0.5, random_unit(rng, dim));
            // coarse vectors make exact ties likely
            if (rng() % 4 == 0) c.embedding = all.empty() ? c.embedding : all[rng() % all.size()].embedding;
            c.access_count = rng() % 3;
            c.created_at = Timestamp{static_cast<std::int64_t>(rng() % 5)};
            c.last_access = c.created_at;
            g.put_concept(c);
            all.push_back(c);
        }
        const Embedding q = rng() % 2 == 0 ? all[rng() % n].embedding : random_unit(rng, dim);
        std::vector<std::tuple<double, const Concept*>> ref;
        for (const auto& c : all) {
            double dot = 0, nq = 0, nc = 0;
            for (std::size_t j = 0; j < dim; ++j) {
                dot += double(q.values[j]) * c.embedding.values[j];
                nq += double(q.values[j]) * q.values[j];
                nc += double(c.embedding.values[j]) * c.embedding.values[j];
            }
            ref.emplace_back(dot / std::sqrt(nq * nc), &c);
        }
        std::sort(ref.begin(), ref.end(), [](const auto& x, const auto& y) {
            const auto& [sx, cx] = x;
            const auto& [sy, cy] = y;
            if (std::abs(sx - sy) > 1e-12) return sx > sy;
            if (cx->access_count != cy->access_count) return cx->access_count > cy->access_count;
            if (cx->created_at != cy->created_at) return cx->created_at > cy->created_at;
            return cx->id < cy->id;
        });
        const std::size_t k = 1 + rng() % 20;
        const auto hits = g.semantic_search(q, k);
        REQUIRE(hits.size() == std::min(k, n));
        for (std::size_t i = 0; i < hits.size(); ++i) {
            CHECK(hits[i].id == std::get<1>(ref[i])->id);
            CHECK(hits[i].cosine == doctest::Approx(std::get<0>(ref[i])).epsilon(1e-9));
        }
    }
}

TEST_CASE("neighbors") {
    MemoryGraph g;
    const auto seed = put(g, "seed"), x = put(g, "x"), y = put(g, "y"), z = put(g, "z"),
               far = put(g, "far"), foe = put(g, "foe");
    g.add_or_strengthen(seed, x, Predicate::kRelatedTo, 0.1, kNow);
    g.add_or_strengthen(y, seed, Predicate::kPartOf, 0.1, kNow);
    g.add_or_strengthen(seed, z, Predicate::kHasProperty, 0.1, kNow);
    g.add_or_strengthen(z, far, Predicate::kRelatedTo, 0.1, kNow);
    g.add_or_strengthen(seed, foe, Predicate::kContradicts, 0.1, kNow);

    const auto one = g.neighbors(seed, 1);
    REQUIRE(one.size() == 3);
    std::vector<ConceptId> ids;
    for (const auto& n : one) {
        CHECK(n.hops == 1);
        ids.push_back(n.id);
    }
    std::vector<ConceptId> want{x, y, z};
    std::sort(want.begin(), want.end());
    CHECK(ids == want);
    CHECK(g.neighbors(seed, 0).empty());
    CHECK_THROWS_AS(g.neighbors(ConceptId{"fact:nope"}, 1), Error);

    MemoryGraph chain;
    const auto a = put(chain, "a"), b = put(chain, "b"), c = put(chain, "c");
    chain.add_or_strengthen(a, b, Predicate::kRelatedTo, 1, kNow);
    chain.add_or_strengthen(b, c, Predicate::kRelatedTo, 1, kNow);
    const auto two = chain.neighbors(a, 2);
    REQUIRE(two.size() == 2);
    CHECK(two[0].id == b);
    CHECK(two[0].hops == 1);
    CHECK(two[1].id == c);
    CHECK(two[1].hops == 2);
}

TEST_CASE("retrieve fuses three signals and marks hits accessed") {
    MemoryGraph g;
    const Embedding e{{1.0F, 0.0F, 0.0F, 0.0F}};
    const auto id = put(g, "target", 0.5, e);
    const auto hits = g.retrieve(e, 1, FusionWeights{}, Timestamp{77});
    REQUIRE(hits.size() == 1);
    CHECK(hits[0].concept_id == id);
    CHECK(hits[0].semantic == doctest::Approx(1.0));
    CHECK(hits[0].graph_proximity == 1.0);
    CHECK(hits[0].fused_score == doctest::Approx(0.85));
    CHECK(g.find(id)->access_count == 1);
    CHECK(g.find(id)->last_access == Timestamp{77});

    MemoryGraph empty;
    CHECK(empty.retrieve(e, 3, FusionWeights{}, kNow).empty());
}

TEST_CASE("retrieve pulls in graph neighbors of the seeds") {
    MemoryGraph g;
    const Embedding q{{1.0F, 0.0F, 0.0F, 0.0F}};
    const Embedding other{{0.0F, 1.0F, 0.0F, 0.0F}};
    const auto seed = put(g, "seed", 0.5, q);
    const auto linked = put(g, "linked", 0.5, other);
    put(g, "lonely", 0.5, Embedding{{0.0F, 0.0F, 1.0F, 0.0F}});
    g.add_or_strengthen(seed, linked, Predicate::kRelatedTo, 0.1, kNow);
    const auto hits = g.retrieve(q, 3, FusionWeights{}, kNow);
    REQUIRE(hits.size() == 3);
    CHECK(hits[0].concept_id == seed);
    bool saw = false;
    for (const auto& h : hits) {
        CHECK(h.fused_score ==
              doctest::Approx(0.5 * h.semantic + 0.3 * h.importance + 0.2 * h.graph_proximity));
        if (h.concept_id == linked) {
            saw = true;
            CHECK(h.graph_proximity >= 0.5);
        }
    }
    CHECK(saw);
}

TEST_CASE("retrieve is deterministic") {
    std::mt19937_64 rng(8);
    MemoryGraph a, b;
    for (int i = 0; i < 50; ++i) {
        const auto e = random_unit(rng, 8);
        put(a, "n" + std::to_string(i), 0.3, e);
        put(b, "n" + std::to_string(i), 0.3, e);
    }
    const auto q = random_unit(rng, 8);
    for (int i = 0; i < 5; ++i) {
        const auto x = a.retrieve(q, 3, FusionWeights{}, kNow);
        const auto y = b.retrieve(q, 3, FusionWeights{}, kNow);
        REQUIRE(x.size() == y.size());
        for (std::size_t j = 0; j < x.size(); ++j) CHECK(x[j].concept_id == y[j].concept_id);
    }
}

TEST_CASE("conflict density") {
    MemoryGraph g;
    CHECK(g.conflict_density() == 0.0);
    std::vector<ConceptId> ids;
    for (int i = 0; i < 11; ++i) ids.push_back(put(g, "n" + std::to_string(i)));
    for (int i = 0; i < 10; ++i) {
        g.add_or_strengthen(ids[i], ids[i + 1], i < 3 ? Predicate::kContradicts : Predicate::kRelatedTo,
                            0.1, kNow);
    }
    CHECK(g.conflict_density() == doctest::Approx(0.3));

    MemoryGraph all;
    const auto a = put(all, "a"), b = put(all, "b");
    all.add_or_strengthen(a, b, Predicate::kContradicts, 0.1, kNow);
    CHECK(all.conflict_density() == 1.0);
}

TEST_CASE("remove_concept") {
    MemoryGraph g;
    const auto hub = put(g, "hub");
    for (int i = 0; i < 4; ++i) {
        const auto n = put(g, "spoke" + std::to_string(i));
        if (i % 2 == 0) {
            g.add_or_strengthen(hub, n, Predicate::kRelatedTo, 0.1, kNow);
        } else {
            g.add_or_strengthen(n, hub, Predicate::kContradicts, 0.1, kNow);
        }
    }
    const auto a = ConceptId{make_concept_id("spoke0", ConceptType::kFact)};
    const auto b = ConceptId{make_concept_id("spoke2", ConceptType::kFact)};
    g.add_or_strengthen(a, b, Predicate::kRelatedTo, 0.1, kNow);
    CHECK(g.edge_count() == 5);
    CHECK(g.remove_concept(hub) == 4);
    CHECK(g.edge_count() == 1);
    CHECK(g.contradicts_count() == 0);
    CHECK_FALSE(g.check_integrity().has_value());

    Concept self = make("SCM", 0.95);
    self.is_protected = true;
    g.put_concept(self);
    try {
        g.remove_concept(self.id);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::kPermission);
    }
    try {
        g.remove_concept(hub);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::kNotFound);
    }
}

TEST_CASE("invariants hold under random operation sequences") {
    std::mt19937_64 rng(2024);
    const Predicate preds[] = {Predicate::kHasProperty, Predicate::kPrefers, Predicate::kRelatedTo,
                               Predicate::kContradicts, Predicate::kCauses, Predicate::kPartOf};
    for (int trial = 0; trial < 30; ++trial) {
        MemoryGraph g;
        std::vector<ConceptId> ids;
        for (int step = 0; step < 400; ++step) {
            const auto op = rng() % 10;
            if (op < 3 || ids.size() < 2) {
                ids.push_back(put(g, "n" + std::to_string(rng() % 60), 0.5, random_unit(rng, 4)));
            } else if (op < 7) {
                const auto& a = ids[rng() % ids.size()];
                const auto& b = ids[rng() % ids.size()];
                if (g.contains(a) && g.contains(b)) {
                    g.add_or_strengthen(a, b, preds[rng() % 6], double(rng() % 100) / 100.0, kNow);
                }
            } else if (op < 8) {
                g.downscale(0.8);
            } else {
                const auto& a = ids[rng() % ids.size()];
                if (g.contains(a)) g.remove_concept(a);
            }
            const double rho = g.conflict_density();
            CHECK(rho >= 0.0);
            CHECK(rho <= 1.0);
        }
        const auto problem = g.check_integrity();
        CHECK_MESSAGE(!problem.has_value(), problem.value_or(""));
        std::size_t contradicts = 0;
        for (const auto& [_, r] : g.relations()) {
            CHECK(g.contains(r.src));
            CHECK(g.contains(r.dst));
            CHECK(r.strength >= 0.0);
            if (r.predicate == Predicate::kContradicts) ++contradicts;
        }
        CHECK(contradicts == g.contradicts_count());
    }
}
