#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "scm/clock.hpp"
#include "scm/config.hpp"
#include "scm/error.hpp"
#include "scm/types.hpp"

#include <cmath>
#include <random>

using namespace scm;

TEST_CASE("concept ids are content hashes of normalized label and type") {
    const auto a = make_concept_id("Mumbai", ConceptType::kLocation);
    CHECK(a == make_concept_id("Mumbai", ConceptType::kLocation));
    CHECK(a == make_concept_id("mumbai ", ConceptType::kLocation));
    CHECK(a == make_concept_id("  MUMBAI", ConceptType::kLocation));
    CHECK(a != make_concept_id("Mumbai", ConceptType::kPerson));
    CHECK(make_concept_id("new   york", ConceptType::kLocation) ==
          make_concept_id("New York", ConceptType::kLocation));
    CHECK(a.value.rfind("location:", 0) == 0);
}

TEST_CASE("empty labels are rejected") {
    CHECK_THROWS_AS(make_concept_id("", ConceptType::kFact), Error);
    try {
        make_concept_id("   \t", ConceptType::kFact);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::kInvalidArgument);
    }
}

TEST_CASE("normalize_label folds case and collapses whitespace") {
    CHECK(normalize_label("  Hello   World \n") == "hello world");
    CHECK(normalize_label("x") == "x");
}

TEST_CASE("taxonomy names round-trip and unknown names coerce") {
    for (auto t : {ConceptType::kPerson, ConceptType::kPreference, ConceptType::kFact,
                   ConceptType::kEvent, ConceptType::kObject, ConceptType::kLocation,
                   ConceptType::kAbstract}) {
        CHECK(parse_concept_type(to_string(t)) == t);
    }
    for (auto p : {Predicate::kHasProperty, Predicate::kPrefers, Predicate::kRelatedTo,
                   Predicate::kContradicts, Predicate::kCauses, Predicate::kPartOf}) {
        CHECK(parse_predicate(to_string(p)) == p);
    }
    CHECK(concept_type_from_string("spaceship") == ConceptType::kAbstract);
    CHECK(predicate_from_string("loves") == Predicate::kRelatedTo);
    CHECK_FALSE(parse_predicate("loves").has_value());
}

TEST_CASE("timestamps format and parse at microsecond resolution") {
    const Timestamp t = SimulatedClock::default_epoch();
    CHECK(format_timestamp(t) == "2025-01-01T00:00:00.000000Z");
    std::mt19937_64 rng(7);
    for (int i = 0; i < 1000; ++i) {
        const Timestamp x{static_cast<std::int64_t>(rng() % 4000000000000000ULL)};
        const auto back = parse_timestamp(format_timestamp(x));
        REQUIRE(back.has_value());
        CHECK(*back == x);
    }
    CHECK_FALSE(parse_timestamp("yesterday").has_value());
    CHECK(hours_between(t, Timestamp{t.micros + 5400000000LL}) == doctest::Approx(1.5));
}

TEST_CASE("cosine handles null and mismatched embeddings") {
    const Embedding a{{1.0F, 0.0F}};
    const Embedding b{{0.0F, 1.0F}};
    CHECK(cosine(a, a) == doctest::Approx(1.0));
    CHECK(cosine(a, b) == doctest::Approx(0.0));
    CHECK(cosine(a, Embedding::null(2)) == 0.0);
    CHECK(cosine(a, Embedding{{1.0F, 0.0F, 0.0F}}) == 0.0);
    CHECK(Embedding::null(4).is_null());
}

TEST_CASE("value vectors check their ranges") {
    CHECK(ValueVector{0.5, -0.5, 0.2, 0.4}.in_range());
    CHECK_FALSE(ValueVector{1.1, 0, 0, 0}.in_range());
    CHECK_FALSE(ValueVector{0, -1.5, 0, 0}.in_range());
    CHECK_FALSE(ValueVector{0, 0, 0, 1.0}.in_range());
}

TEST_CASE("config validation") {
    EngineConfig c;
    CHECK_NOTHROW(c.validate());

    SUBCASE("tagger weights must sum to one") {
        c.tagger_weights.task = 0.36;
        CHECK_THROWS_AS(c.validate(), Error);
    }
    SUBCASE("tolerance is 1e-9") {
        c.tagger_weights.task = 0.35 + 1e-12;
        CHECK_NOTHROW(c.validate());
        c.tagger_weights.task = 0.35 + 1e-8;
        CHECK_THROWS_AS(c.validate(), Error);
    }
    SUBCASE("retention weights must sum to one") {
        c.beta2 = 0.4;
        CHECK_THROWS_AS(c.validate(), Error);
        c.beta1 = 0.6;
        CHECK_NOTHROW(c.validate());
    }
    SUBCASE("fusion weights must sum to one") {
        c.fusion_weights.graph = 0.3;
        CHECK_THROWS_AS(c.validate(), Error);
    }
    SUBCASE("downscale factor range") {
        c.alpha = 0.0;
        CHECK_THROWS_AS(c.validate(), Error);
        c.alpha = 1.0;
        CHECK_NOTHROW(c.validate());
    }
    SUBCASE("errors carry the config kind") {
        c.eta = -1;
        try {
            c.validate();
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::kConfig);
        }
    }
}

TEST_CASE("simulated clock only moves when advanced") {
    SimulatedClock clock;
    const Timestamp a = clock.now();
    CHECK(clock.now() == a);
    clock.advance_hours(2.0);
    CHECK(hours_between(a, clock.now()) == doctest::Approx(2.0));
    CHECK_THROWS_AS(clock.advance_hours(-1.0), Error);
}

TEST_CASE("system clock is monotonic and cannot be advanced") {
    SystemClock clock;
    Timestamp prev = clock.now();
    for (int i = 0; i < 1000; ++i) {
        const Timestamp t = clock.now();
        CHECK(t >= prev);
        prev = t;
    }
    CHECK_THROWS_AS(clock.advance_hours(1.0), Error);
    CHECK_FALSE(clock.is_simulated());
}
