#include "scm/clock.hpp"
#include "scm/config.hpp"
#include "scm/error.hpp"
#include "scm/types.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>

namespace scm {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::kInvalidArgument: return "invalid_argument";
        case ErrorKind::kNotFound: return "not_found";
        case ErrorKind::kPermission: return "permission_denied";
        case ErrorKind::kBusy: return "busy";
        case ErrorKind::kConfig: return "configuration_error";
        case ErrorKind::kUnsupportedVersion: return "unsupported_version";
        case ErrorKind::kCorruptSnapshot: return "corrupt_snapshot";
        case ErrorKind::kIntegrity: return "integrity_violation";
        case ErrorKind::kIo: return "io_error";
        case ErrorKind::kInternal: return "internal";
    }
    return "internal";
}

// ─── Timestamps ────────────────────────────────────────────────

std::string format_timestamp(Timestamp t) {
    std::int64_t secs = t.micros / 1000000;
    std::int64_t frac = t.micros % 1000000;
    if (frac < 0) {
        frac += 1000000;
        secs -= 1;
    }
    const std::time_t tt = static_cast<std::time_t>(secs);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d.%06lldZ", tm.tm_year + 1900,
                  tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec,
                  static_cast<long long>(frac));
    return buf;
}

std::optional<Timestamp> parse_timestamp(std::string_view text) {
    // YYYY-MM-DDTHH:MM:SS.ffffffZ
    if (text.size() != 27 || text[4] != '-' || text[7] != '-' || text[10] != 'T' ||
        text[13] != ':' || text[16] != ':' || text[19] != '.' || text[26] != 'Z') {
        return std::nullopt;
    }
    auto num = [&](std::size_t pos, std::size_t len) -> std::optional<long long> {
        long long v = 0;
        for (std::size_t i = pos; i < pos + len; ++i) {
            if (!std::isdigit(static_cast<unsigned char>(text[i]))) return std::nullopt;
            v = v * 10 + (text[i] - '0');
        }
        return v;
    };
    auto year = num(0, 4), mon = num(5, 2), day = num(8, 2), hour = num(11, 2), min = num(14, 2),
         sec = num(17, 2), frac = num(20, 6);
    if (!year || !mon || !day || !hour || !min || !sec || !frac) return std::nullopt;
    if (*mon < 1 || *mon > 12 || *day < 1 || *day > 31 || *hour > 23 || *min > 59 || *sec > 60) {
        return std::nullopt;
    }
    std::tm tm{};
    tm.tm_year = static_cast<int>(*year - 1900);
    tm.tm_mon = static_cast<int>(*mon - 1);
    tm.tm_mday = static_cast<int>(*day);
    tm.tm_hour = static_cast<int>(*hour);
    tm.tm_min = static_cast<int>(*min);
    tm.tm_sec = static_cast<int>(*sec);
    const std::time_t secs = timegm(&tm);
    return Timestamp{static_cast<std::int64_t>(secs) * 1000000 + *frac};
}

// ─── Taxonomies ────────────────────────────────────────────────

namespace {

constexpr std::array<std::pair<ConceptType, std::string_view>, 7> kTypeNames{{
    {ConceptType::kPerson, "person"},
    {ConceptType::kPreference, "preference"},
    {ConceptType::kFact, "fact"},
    {ConceptType::kEvent, "event"},
    {ConceptType::kObject, "object"},
    {ConceptType::kLocation, "location"},
    {ConceptType::kAbstract, "abstract"},
}};

constexpr std::array<std::pair<Predicate, std::string_view>, 6> kPredicateNames{{
    {Predicate::kHasProperty, "has_property"},
    {Predicate::kPrefers, "prefers"},
    {Predicate::kRelatedTo, "related_to"},
    {Predicate::kContradicts, "contradicts"},
    {Predicate::kCauses, "causes"},
    {Predicate::kPartOf, "part_of"},
}};

std::string lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace

std::string_view to_string(ConceptType t) {
    for (const auto& [type, name] : kTypeNames) {
        if (type == t) return name;
    }
    return "abstract";
}

std::string_view to_string(Predicate p) {
    for (const auto& [pred, name] : kPredicateNames) {
        if (pred == p) return name;
    }
    return "related_to";
}

std::optional<ConceptType> parse_concept_type(std::string_view name) {
    const std::string key = lower(name);
    for (const auto& [type, n] : kTypeNames) {
        if (n == key) return type;
    }
    return std::nullopt;
}

ConceptType concept_type_from_string(std::string_view name) {
    return parse_concept_type(name).value_or(ConceptType::kAbstract);
}

std::optional<Predicate> parse_predicate(std::string_view name) {
    const std::string key = lower(name);
    for (const auto& [pred, n] : kPredicateNames) {
        if (n == key) return pred;
    }
    return std::nullopt;
}

Predicate predicate_from_string(std::string_view name) {
    return parse_predicate(name).value_or(Predicate::kRelatedTo);
}

std::string normalize_label(std::string_view label) {
    std::string out;
    out.reserve(label.size());
    bool pending_space = false;
    for (unsigned char c : label) {
        if (std::isspace(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(static_cast<char>(std::tolower(c)));
    }
    return out;
}

ConceptId make_concept_id(std::string_view label, ConceptType type) {
    const std::string norm = normalize_label(label);
    if (norm.empty()) fail(ErrorKind::kInvalidArgument, "concept label is empty");
    std::string key(to_string(type));
    key.push_back('\x1f');
    key += norm;
    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(fnv1a64(key)));
    return ConceptId{std::string(to_string(type)) + ":" + hex};
}

// ─── Embedding / values ────────────────────────────────────────

bool Embedding::is_null() const {
    for (float v : values) {
        if (v != 0.0F) return false;
    }
    return true;
}

double Embedding::norm() const {
    double s = 0.0;
    for (float v : values) s += static_cast<double>(v) * v;
    return std::sqrt(s);
}

double dot(std::span<const float> a, std::span<const float> b) {
    const std::size_t n = std::min(a.size(), b.size());
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += static_cast<double>(a[i]) * b[i];
    return s;
}

double cosine(const Embedding& a, const Embedding& b) {
    if (a.dim() != b.dim() || a.dim() == 0) return 0.0;
    double ab = 0.0, aa = 0.0, bb = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) {
        const double x = a.values[i], y = b.values[i];
        ab += x * y;
        aa += x * x;
        bb += y * y;
    }
    if (aa == 0.0 || bb == 0.0) return 0.0;
    return ab / (std::sqrt(aa) * std::sqrt(bb));
}

bool ValueVector::in_range() const {
    return novelty >= 0.0 && novelty <= 1.0 && emotional >= -1.0 && emotional <= 1.0 &&
           task >= -1.0 && task <= 1.0 && repetition >= 0.0 && repetition < 1.0;
}

// ─── Config ────────────────────────────────────────────────────

void EngineConfig::validate() const {
    constexpr double kTol = 1e-9;
    if (wm_capacity == 0) fail(ErrorKind::kConfig, "wm_capacity must be positive");
    if (std::abs(tagger_weights.sum() - 1.0) > kTol) {
        fail(ErrorKind::kConfig, "tagger weights must sum to 1.0");
    }
    if (std::abs(fusion_weights.sum() - 1.0) > kTol) {
        fail(ErrorKind::kConfig, "fusion weights must sum to 1.0");
    }
    if (!(alpha > 0.0 && alpha <= 1.0)) fail(ErrorKind::kConfig, "alpha must lie in (0, 1]");
    if (!(eta > 0.0)) fail(ErrorKind::kConfig, "eta must be positive");
    if (std::abs(beta1 + beta2 - 1.0) > kTol) fail(ErrorKind::kConfig, "beta1 + beta2 must be 1.0");
    if (lambda_per_hour < 0.0) fail(ErrorKind::kConfig, "lambda must be non-negative");
    if (target_size == 0) fail(ErrorKind::kConfig, "target_size must be positive");
    if (embedding_dim == 0) fail(ErrorKind::kConfig, "embedding_dim must be positive");
    if (normalize_label(self_label).empty()) fail(ErrorKind::kConfig, "self_label is empty");
}

// ─── Clocks ────────────────────────────────────────────────────

void Clock::advance_hours(double) {
    fail(ErrorKind::kInvalidArgument, "clock is not simulated");
}

Timestamp SystemClock::now() {
    const auto since = std::chrono::system_clock::now().time_since_epoch();
    const Timestamp t{std::chrono::duration_cast<std::chrono::microseconds>(since).count()};
    std::lock_guard lock(mu_);
    if (t > last_) last_ = t;
    return last_;
}

Timestamp SimulatedClock::now() {
    std::lock_guard lock(mu_);
    return now_;
}

void SimulatedClock::advance_hours(double hours) {
    if (!(hours >= 0.0) || !std::isfinite(hours)) {
        fail(ErrorKind::kInvalidArgument, "clock can only move forward");
    }
    std::lock_guard lock(mu_);
    now_.micros += static_cast<std::int64_t>(std::llround(hours * 3.6e9));
}

std::shared_ptr<Clock> make_clock(bool simulated) {
    if (simulated) return std::make_shared<SimulatedClock>();
    return std::make_shared<SystemClock>();
}

}  // namespace scm
