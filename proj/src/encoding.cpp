#include "scm/encoding.hpp"

#include "scm/error.hpp"

#include <httplib.h>
#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <regex>
#include <unordered_map>
#include <unordered_set>

namespace scm {

using nlohmann::json;

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && (std::isspace(static_cast<unsigned char>(s[e - 1])) ||
                     s[e - 1] == ',' || s[e - 1] == '"' || s[e - 1] == '\'')) {
        --e;
    }
    return std::string(s.substr(b, e - b));
}

std::string strip_article(const std::string& s) {
    static const std::regex kArticle(R"(^(a|an|the)\s+)", std::regex::icase);
    return trim(std::regex_replace(s, kArticle, ""));
}

std::vector<std::string> split_clauses(std::string_view text) {
    static const std::regex kConjunction(R"(\s+and\s+)", std::regex::icase);
    std::vector<std::string> out;
    std::string sentence;
    auto flush = [&] {
        const std::string s = std::regex_replace(sentence, kConjunction, "\n");
        std::size_t start = 0;
        while (start <= s.size()) {
            const std::size_t nl = s.find('\n', start);
            const std::string piece = trim(s.substr(start, nl == std::string::npos ? nl : nl - start));
            if (!piece.empty()) out.push_back(piece);
            if (nl == std::string::npos) break;
            start = nl + 1;
        }
        sentence.clear();
    };
    for (char c : text) {
        if (c == '.' || c == '!' || c == '?' || c == ';') {
            flush();
        } else {
            sentence.push_back(c);
        }
    }
    flush();
    return out;
}

std::uint64_t token_hash(std::string_view token) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : token) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    // final avalanche so low bits (the index) and the top bit (the sign)
    // are not correlated
    h ^= h >> 33;
    h *= 0xff51afd7ed558ccdULL;
    h ^= h >> 33;
    h *= 0xc4ceb9fe1a85ec53ULL;
    h ^= h >> 33;
    return h;
}

const std::unordered_map<std::string, double>& lexicon() {
    static const std::unordered_map<std::string, double> kLexicon{
        {"love", 0.8},     {"adore", 0.8},   {"enjoy", 0.6}, {"like", 0.6},
        {"great", 0.7},    {"happy", 0.7},   {"hate", -0.8}, {"awful", -0.8},
        {"dislike", -0.6}, {"sad", -0.7},    {"terrible", -0.7},
    };
    return kLexicon;
}

class Builder {
public:
    explicit Builder(const ConceptExists& exists) : exists_(exists) {}

    void concept_of(std::string label, ConceptType type, std::string description,
                    std::optional<double> hint = std::nullopt) {
        if (normalize_label(label).empty()) return;
        const ConceptId id = make_concept_id(label, type);
        if (!seen_.insert(id.value).second) return;
        result_.concepts.push_back({std::move(label), type, std::move(description), hint});
    }

    void relation(const std::string& src, ConceptType st, Predicate p, const std::string& dst,
                  ConceptType dt) {
        result_.relations.push_back({src, st, p, dst, dt});
    }

    void user() { concept_of(std::string(kUserLabel), ConceptType::kPerson, "the user"); }

    bool known(const std::string& label, ConceptType type) const {
        if (normalize_label(label).empty()) return false;
        const ConceptId id = make_concept_id(label, type);
        if (seen_.count(id.value) != 0) return true;
        return exists_ && exists_(id);
    }

    ExtractionResult take() { return std::move(result_); }

private:
    const ConceptExists& exists_;
    std::unordered_set<std::string> seen_;
    ExtractionResult result_;
};

void apply_patterns(const std::string& clause, Builder& b) {
    static const std::regex kName(R"(^my name is\s+(.+)$)", std::regex::icase);
    static const std::regex kLive(R"(^i live in\s+(.+)$)", std::regex::icase);
    static const std::regex kWork(R"(^i work (as|at)\s+(.+)$)", std::regex::icase);
    static const std::regex kLike(R"(^i (like|love|enjoy)\s+(.+)$)", std::regex::icase);
    static const std::regex kHate(R"(^i (hate|dislike)\s+(.+)$)", std::regex::icase);
    static const std::regex kIs(R"(^(.+?)\s+is\s+(.+)$)", std::regex::icase);

    const std::string user(kUserLabel);
    std::smatch m;
    if (std::regex_match(clause, m, kName)) {
        b.concept_of(trim(m[1].str()), ConceptType::kPerson, "user's name");
    } else if (std::regex_match(clause, m, kLive)) {
        const std::string place = strip_article(m[1].str());
        b.concept_of(place, ConceptType::kLocation, clause);
        b.user();
        b.relation(user, ConceptType::kPerson, Predicate::kRelatedTo, place, ConceptType::kLocation);
    } else if (std::regex_match(clause, m, kWork)) {
        b.concept_of(strip_article(m[2].str()), ConceptType::kFact, clause);
    } else if (std::regex_match(clause, m, kLike)) {
        const std::string object = strip_article(m[2].str());
        const double hint = lexicon().at(normalize_label(m[1].str()));
        b.concept_of(object, ConceptType::kPreference, clause, hint);
        b.user();
        b.relation(user, ConceptType::kPerson, Predicate::kPrefers, object,
                   ConceptType::kPreference);
        const std::string opposite = "not " + object;
        if (b.known(opposite, ConceptType::kPreference)) {
            b.relation(object, ConceptType::kPreference, Predicate::kContradicts, opposite,
                       ConceptType::kPreference);
        }
    } else if (std::regex_match(clause, m, kHate)) {
        const std::string object = strip_article(m[2].str());
        const std::string stance = "not " + object;
        const double hint = lexicon().at(normalize_label(m[1].str()));
        b.concept_of(stance, ConceptType::kPreference, clause, hint);
        b.user();
        b.relation(user, ConceptType::kPerson, Predicate::kPrefers, stance,
                   ConceptType::kPreference);
        if (b.known(object, ConceptType::kPreference)) {
            b.relation(stance, ConceptType::kPreference, Predicate::kContradicts, object,
                       ConceptType::kPreference);
        }
    } else if (std::regex_match(clause, m, kIs)) {
        const std::string subject = strip_article(m[1].str());
        const std::string property = strip_article(m[2].str());
        if (normalize_label(subject).empty() || normalize_label(property).empty()) return;
        b.concept_of(subject, ConceptType::kFact, clause);
        b.concept_of(property, ConceptType::kAbstract, clause);
        b.relation(subject, ConceptType::kFact, Predicate::kHasProperty, property,
                   ConceptType::kAbstract);
    }
}

struct Endpoint {
    std::string origin;  // scheme://host[:port]
    std::string path;
};

std::optional<Endpoint> parse_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) return std::nullopt;
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return Endpoint{url, "/"};
    return Endpoint{url.substr(0, path_start), url.substr(path_start)};
}

std::optional<json> post_json(const std::string& url, const json& body, double timeout_secs) {
    const auto ep = parse_url(url);
    if (!ep) return std::nullopt;
    httplib::Client client(ep->origin);
    const auto secs = static_cast<time_t>(timeout_secs);
    const auto usecs = static_cast<time_t>((timeout_secs - static_cast<double>(secs)) * 1e6);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);
    auto res = client.Post(ep->path, body.dump(), "application/json");
    if (!res || res->status != 200) return std::nullopt;
    auto parsed = json::parse(res->body, nullptr, false);
    if (parsed.is_discarded()) return std::nullopt;
    return parsed;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string cur;
    auto flush = [&] {
        if (cur.size() >= 2) tokens.push_back(cur);
        cur.clear();
    };
    for (unsigned char c : text) {
        if (std::isalnum(c)) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else {
            flush();
        }
    }
    flush();
    return tokens;
}

ExtractionResult extract_rule_based(std::string_view text, const ConceptExists& exists) {
    if (normalize_label(text).empty()) fail(ErrorKind::kInvalidArgument, "text is empty");
    Builder b(exists);
    for (const auto& clause : split_clauses(text)) apply_patterns(clause, b);
    return b.take();
}

Embedding hash_embed(std::string_view text, std::size_t dim) {
    std::vector<double> acc(dim, 0.0);
    for (const auto& token : tokenize(text)) {
        const std::uint64_t h = token_hash(token);
        acc[h % dim] += (h >> 63) != 0 ? -1.0 : 1.0;
    }
    double norm = 0.0;
    for (double v : acc) norm += v * v;
    Embedding e = Embedding::null(dim);
    if (norm == 0.0) return e;
    norm = std::sqrt(norm);
    for (std::size_t i = 0; i < dim; ++i) e.values[i] = static_cast<float>(acc[i] / norm);
    return e;
}

double lexicon_sentiment(std::string_view text) {
    double sum = 0.0;
    int hits = 0;
    for (const auto& token : tokenize(text)) {
        if (auto it = lexicon().find(token); it != lexicon().end()) {
            sum += it->second;
            ++hits;
        }
    }
    return hits == 0 ? 0.0 : sum / hits;
}

double sentiment(std::optional<double> hint, std::string_view text) {
    if (hint) return std::clamp(*hint, -1.0, 1.0);
    return lexicon_sentiment(text);
}

ExtractionResult coerce_extraction_json(std::string_view body, const ConceptExists& exists) {
    const json doc = json::parse(body, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
        fail(ErrorKind::kInvalidArgument, "extraction response is not a JSON object");
    }
    Builder b(exists);
    std::unordered_map<std::string, ConceptType> types;  // normalized label -> type
    if (doc.contains("concepts") && doc["concepts"].is_array()) {
        for (const auto& c : doc["concepts"]) {
            if (!c.is_object() || !c.contains("label") || !c["label"].is_string()) continue;
            const std::string label = trim(c["label"].get<std::string>());
            if (normalize_label(label).empty()) continue;
            std::string type_name;
            for (const char* key : {"ctype", "type"}) {
                if (c.contains(key) && c[key].is_string()) type_name = c[key].get<std::string>();
            }
            const ConceptType type = concept_type_from_string(type_name);
            std::string description;
            if (c.contains("description") && c["description"].is_string()) {
                description = c["description"].get<std::string>();
            }
            std::optional<double> hint;
            if (c.contains("sentiment_hint") && c["sentiment_hint"].is_number()) {
                hint = std::clamp(c["sentiment_hint"].get<double>(), -1.0, 1.0);
            }
            types.emplace(normalize_label(label), type);
            b.concept_of(label, type, description, hint);
        }
    }
    auto resolve = [&](const std::string& label) -> std::optional<ConceptType> {
        if (auto it = types.find(normalize_label(label)); it != types.end()) return it->second;
        if (normalize_label(label) == kUserLabel) return ConceptType::kPerson;
        for (auto t : {ConceptType::kPerson, ConceptType::kPreference, ConceptType::kFact,
                       ConceptType::kEvent, ConceptType::kObject, ConceptType::kLocation,
                       ConceptType::kAbstract}) {
            if (b.known(label, t)) return t;
        }
        return std::nullopt;
    };
    if (doc.contains("relations") && doc["relations"].is_array()) {
        for (const auto& r : doc["relations"]) {
            if (!r.is_object()) continue;
            auto str = [&](const char* key) {
                return r.contains(key) && r[key].is_string() ? r[key].get<std::string>()
                                                             : std::string();
            };
            const std::string src = trim(str("src_label")), dst = trim(str("dst_label"));
            if (normalize_label(src).empty() || normalize_label(dst).empty()) continue;
            const auto st = resolve(src), dt = resolve(dst);
            if (!st || !dt) continue;
            if (normalize_label(src) == kUserLabel) b.user();
            b.relation(src, *st, predicate_from_string(str("predicate")), dst, *dt);
        }
    }
    return b.take();
}

EncoderSettings EncoderSettings::from_env() {
    EncoderSettings s;
    auto env = [](const char* key) -> std::optional<std::string> {
        const char* v = std::getenv(key);
        if (v == nullptr || *v == '\0') return std::nullopt;
        return std::string(v);
    };
    if (auto v = env("EXTRACTOR_KIND")) {
        const std::string kind = normalize_label(*v);
        if (kind == "remote_llm") {
            s.kind = ExtractorKind::kRemoteLlm;
        } else if (kind != "rule_based") {
            fail(ErrorKind::kConfig, "EXTRACTOR_KIND must be rule_based or remote_llm");
        }
    }
    if (auto v = env("EXTRACTOR_URL")) s.extractor_url = *v;
    if (auto v = env("EMBEDDER_URL")) s.embedder_url = *v;
    try {
        if (auto v = env("EMBEDDING_DIM")) s.embedding_dim = std::stoul(*v);
        if (auto v = env("REQUEST_TIMEOUT_SECS")) s.request_timeout_secs = std::stod(*v);
    } catch (const std::exception&) {
        fail(ErrorKind::kConfig, "EMBEDDING_DIM / REQUEST_TIMEOUT_SECS must be numeric");
    }
    if (s.embedding_dim == 0) fail(ErrorKind::kConfig, "EMBEDDING_DIM must be positive");
    return s;
}

MeaningEncoder::MeaningEncoder(EncoderSettings settings) : settings_(std::move(settings)) {
    if (settings_.embedding_dim == 0) fail(ErrorKind::kConfig, "embedding_dim must be positive");
}

ExtractionResult MeaningEncoder::extract(std::string_view text, const ConceptExists& exists) const {
    if (normalize_label(text).empty()) fail(ErrorKind::kInvalidArgument, "text is empty");
    if (settings_.kind == ExtractorKind::kRemoteLlm && !settings_.extractor_url.empty()) {
        const auto body = post_json(settings_.extractor_url, json{{"text", std::string(text)}},
                                    settings_.request_timeout_secs);
        if (body) {
            try {
                return coerce_extraction_json(body->dump(), exists);
            } catch (const Error&) {
                // fall through to rule-based
            }
        }
        ExtractionResult fallback = extract_rule_based(text, exists);
        fallback.degraded = true;
        return fallback;
    }
    return extract_rule_based(text, exists);
}

Embedding MeaningEncoder::embed(std::string_view text, bool* degraded) const {
    if (degraded != nullptr) *degraded = false;
    if (!settings_.embedder_url.empty()) {
        const auto body = post_json(settings_.embedder_url, json{{"text", std::string(text)}},
                                    settings_.request_timeout_secs);
        if (body && body->is_object() && body->contains("values") && (*body)["values"].is_array()) {
            const auto& values = (*body)["values"];
            if (values.size() != settings_.embedding_dim) {
                fail(ErrorKind::kConfig, "remote embedder returned dimension " +
                                             std::to_string(values.size()) + ", expected " +
                                             std::to_string(settings_.embedding_dim));
            }
            std::vector<double> v;
            v.reserve(values.size());
            double norm = 0.0;
            for (const auto& x : values) {
                v.push_back(x.is_number() ? x.get<double>() : 0.0);
                norm += v.back() * v.back();
            }
            Embedding e = Embedding::null(settings_.embedding_dim);
            if (norm > 0.0) {
                norm = std::sqrt(norm);
                for (std::size_t i = 0; i < v.size(); ++i) e.values[i] = static_cast<float>(v[i] / norm);
            }
            return e;
        }
        if (degraded != nullptr) *degraded = true;
    }
    return hash_embed(text, settings_.embedding_dim);
}

}  // namespace scm
