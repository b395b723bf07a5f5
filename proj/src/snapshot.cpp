#include "scm/snapshot.hpp"

#include "scm/error.hpp"
#include "scm/json.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace scm {

namespace fs = std::filesystem;

std::string default_snapshot_path() {
    if (const char* env = std::getenv("SCM_SNAPSHOT_PATH"); env != nullptr && *env != '\0') {
        return env;
    }
    return "./scm_memory.json";
}

std::string encode_snapshot(const EngineState& state) {
    json doc{{"version", kSnapshotVersion},
             {"saved_at", state.saved_at},
             {"config", state.config},
             {"counters", state.counters},
             {"concepts", state.concepts},
             {"relations", state.relations},
             {"episodes", state.episodes},
             {"last_sleep_time", state.last_sleep_time},
             {"goal", state.goal ? json(*state.goal) : json(nullptr)}};
    std::string out = doc.dump();
    out.push_back('\n');
    return out;
}

namespace {

void check_values(const EngineState& s) {
    auto unit = [](double x) { return x >= 0.0 && x <= 1.0; };
    for (const auto& c : s.concepts) {
        if (!c.value.in_range() || !unit(c.importance)) {
            fail(ErrorKind::kIntegrity, "concept " + c.id.value + " has out-of-range values");
        }
        if (c.id != make_concept_id(c.label, c.ctype)) {
            fail(ErrorKind::kIntegrity, "concept id does not match its label: " + c.id.value);
        }
    }
    for (const auto& r : s.relations) {
        if (!(r.strength >= 0.0)) fail(ErrorKind::kIntegrity, "negative relation strength");
    }
    for (const auto& e : s.episodes) {
        if (e.concept_ids.empty()) fail(ErrorKind::kIntegrity, "episode " + e.eid + " is empty");
        if (!e.value.in_range() || !unit(e.importance)) {
            fail(ErrorKind::kIntegrity, "episode " + e.eid + " has out-of-range values");
        }
    }
}

}  // namespace

EngineState decode_snapshot(std::string_view bytes) {
    json doc;
    try {
        doc = json::parse(bytes);
    } catch (const json::exception& e) {
        fail(ErrorKind::kCorruptSnapshot, e.what());
    }
    if (!doc.is_object()) fail(ErrorKind::kCorruptSnapshot, "snapshot is not a JSON object");
    const auto version = doc.find("version");
    if (version == doc.end() || !version->is_number_integer()) {
        fail(ErrorKind::kCorruptSnapshot, "snapshot has no integer version");
    }
    if (version->get<std::int64_t>() != kSnapshotVersion) {
        fail(ErrorKind::kUnsupportedVersion,
             "snapshot version " + std::to_string(version->get<std::int64_t>()) + ", expected " +
                 std::to_string(kSnapshotVersion));
    }

    EngineState s;
    try {
        doc.at("saved_at").get_to(s.saved_at);
        doc.at("config").get_to(s.config);
        doc.at("counters").get_to(s.counters);
        doc.at("concepts").get_to(s.concepts);
        doc.at("relations").get_to(s.relations);
        doc.at("episodes").get_to(s.episodes);
        doc.at("last_sleep_time").get_to(s.last_sleep_time);
        const auto& goal = doc.at("goal");
        if (!goal.is_null()) s.goal = goal.get<SessionGoal>();
    } catch (const json::exception& e) {
        fail(ErrorKind::kCorruptSnapshot, e.what());
    } catch (const Error& e) {
        fail(ErrorKind::kCorruptSnapshot, e.what());
    }
    try {
        s.config.validate();
    } catch (const Error& e) {
        fail(ErrorKind::kCorruptSnapshot, e.what());
    }
    check_values(s);
    return s;
}

std::size_t write_snapshot(const EngineState& state, const std::string& path) {
    const std::string bytes = encode_snapshot(state);
    const fs::path target(path);
    const fs::path temp = fs::path(path + ".tmp");
    {
        std::ofstream out(temp, std::ios::binary | std::ios::trunc);
        if (!out) fail(ErrorKind::kIo, "cannot open " + temp.string() + " for writing");
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out) {
            std::error_code ec;
            fs::remove(temp, ec);
            fail(ErrorKind::kIo, "write to " + temp.string() + " failed");
        }
    }
    std::error_code ec;
    fs::rename(temp, target, ec);
    if (ec) {
        std::error_code ignored;
        fs::remove(temp, ignored);
        fail(ErrorKind::kIo, "rename to " + path + " failed: " + ec.message());
    }
    return bytes.size();
}

std::size_t save_snapshot(const Engine& engine, const std::string& path) {
    return write_snapshot(engine.export_state(), path);
}

EngineState read_snapshot(const std::string& path) {
    std::error_code ec;
    if (!fs::is_regular_file(path, ec)) fail(ErrorKind::kNotFound, "no snapshot at " + path);
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::kIo, "cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return decode_snapshot(buf.str());
}

std::unique_ptr<Engine> load_engine(const std::string& path, std::shared_ptr<Clock> clock,
                                    EncoderSettings encoder) {
    return std::make_unique<Engine>(read_snapshot(path), std::move(clock), std::move(encoder));
}

}  // namespace scm
