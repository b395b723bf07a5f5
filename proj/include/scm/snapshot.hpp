#pragma once

#include "scm/clock.hpp"
#include "scm/encoding.hpp"
#include "scm/engine.hpp"

#include <memory>
#include <string>
#include <string_view>

namespace scm {

inline constexpr int kSnapshotVersion = 1;

/// $SCM_SNAPSHOT_PATH, else ./scm_memory.json.
std::string default_snapshot_path();

/// Canonical bytes: sorted keys, no insignificant whitespace, shortest
/// round-trip numbers. Identical states give identical bytes.
std::string encode_snapshot(const EngineState& state);

/// Errors: kCorruptSnapshot (unparseable or malformed document),
/// kUnsupportedVersion, kIntegrity (values out of range).
EngineState decode_snapshot(std::string_view bytes);

/// Writes to a sibling temp file and renames it over `path`. On failure
/// throws kIo and leaves `path` untouched. Returns bytes written.
std::size_t write_snapshot(const EngineState& state, const std::string& path);
std::size_t save_snapshot(const Engine& engine, const std::string& path);

/// kNotFound for a missing file, otherwise as decode_snapshot.
EngineState read_snapshot(const std::string& path);

/// Reads and rebuilds an engine; referential problems raise kIntegrity.
std::unique_ptr<Engine> load_engine(const std::string& path, std::shared_ptr<Clock> clock,
                                    EncoderSettings encoder = {});

}  // namespace scm
