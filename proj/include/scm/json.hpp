#pragma once

#include "scm/config.hpp"
#include "scm/engine.hpp"
#include "scm/sleep_cycle.hpp"
#include "scm/types.hpp"

#include <json.hpp>

namespace scm {

using json = nlohmann::json;

// Throwing conversions for the core records. Missing or mistyped fields
// raise nlohmann::json::exception.

void to_json(json& j, const Timestamp& t);
void from_json(const json& j, Timestamp& t);
void to_json(json& j, const ConceptId& id);
void from_json(const json& j, ConceptId& id);
void to_json(json& j, const Embedding& e);
void from_json(const json& j, Embedding& e);
void to_json(json& j, const ValueVector& v);
void from_json(const json& j, ValueVector& v);
void to_json(json& j, const Concept& c);
void from_json(const json& j, Concept& c);
void to_json(json& j, const Relation& r);
void from_json(const json& j, Relation& r);
void to_json(json& j, const Episode& e);
void from_json(const json& j, Episode& e);
void to_json(json& j, const SessionGoal& g);
void from_json(const json& j, SessionGoal& g);
void to_json(json& j, const SelfCounters& c);
void from_json(const json& j, SelfCounters& c);

/// Every field is written; on read, absent fields keep their defaults.
void to_json(json& j, const EngineConfig& c);
void from_json(const json& j, EngineConfig& c);

void to_json(json& j, const SleepTrigger& t);
void to_json(json& j, const SleepReport& r);
void to_json(json& j, const IngestReport& r);
void to_json(json& j, const QueryHit& h);
void to_json(json& j, const EngineStats& s);

}  // namespace scm
