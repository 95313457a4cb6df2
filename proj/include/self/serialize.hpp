#pragma once

#include <json.hpp>

#include "self/losses.hpp"
#include "self/selfloop.hpp"

namespace self {

// JSON round-trips for report/checkpoint records. Model weights and ensemble
// state are kept in their binary formats, never inline in JSON.
void to_json(nlohmann::json& j, const LossBreakdown& b);
void from_json(const nlohmann::json& j, LossBreakdown& b);

void to_json(nlohmann::json& j, const LossCounters& c);
void from_json(const nlohmann::json& j, LossCounters& c);

void to_json(nlohmann::json& j, const IterationResult& r);
void from_json(const nlohmann::json& j, IterationResult& r);

}  // namespace self
