#pragma once

#include <string>

#include <json.hpp>

#include "coiest/coi.hpp"
#include "coiest/event_detect.hpp"
#include "coiest/ingest.hpp"
#include "coiest/magnitude.hpp"
#include "coiest/sim.hpp"

namespace coiest {

using Json = nlohmann::ordered_json;

Json to_json(const QualityReport& report);
Json to_json(const EventWindow& window);
Json to_json(const DetectorConfig& cfg);
Json to_json(const WeightSolution& solution);
Json to_json(const CoiEstimate& estimate);
Json to_json(const EventMagnitude& magnitude);

Json scenario_to_json(const sim::Scenario& scenario);
/// Throws Error(kData, "schema") on missing or mistyped fields, then runs
/// Scenario::validate().
sim::Scenario scenario_from_json(const Json& j);
sim::Scenario scenario_from_json_text(const std::string& text);

}  // namespace coiest
