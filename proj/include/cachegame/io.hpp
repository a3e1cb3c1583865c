#pragma once

#include <string>

#include "json.hpp"

#include "cachegame/games.hpp"
#include "cachegame/model.hpp"
#include "cachegame/multiuser.hpp"
#include "cachegame/twouser.hpp"

// JSON surfaces. Item and chunk ids are one-based on the wire.
namespace cachegame::io {

using nlohmann::json;

enum class DemandModel { IndependentSingle, Explicit };

// Instance schema:
//   {"num_items": N, "chunks_per_item": G, "buffers": [b_1, ...],
//    "preferences": [[p_11, ...], ...],
//    "demand_model": "independent_single"
//                  | {"explicit": [{"sets": [[1], [2, 3]], "prob": 0.5}, ...]}}
// Throws InvalidInstance on schema or consistency errors.
Instance instance_from_json(const json& j);
Instance load_instance(const std::string& path);
json instance_to_json(const Instance& inst, DemandModel model);

// "item:chunk", one-based.
std::string chunk_label(multiuser::ChunkId c);
json user_set_to_json(multiuser::UserSet s);

// {"messages": [{"audience": [...], "chunks": [["1:2", "2:1"], ...]}],
//  "per_user_cost": [...]}
json schedule_to_json(const multiuser::DeliverySchedule& sched);

json placement_to_json(const twouser::TwoUserPlacement& pl);

// {converged, iterations, payoffs: {r1n, r2n},
//  allocation: {r1c, r2c, basis, total}}
json allocation_record(const games::AllocationOutcome& out);
json nash_record(const games::NashResult& nash);

// Throws NumericalFailure if any number in the document is NaN or infinite.
void ensure_finite(const json& j);

}  // namespace cachegame::io
