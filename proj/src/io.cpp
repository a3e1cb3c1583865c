#include "cachegame/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "cachegame/errors.hpp"

namespace cachegame::io {

namespace {

ItemSet parse_item_set(const json& arr, int num_items) {
  ItemSet s;
  for (const auto& v : arr) {
    const int id = v.get<int>();
    if (id < 1 || id > num_items) {
      throw InvalidInstance("item id " + std::to_string(id) + " out of range");
    }
    s.push_back(id - 1);
  }
  std::sort(s.begin(), s.end());
  if (std::adjacent_find(s.begin(), s.end()) != s.end()) {
    throw InvalidInstance("duplicate item in request set");
  }
  return s;
}

json item_set_to_json(const ItemSet& s) {
  json arr = json::array();
  for (int n : s) arr.push_back(n + 1);
  return arr;
}

}  // namespace

Instance instance_from_json(const json& j) {
  try {
    const int n_items = j.at("num_items").get<int>();
    const int chunks = j.value("chunks_per_item", 1);
    auto rows = j.at("preferences").get<std::vector<std::vector<double>>>();
    PreferenceMatrix prefs(rows);
    BufferSpec buffers(j.at("buffers").get<std::vector<double>>(), n_items);

    const json& model = j.at("demand_model");
    DemandDistribution demands;
    if (model.is_string()) {
      if (model.get<std::string>() != "independent_single") {
        throw InvalidInstance("unknown demand_model " + model.dump());
      }
      demands = independent_single_demand(prefs);
    } else {
      std::vector<WeightedOutcome> support;
      for (const auto& entry : model.at("explicit")) {
        WeightedOutcome wo;
        for (const auto& set : entry.at("sets")) {
          wo.outcome.requested.push_back(parse_item_set(set, n_items));
        }
        wo.prob = entry.at("prob").get<double>();
        support.push_back(std::move(wo));
      }
      demands = DemandDistribution(std::move(support));
    }
    return Instance(CatalogSpec{n_items, chunks}, std::move(buffers),
                    std::move(prefs), std::move(demands));
  } catch (const json::exception& e) {
    throw InvalidInstance(std::string("malformed instance JSON: ") + e.what());
  } catch (const RowNotStochastic& e) {
    throw InvalidInstance(e.what());
  }
}

Instance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInstance("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw InvalidInstance(path + ": " + e.what());
  }
  return instance_from_json(j);
}

json instance_to_json(const Instance& inst, DemandModel model) {
  json j;
  j["num_items"] = inst.catalog().num_items;
  j["chunks_per_item"] = inst.catalog().chunks_per_item;
  j["buffers"] = inst.buffers().capacities();
  json rows = json::array();
  for (std::size_t k = 0; k < inst.num_users(); ++k) {
    auto r = inst.preferences().row(k);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  j["preferences"] = rows;
  if (model == DemandModel::IndependentSingle) {
    j["demand_model"] = "independent_single";
  } else {
    json support = json::array();
    for (const auto& wo : inst.demands()) {
      json sets = json::array();
      for (const auto& s : wo.outcome.requested) {
        sets.push_back(item_set_to_json(s));
      }
      support.push_back({{"sets", sets}, {"prob", wo.prob}});
    }
    j["demand_model"] = {{"explicit", support}};
  }
  return j;
}

std::string chunk_label(multiuser::ChunkId c) {
  return std::to_string(c.item + 1) + ":" + std::to_string(c.chunk + 1);
}

json user_set_to_json(multiuser::UserSet s) {
  json arr = json::array();
  for (std::size_t k = 0; k < multiuser::kMaxUsers; ++k) {
    if (multiuser::contains(s, k)) arr.push_back(k + 1);
  }
  return arr;
}

json schedule_to_json(const multiuser::DeliverySchedule& sched) {
  json messages = json::array();
  for (const auto& [audience, msgs] : sched.messages) {
    json chunks = json::array();
    for (const auto& coded : msgs) {
      json terms = json::array();
      for (const auto& t : coded.terms) terms.push_back(chunk_label(t));
      chunks.push_back(terms);
    }
    messages.push_back(
        {{"audience", user_set_to_json(audience)}, {"chunks", chunks}});
  }
  return {{"messages", messages}, {"per_user_cost", sched.per_user_cost}};
}

json placement_to_json(const twouser::TwoUserPlacement& pl) {
  return {{"x1", pl.u}, {"x2", pl.v}, {"x3", pl.w}};
}

json nash_record(const games::NashResult& nash) {
  return {{"converged", nash.converged},
          {"iterations", nash.iterations},
          {"payoffs", {{"r1n", nash.payoffs.r1}, {"r2n", nash.payoffs.r2}}},
          {"placement", placement_to_json(nash.placement)}};
}

json allocation_record(const games::AllocationOutcome& out) {
  json j = nash_record(out.nash);
  const auto& a = out.allocation;
  j["allocation"] = {{"r1c", a.r1c},
                     {"r2c", a.r2c},
                     {"basis", games::to_string(a.basis)},
                     {"total", a.total}};
  return j;
}

void ensure_finite(const json& j) {
  if (j.is_number_float() && !std::isfinite(j.get<double>())) {
    throw NumericalFailure("non-finite number in output");
  }
  if (j.is_structured()) {
    for (const auto& v : j) ensure_finite(v);
  }
}

}  // namespace cachegame::io
