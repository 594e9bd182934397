#pragma once

#include <initializer_list>
#include <utility>

#include "mmv2v/geometry.hpp"

namespace mmv2v::test {

struct Placement {
  int lane;
  double x;
  bool pcp;
};

inline Scenario make_scenario(std::initializer_list<Placement> cars, const ScenarioConfig& cfg = {}) {
  Scenario s;
  for (const auto& c : cars) {
    VehicleRect v;
    v.id = static_cast<StationId>(s.vehicles.size());
    v.lane = c.lane;
    v.center = {c.x, cfg.lane_center_y(c.lane)};
    v.length = cfg.vehicle_length;
    v.width = cfg.vehicle_width;
    s.vehicles.push_back(v);
    s.is_pcp.push_back(c.pcp);
  }
  return s;
}

}  // namespace mmv2v::test
