#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmv2v/rng.hpp"

namespace mmv2v {

using StationId = int;

struct Vec2 {
  double x = 0.0;  // along the road, m
  double y = 0.0;  // across the road, m

  friend bool operator==(const Vec2&, const Vec2&) = default;
};

double distance(Vec2 a, Vec2 b);

/// Axis-aligned vehicle footprint. Vehicles travel along +x.
struct VehicleRect {
  StationId id = 0;
  int lane = 0;
  Vec2 center;
  double length = 5.0;
  double width = 2.0;

  double min_x() const { return center.x - length / 2; }
  double max_x() const { return center.x + length / 2; }
  double min_y() const { return center.y - width / 2; }
  double max_y() const { return center.y + width / 2; }
  bool contains(Vec2 p) const { return p.x >= min_x() && p.x <= max_x() && p.y >= min_y() && p.y <= max_y(); }
};

struct ScenarioConfig {
  double road_length = 80.0;
  double road_width = 16.0;
  int lanes = 4;
  int n_vehicles = 10;
  double pcp_probability = 0.10;
  double vehicle_length = 5.0;
  double vehicle_width = 2.0;
  int placement_retries = 1000;  // per vehicle

  double lane_width() const { return road_width / lanes; }
  double lane_center_y(int lane) const { return (lane + 0.5) * lane_width(); }
  /// Throws std::invalid_argument.
  void validate() const;
};

class DeploymentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Scenario {
  std::vector<VehicleRect> vehicles;  // vehicles[i].id == i
  std::vector<bool> is_pcp;

  std::size_t size() const { return vehicles.size(); }
  std::vector<StationId> pcp_set() const;
  Vec2 position(StationId id) const { return vehicles.at(id).center; }
};

/// Random highway snapshot: uniform lane, uniform x with same-lane
/// rejection, independent PCP draws resampled until at least one PCP exists.
Scenario deploy(const ScenarioConfig& config, Rng& rng);

/// Slab clipping of the open segment (a, b) against the closed rectangle.
/// Touching the boundary counts as an intersection.
bool segment_intersects_rect(Vec2 a, Vec2 b, const VehicleRect& r);

/// Vehicles (other than tx_id and rx_id) crossed by the segment tx -> rx.
int count_blockers(Vec2 tx, Vec2 rx, const Scenario& scenario, StationId tx_id, StationId rx_id);

/// Angle of (to - from) counterclockwise from +x, in [0, 2*pi).
double bearing(Vec2 from, Vec2 to);

/// Wraps an angle into (-pi, pi].
double wrap_pi(double angle);

/// One line per vehicle: "id lane x y is_pcp".
void write_scenario(std::ostream& os, const Scenario& scenario);
Scenario read_scenario(std::istream& is, const ScenarioConfig& config = {});

}  // namespace mmv2v
