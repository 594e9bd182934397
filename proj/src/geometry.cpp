#include "mmv2v/geometry.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

namespace mmv2v {

double distance(Vec2 a, Vec2 b) { return std::hypot(b.x - a.x, b.y - a.y); }

void ScenarioConfig::validate() const {
  if (!(road_length > 0) || !(road_width > 0)) throw std::invalid_argument("road dimensions must be positive");
  if (lanes < 1) throw std::invalid_argument("lanes must be >= 1");
  if (n_vehicles < 1) throw std::invalid_argument("n_vehicles must be >= 1");
  if (!(pcp_probability > 0.0 && pcp_probability <= 1.0)) {
    throw std::invalid_argument("pcp_probability must lie in (0, 1]");
  }
  if (vehicle_width > lane_width()) throw std::invalid_argument("vehicle wider than lane");
  if (vehicle_length > road_length) throw std::invalid_argument("vehicle longer than road");
  if (placement_retries < 1) throw std::invalid_argument("placement_retries must be >= 1");
}

std::vector<StationId> Scenario::pcp_set() const {
  std::vector<StationId> out;
  for (std::size_t i = 0; i < is_pcp.size(); ++i) {
    if (is_pcp[i]) out.push_back(static_cast<StationId>(i));
  }
  return out;
}

Scenario deploy(const ScenarioConfig& config, Rng& rng) {
  config.validate();
  Scenario s;
  s.vehicles.reserve(config.n_vehicles);
  const double half = config.vehicle_length / 2;
  for (int i = 0; i < config.n_vehicles; ++i) {
    const int lane = static_cast<int>(rng.below(static_cast<std::uint64_t>(config.lanes)));
    bool placed = false;
    for (int attempt = 0; attempt < config.placement_retries && !placed; ++attempt) {
      const double x = rng.uniform(half, config.road_length - half);
      placed = true;
      for (const auto& v : s.vehicles) {
        if (v.lane == lane && std::abs(v.center.x - x) < config.vehicle_length) {
          placed = false;
          break;
        }
      }
      if (placed) {
        s.vehicles.push_back(VehicleRect{i, lane, Vec2{x, config.lane_center_y(lane)}, config.vehicle_length,
                                         config.vehicle_width});
      }
    }
    if (!placed) {
      throw DeploymentError("cannot place vehicle " + std::to_string(i) + " in lane " + std::to_string(lane) +
                            " without overlap after " + std::to_string(config.placement_retries) + " attempts");
    }
  }
  s.is_pcp.assign(config.n_vehicles, false);
  for (;;) {
    bool any = false;
    for (int i = 0; i < config.n_vehicles; ++i) {
      s.is_pcp[i] = rng.bernoulli(config.pcp_probability);
      any = any || s.is_pcp[i];
    }
    if (any) break;
  }
  return s;
}

bool segment_intersects_rect(Vec2 a, Vec2 b, const VehicleRect& r) {
  double t0 = 0.0;
  double t1 = 1.0;
  const double lo[2] = {r.min_x(), r.min_y()};
  const double hi[2] = {r.max_x(), r.max_y()};
  const double p[2] = {a.x, a.y};
  const double d[2] = {b.x - a.x, b.y - a.y};
  for (int axis = 0; axis < 2; ++axis) {
    if (d[axis] == 0.0) {
      if (p[axis] < lo[axis] || p[axis] > hi[axis]) return false;
      continue;
    }
    double ta = (lo[axis] - p[axis]) / d[axis];
    double tb = (hi[axis] - p[axis]) / d[axis];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return false;
  }
  // open segment: a touch exactly at an endpoint does not count
  return !(t0 == t1 && (t1 == 0.0 || t0 == 1.0));
}

int count_blockers(Vec2 tx, Vec2 rx, const Scenario& scenario, StationId tx_id, StationId rx_id) {
  int n = 0;
  for (const auto& v : scenario.vehicles) {
    if (v.id == tx_id || v.id == rx_id) continue;
    if (segment_intersects_rect(tx, rx, v)) ++n;
  }
  return n;
}

double bearing(Vec2 from, Vec2 to) {
  double a = std::atan2(to.y - from.y, to.x - from.x);
  if (a < 0) a += 2 * std::numbers::pi;
  if (a >= 2 * std::numbers::pi) a -= 2 * std::numbers::pi;
  return a;
}

double wrap_pi(double angle) {
  constexpr double two_pi = 2 * std::numbers::pi;
  double a = std::fmod(angle, two_pi);
  if (a <= -std::numbers::pi) a += two_pi;
  if (a > std::numbers::pi) a -= two_pi;
  return a;
}

void write_scenario(std::ostream& os, const Scenario& scenario) {
  const auto flags = os.flags();
  const auto prec = os.precision();
  os << std::setprecision(17);
  for (const auto& v : scenario.vehicles) {
    os << v.id << ' ' << v.lane << ' ' << v.center.x << ' ' << v.center.y << ' ' << (scenario.is_pcp[v.id] ? 1 : 0)
       << '\n';
  }
  os.flags(flags);
  os.precision(prec);
}

Scenario read_scenario(std::istream& is, const ScenarioConfig& config) {
  Scenario s;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    VehicleRect v;
    int pcp = 0;
    if (!(ls >> v.id >> v.lane >> v.center.x >> v.center.y >> pcp) || (pcp != 0 && pcp != 1)) {
      throw std::invalid_argument("malformed scenario line " + std::to_string(line_no));
    }
    if (v.id != static_cast<StationId>(s.vehicles.size())) {
      throw std::invalid_argument("scenario ids must be 0..n-1 in order (line " + std::to_string(line_no) + ")");
    }
    v.length = config.vehicle_length;
    v.width = config.vehicle_width;
    s.vehicles.push_back(v);
    s.is_pcp.push_back(pcp == 1);
  }
  return s;
}

}  // namespace mmv2v
