#include "rismimo/geometry.hpp"

#include <algorithm>
#include <fmt/format.h>

namespace rismimo {

std::string_view to_string(Polarization p) { return p == Polarization::H ? "H" : "V"; }
std::string_view to_string(Axis a) { return a == Axis::X ? "x" : "y"; }

Polarization polarization_from_string(std::string_view s) {
  if (s == "H" || s == "h") return Polarization::H;
  if (s == "V" || s == "v") return Polarization::V;
  throw ConfigError(fmt::format("unknown polarization '{}' (expected H or V)", s));
}

Axis axis_from_string(std::string_view s) {
  if (s == "x" || s == "X") return Axis::X;
  if (s == "y" || s == "Y") return Axis::Y;
  throw ConfigError(fmt::format("unknown axis '{}' (expected x or y)", s));
}

Vec3 Direction::unit() const {
  const double az = deg2rad(az_deg);
  const double el = deg2rad(el_deg);
  return {std::sin(az) * std::cos(el), std::sin(el), std::cos(az) * std::cos(el)};
}

void Direction::validate() const {
  require(az_deg >= -90.0 && az_deg <= 90.0 && el_deg >= -90.0 && el_deg <= 90.0,
          fmt::format("direction ({}, {}) outside [-90, 90]", az_deg, el_deg));
}

double angular_distance_deg(const Direction& a, const Direction& b) {
  // Chord form; acos loses precision for nearly parallel vectors.
  const double half = std::clamp((a.unit() - b.unit()).norm() / 2.0, 0.0, 1.0);
  return rad2deg(2.0 * std::asin(half));
}

std::vector<std::vector<int>> GroupMap::members() const {
  std::vector<std::vector<int>> m(group_count);
  for (std::size_t e = 0; e < group_of.size(); ++e) m[group_of[e]].push_back(static_cast<int>(e));
  return m;
}

GroupMap group_map(int n_x, int n_y, int group_size, Axis axis) {
  require(n_x >= 1 && n_y >= 1, "group_map: array dimensions must be >= 1");
  require(group_size >= 1, "group_map: group size must be >= 1");
  const int along = axis == Axis::X ? n_x : n_y;
  if (along % group_size != 0) {
    throw ConfigError(fmt::format("group_map: {} elements along axis {} not divisible by group size {}",
                                  along, to_string(axis), group_size));
  }
  GroupMap g;
  g.group_size = group_size;
  g.axis = axis;
  g.group_of.resize(static_cast<std::size_t>(n_x) * n_y);
  const int gx = axis == Axis::X ? n_x / group_size : n_x;
  for (int row = 0; row < n_y; ++row) {
    for (int col = 0; col < n_x; ++col) {
      const int grow = axis == Axis::Y ? row / group_size : row;
      const int gcol = axis == Axis::X ? col / group_size : col;
      g.group_of[static_cast<std::size_t>(row) * n_x + col] = grow * gx + gcol;
    }
  }
  g.group_count = n_x * n_y / group_size;
  return g;
}

RisArray RisArray::make(int n_x, int n_y, double period_mm, int group_size, Axis axis,
                        Polarization pol) {
  RisArray a;
  a.n_x = n_x;
  a.n_y = n_y;
  a.period_mm = period_mm;
  a.polarization = pol;
  a.grouping = group_map(n_x, n_y, group_size, axis);
  a.validate();
  return a;
}

void RisArray::validate() const {
  require(n_x >= 1 && n_y >= 1, "array: n_x and n_y must be >= 1");
  require(period_mm > 0, "array: period must be > 0");
  require(grouping.group_of.size() == static_cast<std::size_t>(n_x) * n_y,
          "array: grouping does not cover every element");
  std::vector<int> count(grouping.group_count, 0);
  for (int g : grouping.group_of) {
    require(g >= 0 && g < grouping.group_count, "array: group index out of range");
    ++count[g];
  }
  require(std::none_of(count.begin(), count.end(), [](int c) { return c == 0; }),
          "array: empty group in grouping map");
}

std::vector<Vec3> element_positions(const RisArray& a) {
  std::vector<Vec3> pos;
  pos.reserve(a.element_count());
  for (int row = 0; row < a.n_y; ++row) {
    for (int col = 0; col < a.n_x; ++col) pos.push_back({a.x_of_col(col), a.y_of_row(row), 0.0});
  }
  return pos;
}

Vec3 FeedModel::boresight() const {
  const double r = position_mm.norm();
  return position_mm * (-1.0 / r);
}

void FeedModel::validate() const {
  require(position_mm.z > 0, "feed: position z must be > 0");
  require(q >= 0, "feed: pattern exponent q must be >= 0");
  require(std::isfinite(gain_dbi), "feed: gain must be finite");
}

double incidence_angle_deg(const FeedModel& feed, const Vec3& element) {
  const Vec3 ray = element - feed.position_mm;
  const double c = std::clamp(-ray.z / ray.norm(), -1.0, 1.0);
  return rad2deg(std::acos(c));
}

cplx IncidenceModel::factor(double theta_inc_deg) const {
  if (!enabled) return {1.0, 0.0};
  const double amp = std::pow(std::cos(deg2rad(theta_inc_deg)), amplitude_exponent);
  return std::polar(amp, deg2rad(phase_offset_deg(theta_inc_deg)));
}

double IncidenceModel::phase_offset_deg(double theta_inc_deg) const {
  return enabled ? beta_deg_per_deg2 * theta_inc_deg * theta_inc_deg : 0.0;
}

void AntennaAssembly::validate() const {
  require(freq_ghz > 0, "assembly: frequency must be > 0");
  array.validate();
  feed.validate();
  element.validate();
  require(array.polarization == feed.polarization,
          "assembly: array and feed polarizations must match");
  require(element_q >= 0, "assembly: element pattern exponent must be >= 0");
  require(loss_efficiency > 0 && loss_efficiency <= 1, "assembly: loss efficiency must be in (0, 1]");
  require(cross_pol_db <= 0, "assembly: cross-pol level must be <= 0 dB");
  require(blockage_db <= 0, "assembly: blockage must be <= 0 dB");
}

const ElementCircuit& design_element_circuit() {
  static const ElementCircuit circuit = [] {
    const auto sweeps = default_sweeps();
    return optimize_structure(default_element_circuit(), DesignTargets{}, sweeps, 20).circuit;
  }();
  return circuit;
}

AntennaAssembly prototype_assembly() {
  AntennaAssembly a;
  a.element = design_element_circuit();
  return a;
}

}  // namespace rismimo
