#pragma once

// Aperture geometry: element lattice, shared-bias grouping, feed placement and the
// assembled reflectarray antenna.
//
// Frame: array centered at the origin in the z = 0 plane, +z is boresight.
// Elements are indexed row-major: index = row * n_x + col, x from col, y from row.

#include <cmath>
#include <string_view>
#include <vector>

#include "rismimo/common.hpp"
#include "rismimo/element.hpp"

namespace rismimo {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm() const { return std::sqrt(dot(*this)); }
};

enum class Polarization { H, V };
enum class Axis { X, Y };

std::string_view to_string(Polarization p);
std::string_view to_string(Axis a);
Polarization polarization_from_string(std::string_view s);
Axis axis_from_string(std::string_view s);

/// Azimuth/elevation pair, degrees. The unit vector is
/// (sin az cos el, sin el, cos az cos el), so az steers in the x-z plane.
struct Direction {
  double az_deg = 0.0;
  double el_deg = 0.0;

  Vec3 unit() const;
  void validate() const;
};

/// Great-circle angle between two directions, degrees.
double angular_distance_deg(const Direction& a, const Direction& b);

struct GroupMap {
  std::vector<int> group_of;  // element index -> group index
  int group_count = 0;
  int group_size = 1;
  Axis axis = Axis::Y;

  std::vector<std::vector<int>> members() const;
};

/// Contiguous runs of `group_size` elements along `axis` share a group. Group indices are
/// assigned row-major over the reduced group lattice.
GroupMap group_map(int n_x, int n_y, int group_size, Axis axis);

struct RisArray {
  int n_x = 32;
  int n_y = 32;
  double period_mm = 5.0;
  Polarization polarization = Polarization::H;
  GroupMap grouping = group_map(32, 32, 2, Axis::Y);

  static RisArray make(int n_x, int n_y, double period_mm, int group_size = 2, Axis axis = Axis::Y,
                       Polarization pol = Polarization::H);

  int element_count() const { return n_x * n_y; }
  double x_of_col(int col) const { return (col - (n_x - 1) / 2.0) * period_mm; }
  double y_of_row(int row) const { return (row - (n_y - 1) / 2.0) * period_mm; }
  double aperture_area_m2() const { return n_x * n_y * period_mm * period_mm * 1e-6; }
  void validate() const;
};

std::vector<Vec3> element_positions(const RisArray& array);

struct FeedModel {
  Vec3 position_mm{-82.0, 0.0, 150.0};
  double q = 6.5;  // cos^q power pattern exponent
  double gain_dbi = 10.0;
  Polarization polarization = Polarization::H;

  /// Unit vector of the feed axis; the feed is aimed at the array center.
  Vec3 boresight() const;
  void validate() const;
};

/// Angle between the feed->element ray and the element normal, degrees in [0, 90).
double incidence_angle_deg(const FeedModel& feed, const Vec3& element_mm);

/// Angle-dependent reflection: phase(theta) = phase(0) + beta * theta^2 (degrees, theta in
/// degrees) and amplitude taper cos^a(theta).
struct IncidenceModel {
  bool enabled = true;
  double beta_deg_per_deg2 = 0.004;
  double amplitude_exponent = 0.5;

  cplx factor(double theta_inc_deg) const;
  double phase_offset_deg(double theta_inc_deg) const;
};

/// Reflection/loss efficiency applied on top of spillover and the element reflection power.
/// Calibrated so the one-bit broadside beam of the prototype lands near the measured gain.
inline constexpr double kDefaultLossEfficiency = 0.25;
inline constexpr double kDefaultElementPatternExponent = 1.0;

struct AntennaAssembly {
  RisArray array;
  FeedModel feed;
  double freq_ghz = 26.0;
  double cross_pol_db = -15.19;
  ElementCircuit element = default_element_circuit();
  IncidenceModel incidence;
  double element_q = kDefaultElementPatternExponent;
  double loss_efficiency = kDefaultLossEfficiency;
  double blockage_db = 0.0;  // optional scalar feed-blockage attenuation (<= 0)

  double wavelength_mm() const { return rismimo::wavelength_mm(freq_ghz); }
  double wavenumber() const { return rismimo::wavenumber_per_mm(freq_ghz); }
  void validate() const;
};

/// Element circuit from the default start after the structure optimizer (cached).
const ElementCircuit& design_element_circuit();

/// The 32x32, 5 mm, paired-element prototype with the optimized element and feed at
/// (-82, 0, 150) mm.
AntennaAssembly prototype_assembly();

}  // namespace rismimo
