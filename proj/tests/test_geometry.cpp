#include <doctest.h>

#include <random>
#include <set>

#include "rismimo/geometry.hpp"

using namespace rismimo;

TEST_CASE("element positions are centered") {
  const auto one = element_positions(RisArray::make(1, 1, 5.0, 1));
  REQUIRE(one.size() == 1);
  CHECK(one[0].x == 0.0);
  CHECK(one[0].y == 0.0);
  CHECK(one[0].z == 0.0);

  const auto two = element_positions(RisArray::make(2, 1, 5.0, 1));
  CHECK(two[0].x == -2.5);
  CHECK(two[1].x == 2.5);

  const auto arr = RisArray::make(32, 32, 5.0);
  const auto p = element_positions(arr);
  REQUIRE(p.size() == 1024);
  double xmin = 1e9, xmax = -1e9, ymin = 1e9, ymax = -1e9;
  for (const auto& v : p) {
    xmin = std::min(xmin, v.x);
    xmax = std::max(xmax, v.x);
    ymin = std::min(ymin, v.y);
    ymax = std::max(ymax, v.y);
  }
  CHECK(xmin == -77.5);
  CHECK(xmax == 77.5);
  CHECK(ymin == -77.5);
  CHECK(ymax == 77.5);
  CHECK(xmax - xmin + arr.period_mm == 160.0);
  CHECK(arr.aperture_area_m2() == doctest::Approx(0.0256));
  // row-major: index 1 is the next column
  CHECK(p[1].x - p[0].x == 5.0);
  CHECK(p[32].y - p[0].y == 5.0);
}

TEST_CASE("group maps") {
  const auto id = group_map(32, 32, 1, Axis::Y);
  CHECK(id.group_count == 1024);
  for (int i = 0; i < 1024; ++i) CHECK(id.group_of[i] == i);

  const auto pairs = group_map(32, 32, 2, Axis::Y);
  CHECK(pairs.group_count == 512);
  const auto members = pairs.members();
  for (const auto& m : members) {
    REQUIRE(m.size() == 2);
    const int r0 = m[0] / 32, c0 = m[0] % 32, r1 = m[1] / 32, c1 = m[1] % 32;
    CHECK(c0 == c1);
    CHECK(r0 % 2 == 0);
    CHECK(r1 == r0 + 1);
  }

  const auto cols = group_map(32, 32, 32, Axis::Y);
  CHECK(cols.group_count == 32);
  for (int i = 0; i < 1024; ++i) CHECK(cols.group_of[i] == i % 32);

  const auto xpairs = group_map(4, 2, 2, Axis::X);
  CHECK(xpairs.group_count == 4);
  CHECK(xpairs.group_of[0] == xpairs.group_of[1]);
  CHECK(xpairs.group_of[2] == xpairs.group_of[3]);
  CHECK(xpairs.group_of[0] != xpairs.group_of[4]);

  CHECK_THROWS_AS(group_map(32, 31, 2, Axis::Y), ConfigError);
  CHECK_THROWS_AS(group_map(32, 32, 0, Axis::Y), ConfigError);
}

TEST_CASE("incidence angles") {
  FeedModel f;
  f.position_mm = {0, 0, 150};
  CHECK(incidence_angle_deg(f, {0, 0, 0}) == doctest::Approx(0.0));
  CHECK(incidence_angle_deg(f, {150, 0, 0}) == doctest::Approx(45.0));
  CHECK(incidence_angle_deg(f, {0, -150, 0}) == doctest::Approx(45.0));

  // independent vector-angle computation via atan2(|a x b|, a.b)
  f.position_mm = {-82, 0, 150};
  const Vec3 e{77.5, 77.5, 0};
  const double rx = f.position_mm.x - e.x, ry = f.position_mm.y - e.y, rz = f.position_mm.z - e.z;
  const double cross = std::hypot(ry, rx);  // |r x z_hat|
  const double ref = std::atan2(cross, rz) * 180.0 / kPi;
  CHECK(incidence_angle_deg(f, e) == doctest::Approx(ref).epsilon(1e-9));
}

TEST_CASE("directions") {
  const Vec3 b = Direction{0, 0}.unit();
  CHECK(b.z == doctest::Approx(1.0));
  const Vec3 r = Direction{90, 0}.unit();
  CHECK(r.x == doctest::Approx(1.0));
  const Vec3 u = Direction{0, 90}.unit();
  CHECK(u.y == doctest::Approx(1.0));
  CHECK(angular_distance_deg({10, 0}, {-20, 0}) == doctest::Approx(30.0));
  CHECK(angular_distance_deg({0, 10}, {0, -5}) == doctest::Approx(15.0));
  CHECK_THROWS_AS(Direction({95, 0}).validate(), ConfigError);
}

TEST_CASE("incidence model") {
  IncidenceModel m;
  CHECK(m.phase_offset_deg(10) == doctest::Approx(0.4));
  CHECK(std::abs(m.factor(0)) == doctest::Approx(1.0));
  CHECK(std::abs(m.factor(60)) == doctest::Approx(std::sqrt(0.5)));
  m.enabled = false;
  CHECK(m.factor(60) == cplx(1, 0));
}

TEST_CASE("enum names and prototype") {
  CHECK(polarization_from_string(to_string(Polarization::V)) == Polarization::V);
  CHECK(axis_from_string(to_string(Axis::X)) == Axis::X);
  CHECK_THROWS_AS(axis_from_string("z"), ConfigError);
  const auto a = prototype_assembly();
  CHECK(a.array.element_count() == 1024);
  CHECK(a.array.grouping.group_count == 512);
  CHECK(a.feed.position_mm.x == -82.0);
  CHECK(a.feed.position_mm.z == 150.0);
  const Vec3 axis = a.feed.boresight();
  CHECK(axis.norm() == doctest::Approx(1.0));
  CHECK(axis.x > 0);
  CHECK(axis.z < 0);
}
