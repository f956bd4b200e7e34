#include "doctest.h"
#include "support.hpp"

#include "marscoloc/pointing.hpp"

#include <cmath>
#include <limits>

using namespace marscoloc;
using testsupport::error_of;

TEST_CASE("normalize_azimuth")
{
    CHECK(normalize_azimuth(370.0) == 10.0);
    CHECK(normalize_azimuth(-5.0) == 355.0);
    CHECK(normalize_azimuth(0.0) == 0.0);
    CHECK(normalize_azimuth(360.0) == 0.0);
    CHECK(normalize_azimuth(-720.0) == 0.0);
    const double tiny = normalize_azimuth(-1e-20);
    CHECK(tiny >= 0.0);
    CHECK(tiny < 360.0);
    CHECK(error_of([] { normalize_azimuth(std::numeric_limits<double>::quiet_NaN()); }) ==
          ErrorCode::InvalidArgument);
    CHECK(error_of([] { normalize_azimuth(std::numeric_limits<double>::infinity()); }) ==
          ErrorCode::InvalidArgument);
}

TEST_CASE("fov_bounds: worked example")
{
    const auto s = fov_bounds({90.0, 0.0, 20.0, 15.0});
    CHECK(s.azimuth_left_deg == 80.0);
    CHECK(s.azimuth_right_deg == 100.0);
    CHECK(s.elevation_upper_deg == 7.5);
    CHECK(s.elevation_lower_deg == -7.5);
    CHECK_FALSE(s.full_circle);
    CHECK_FALSE(s.elevation_clamped);
    CHECK(s.width_deg() == 20.0);
}

TEST_CASE("fov_bounds: wraps through north")
{
    const auto s = fov_bounds({5.0, 0.0, 20.0, 10.0});
    CHECK(s.azimuth_left_deg == 355.0);
    CHECK(s.azimuth_right_deg == 15.0);
    CHECK(s.width_deg() == doctest::Approx(20.0).epsilon(1e-12));
}

TEST_CASE("fov_bounds: hFOV limits")
{
    CHECK(error_of([] { fov_bounds({0.0, 0.0, 0.0, 10.0}); }) == ErrorCode::InvalidPointing);
    CHECK(error_of([] { fov_bounds({0.0, 0.0, 361.0, 10.0}); }) == ErrorCode::InvalidPointing);
    CHECK(error_of([] { fov_bounds({0.0, 0.0, 10.0, 181.0}); }) == ErrorCode::InvalidPointing);
    CHECK(error_of([] { fov_bounds({0.0, 91.0, 10.0, 10.0}); }) == ErrorCode::InvalidPointing);
    const auto full = fov_bounds({123.0, 0.0, 360.0, 10.0});
    CHECK(full.full_circle);
    CHECK(full.width_deg() == 360.0);
}

TEST_CASE("fov_bounds: clamping")
{
    const auto s = fov_bounds({0.0, 85.0, 10.0, 20.0});
    CHECK(s.elevation_upper_deg == 90.0);
    CHECK(s.elevation_lower_deg == 75.0);
    CHECK(s.elevation_clamped);
    const auto low = fov_bounds({0.0, -80.0, 10.0, 30.0});
    CHECK(low.elevation_lower_deg == -90.0);
    CHECK(low.elevation_upper_deg == -65.0);
}

TEST_CASE("fov_bounds: rotation equivariance")
{
    const CameraPointing base{10.0, 3.0, 33.0, 12.0};
    const auto b = fov_bounds(base);
    for (double delta : {15.0, 90.0, 181.5, 350.0, -40.0}) {
        auto p = base;
        p.azimuth_deg = normalize_azimuth(base.azimuth_deg + delta);
        const auto r = fov_bounds(p);
        auto diff = [](double a, double b) {
            const double d = std::fmod(std::fabs(a - b), 360.0);
            return std::min(d, 360.0 - d);
        };
        CHECK(diff(r.azimuth_left_deg, normalize_azimuth(b.azimuth_left_deg + delta)) < 1e-9);
        CHECK(diff(r.azimuth_right_deg, normalize_azimuth(b.azimuth_right_deg + delta)) < 1e-9);
        CHECK(r.elevation_upper_deg == b.elevation_upper_deg);
    }
}

TEST_CASE("build_viewpoint")
{
    RoverPose pose;
    pose.easting = 10.0;
    pose.northing = 20.0;
    const auto vp = build_viewpoint(pose, {180.0, 0.0, 90.0, 10.0}, 2.0, 1000.0, "img");
    CHECK(vp.sector.azimuth_left_deg == 135.0);
    CHECK(vp.sector.azimuth_right_deg == 225.0);
    CHECK(vp.pose.easting == 10.0);
    CHECK(vp.observer_height_m == 2.0);
    CHECK(vp.radius_m == 1000.0);
    CHECK(vp.image_id == "img");
    CHECK(vp.warnings.empty());

    CHECK(error_of([&] { build_viewpoint(pose, {0.0, 0.0, 10.0, 10.0}, 2.0, 0.0, "x"); }) ==
          ErrorCode::InvalidRadius);
    CHECK(error_of([&] { build_viewpoint(pose, {0.0, 0.0, 10.0, 10.0}, 2.0, -1.0, "x"); }) ==
          ErrorCode::InvalidRadius);
    CHECK(error_of([&] { build_viewpoint(pose, {0.0, 0.0, 10.0, 10.0}, -0.5, 10.0, "x"); }) ==
          ErrorCode::InvalidArgument);

    const auto clamped = build_viewpoint(pose, {0.0, 85.0, 10.0, 20.0}, 2.0, 100.0, "x");
    CHECK(clamped.sector.elevation_upper_deg == 90.0);
    CHECK(clamped.sector.elevation_lower_deg == 75.0);
    CHECK(clamped.warnings.size() == 1);
}
