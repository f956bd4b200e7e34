#pragma once

#include "marscoloc/labels.hpp"
#include "marscoloc/localization.hpp"

#include <string>
#include <vector>

namespace marscoloc {

/// Wraps any finite angle into [0, 360). Throws InvalidArgument otherwise.
double normalize_azimuth(double deg);

/// Absolute angular bounds of a camera frame. Azimuths run clockwise from
/// `azimuth_left_deg` to `azimuth_right_deg`, both in [0, 360).
struct FovSector {
    double azimuth_left_deg = 0.0;
    double azimuth_right_deg = 0.0;
    double elevation_upper_deg = 90.0;
    double elevation_lower_deg = -90.0;
    bool full_circle = false;
    /// Set when an elevation bound was pulled back to +/-90.
    bool elevation_clamped = false;

    /// Clockwise angular width; 360 for a full circle.
    double width_deg() const;
    bool operator==(const FovSector&) const = default;
};

FovSector fov_bounds(const CameraPointing& pointing);

/// Sector covering every azimuth and the full elevation band.
FovSector full_sector();

struct Viewpoint {
    RoverPose pose;
    FovSector sector;
    double observer_height_m = 2.0;
    double radius_m = 1000.0;
    std::string image_id;
    std::vector<std::string> warnings;
};

constexpr double kDefaultObserverHeightM = 2.0;
constexpr double kDefaultRadiusM = 1000.0;

/// Throws InvalidRadius for radius <= 0 (or non-finite) and InvalidArgument
/// for a negative observer height.
Viewpoint build_viewpoint(const RoverPose& pose, const CameraPointing& pointing,
                          double observer_height_m, double radius_m, std::string image_id);

} // namespace marscoloc
