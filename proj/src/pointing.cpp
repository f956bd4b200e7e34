#include "marscoloc/pointing.hpp"

#include "marscoloc/error.hpp"

#include <algorithm>
#include <cmath>

namespace marscoloc {

double normalize_azimuth(double deg)
{
    if (!std::isfinite(deg))
        throw Error(ErrorCode::InvalidArgument, "azimuth must be finite");
    double r = std::fmod(deg, 360.0);
    if (r < 0.0)
        r += 360.0;
    // -tiny + 360 rounds to 360
    if (r >= 360.0)
        r = 0.0;
    return r;
}

double FovSector::width_deg() const
{
    if (full_circle)
        return 360.0;
    return normalize_azimuth(azimuth_right_deg - azimuth_left_deg);
}

FovSector full_sector()
{
    FovSector s;
    s.full_circle = true;
    return s;
}

FovSector fov_bounds(const CameraPointing& pointing)
{
    const CameraPointing p = normalized(pointing);

    FovSector s;
    s.azimuth_left_deg = normalize_azimuth(p.azimuth_deg - p.hfov_deg / 2.0);
    s.azimuth_right_deg = normalize_azimuth(p.azimuth_deg + p.hfov_deg / 2.0);
    s.full_circle = p.hfov_deg >= 360.0;

    const double upper = p.elevation_deg + p.vfov_deg / 2.0;
    const double lower = p.elevation_deg - p.vfov_deg / 2.0;
    s.elevation_upper_deg = std::clamp(upper, -90.0, 90.0);
    s.elevation_lower_deg = std::clamp(lower, -90.0, 90.0);
    s.elevation_clamped = upper != s.elevation_upper_deg || lower != s.elevation_lower_deg;
    return s;
}

Viewpoint build_viewpoint(const RoverPose& pose, const CameraPointing& pointing,
                          double observer_height_m, double radius_m, std::string image_id)
{
    if (!(radius_m > 0.0) || !std::isfinite(radius_m))
        throw Error(ErrorCode::InvalidRadius,
                    "viewshed radius must be positive, got " + std::to_string(radius_m));
    if (!(observer_height_m >= 0.0) || !std::isfinite(observer_height_m))
        throw Error(ErrorCode::InvalidArgument, "observer height must be >= 0");

    Viewpoint vp;
    vp.pose = pose;
    vp.sector = fov_bounds(pointing);
    vp.observer_height_m = observer_height_m;
    vp.radius_m = radius_m;
    vp.image_id = std::move(image_id);
    if (vp.sector.elevation_clamped)
        vp.warnings.push_back("elevation band clamped to [" +
                              std::to_string(vp.sector.elevation_lower_deg) + ", " +
                              std::to_string(vp.sector.elevation_upper_deg) + "] deg");
    return vp;
}

} // namespace marscoloc
