#pragma once

#include "marscoloc/pointing.hpp"
#include "marscoloc/raster.hpp"

namespace marscoloc {

enum class ViewshedMode { Exact, Sweep };
enum class Curvature { Off, Mars };

ViewshedMode parse_mode(const std::string& name);
Curvature parse_curvature(const std::string& name);

constexpr double kMarsMeanRadiusM = 3389500.0;

struct ViewshedParams {
    Viewpoint viewpoint;
    ViewshedMode mode = ViewshedMode::Sweep;
    double target_height_m = 0.0;
    Curvature curvature = Curvature::Off;
    double planet_radius_m = kMarsMeanRadiusM;
    /// Worker threads; results are bit-identical for any value >= 1.
    unsigned workers = 1;
};

/// True iff `azimuth_deg` lies on the clockwise arc from the left bound to
/// the right bound, both inclusive. Bounds are matched to within
/// kAngleTolerance so that grid-aligned directions computed with atan2
/// land on the side the caller intended.
bool in_sector(const FovSector& sector, double azimuth_deg);

constexpr double kAngleTolerance = 1e-9;

/// Exact line-of-sight test from the viewpoint's eye to a target point
/// `target_height_m` above the terrain. Terrain is sampled every half pixel
/// along the segment; a sample blocks when its vertical angle from the eye
/// is not strictly below the target's. Samples that fall inside a nodata cell block.
bool line_of_sight(const Dem& dem, const Viewpoint& viewpoint, double target_easting,
                   double target_northing, double target_height_m,
                   Curvature curvature = Curvature::Off,
                   double planet_radius_m = kMarsMeanRadiusM);

/// Visibility of every cell centre around the viewpoint. The output covers
/// the part of the DEM within the viewpoint radius; cells outside the sector,
/// elevation band or radius are hidden and nodata cells stay nodata.
///
/// Exact mode runs an independent line_of_sight per cell. Sweep mode casts
/// radial rays at half the angular step atan(0.5 px / R), R being the
/// distance to the farthest DEM corner, and keeps a running maximum of terrain slope along each ray. A cell is judged against
/// the ray nearest its bearing up to two pixels short of the cell; the last
/// two pixels are sampled on the cell's own sight line.
VisibilityRaster compute_viewshed(const Dem& dem, const ViewshedParams& params);

struct OverlapReport {
    VisibilityRaster overlap;
    double area_a_m2 = 0.0;
    double area_b_m2 = 0.0;
    double area_overlap_m2 = 0.0;
    /// overlap / union of the visible areas; 1 when both are empty.
    double jaccard = 0.0;
};

/// Rasters must share the pixel size and sit on the same lattice (integer
/// cell offset); the overlap raster spans the union of both extents.
OverlapReport overlap(const VisibilityRaster& a, const VisibilityRaster& b);

} // namespace marscoloc
