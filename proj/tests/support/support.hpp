#pragma once

#include "marscoloc/pipeline.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace testsupport {

using marscoloc::Dem;

std::filesystem::path fixture(const std::string& name);

/// Unique scratch directory, removed on destruction.
class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

std::string read_file(const std::filesystem::path& p);
void write_file(const std::filesystem::path& p, const std::string& text);

/// North-up grid whose NW corner is (x0, y0).
Dem make_dem(std::int64_t rows, std::int64_t cols, double pixel, double x0, double y0,
             const std::function<double(std::int64_t, std::int64_t)>& height);

Dem flat_dem(std::int64_t n, double value = 0.0, double pixel = 1.0);

/// Flat ground with one full-height column of `height` at `wall_col`.
Dem wall_dem(std::int64_t n, std::int64_t wall_col, double height, double pixel = 1.0);

/// Sum of random Gaussian hills, heights quantized to 1/1024 m so that
/// adding whole metres is exact.
Dem smooth_random_dem(std::int64_t n, std::uint64_t seed, int hills = 12, double pixel = 1.0);

/// Viewpoint at the centre of cell (row, col) of a DEM with origin (x0, y0).
marscoloc::Viewpoint viewpoint_at(const Dem& dem, std::int64_t row, std::int64_t col,
                                  double eye_height, double radius_m,
                                  marscoloc::FovSector sector);

marscoloc::FovSector sector(double left, double right, double lower = -90.0, double upper = 90.0);

// ---------------------------------------------------------------- oracles

/// Clockwise bearing from north of a pixel offset (dx east, dy south).
double bearing_deg(double dx, double dy);

/// Whether `az` is on the clockwise arc left..right, inclusive, with a
/// tolerance; computed independently of the library.
bool on_arc(double az, double left, double right);

/// Bilinear height at pixel coordinates (x, y) measured from the NW corner,
/// clamped to the outermost cell centres. Assumes no nodata.
double bilinear(const Dem& dem, double x, double y);

/// Line of sight by dense sampling (`per_px` samples per pixel). `eye` and
/// `target_z` are absolute heights; positions in pixel coordinates.
bool dense_los(const Dem& dem, double ox, double oy, double eye, double tx, double ty,
               double target_z, int per_px = 64);

/// Largest terrain angle (as a slope, rise/run in metres) seen from the eye
/// strictly between observer and target, by dense sampling.
double dense_max_slope(const Dem& dem, double ox, double oy, double eye, double tx, double ty,
                       int per_px = 64);

/// Visibility of every cell within radius on flat terrain for a sector and
/// elevation band: the analytic disk/wedge oracle.
std::vector<std::vector<bool>> flat_oracle(std::int64_t n, std::int64_t orow, std::int64_t ocol,
                                           double eye, double radius_px,
                                           const marscoloc::FovSector& s);

/// Expands a windowed visibility raster to the full n x n grid (true = visible).
std::vector<std::vector<bool>> visible_grid(const marscoloc::VisibilityRaster& vs,
                                            const Dem& dem);

/// Minimal little-endian single-strip TIFF written byte by byte: float64
/// samples, ModelPixelScale + ModelTiepoint, optional GDAL_NODATA.
std::vector<std::uint8_t> tiff_bytes(std::int64_t rows, std::int64_t cols,
                                     const std::vector<double>& values, double pixel, double x0,
                                     double y0, const std::string& nodata = "");

} // namespace testsupport

namespace testsupport {

/// Error code raised by `f`, or nullopt when it returns normally.
template <typename F>
std::optional<marscoloc::ErrorCode> error_of(F&& f)
{
    try {
        f();
    } catch (const marscoloc::Error& e) {
        return e.code();
    }
    return std::nullopt;
}

} // namespace testsupport
