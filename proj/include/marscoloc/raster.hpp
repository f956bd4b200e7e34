#pragma once

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace marscoloc {

struct PixelCoord {
    double col = 0.0;
    double row = 0.0;
    bool in_bounds = false;
};

struct MapCoord {
    double easting = 0.0;
    double northing = 0.0;
};

/// North-up, square-pixel affine georeference. The origin is the outer
/// (north-west) corner of pixel (0, 0); northing decreases with row.
struct GeoTransform {
    double origin_easting = 0.0;
    double origin_northing = 0.0;
    double pixel_size = 1.0;
    std::int64_t rows = 0;
    std::int64_t cols = 0;

    /// Continuous pixel coordinates; (0.5, 0.5) is the centre of cell (0, 0).
    MapCoord pixel_to_map(double col, double row) const;
    PixelCoord map_to_pixel(double easting, double northing) const;
    MapCoord cell_center(std::int64_t row, std::int64_t col) const;

    bool contains(double easting, double northing) const;
    std::size_t cell_count() const { return static_cast<std::size_t>(rows * cols); }

    /// Sub-grid starting at (row0, col0) with the given size.
    GeoTransform window(std::int64_t row0, std::int64_t col0, std::int64_t nrows,
                        std::int64_t ncols) const;

    bool operator==(const GeoTransform&) const = default;
};

/// Throws InvalidArgument unless pixel_size > 0 and both dimensions are
/// positive.
void validate(const GeoTransform& t);

/// Elevation grid in metres, row-major from the north edge. Immutable after
/// construction and safe to share between threads.
class Dem {
public:
    /// Throws AllNodata when no cell carries data. NaN cells are nodata too.
    Dem(GeoTransform transform, std::vector<double> elevations,
        double nodata = -std::numeric_limits<double>::max());

    const GeoTransform& transform() const { return transform_; }
    double nodata() const { return nodata_; }
    const std::vector<double>& elevations() const { return elevations_; }

    double at(std::int64_t row, std::int64_t col) const
    {
        return elevations_[static_cast<std::size_t>(row * transform_.cols + col)];
    }
    bool valid(std::int64_t row, std::int64_t col) const
    {
        return valid_[static_cast<std::size_t>(row * transform_.cols + col)] != 0;
    }

    /// Bilinear sample at continuous pixel coordinates, clamped to the grid.
    /// Contributors with zero weight are ignored; when a weighted contributor
    /// is nodata the nearest valid one of the four neighbours is used.
    /// Returns NaN when all four neighbours are nodata.
    /// `offset` is subtracted from every contributor before weighting, which
    /// keeps differences against a reference height exact for dyadic grids.
    double sample_pixel(double col, double row, double offset = 0.0) const;

private:
    GeoTransform transform_;
    std::vector<double> elevations_;
    std::vector<std::uint8_t> valid_;
    double nodata_;
};

/// Throws OutOfBounds outside the DEM and NodataNeighborhood when no
/// neighbour carries data.
double sample_elevation(const Dem& dem, double easting, double northing);

enum class Visibility : std::uint8_t { Hidden = 0, Visible = 1, Nodata = 255 };

struct VisibilityRaster {
    GeoTransform transform;
    std::vector<Visibility> cells;
    std::string provenance;

    VisibilityRaster() = default;
    VisibilityRaster(GeoTransform t, Visibility fill = Visibility::Hidden)
        : transform(t), cells(t.cell_count(), fill) {}

    Visibility at(std::int64_t row, std::int64_t col) const
    {
        return cells[static_cast<std::size_t>(row * transform.cols + col)];
    }
    Visibility& at(std::int64_t row, std::int64_t col)
    {
        return cells[static_cast<std::size_t>(row * transform.cols + col)];
    }
    std::size_t count(Visibility v) const;
};

/// Integer (row, col) offset of grid `b`'s origin within grid `a`'s lattice,
/// or nullopt when pixel sizes differ or the origins are not lattice-aligned.
struct CellOffset {
    std::int64_t rows = 0;
    std::int64_t cols = 0;
};
std::optional<CellOffset> lattice_offset(const GeoTransform& a, const GeoTransform& b);

/// Copies `src` onto an aligned `target` grid; cells `src` does not cover
/// get `fill`. Throws GridMismatch when the grids are not aligned.
VisibilityRaster embed(const VisibilityRaster& src, const GeoTransform& target,
                       Visibility fill = Visibility::Hidden);

enum class RasterFormat { AsciiGrid, GeoTiff };

RasterFormat parse_raster_format(const std::string& name);
/// ".asc" or ".tif".
std::string extension(RasterFormat format);

/// ESRI ASCII grid (.asc) or single-band GeoTIFF (.tif/.tiff), chosen by
/// extension and confirmed by content.
Dem load_dem(const std::filesystem::path& path);
VisibilityRaster load_visibility(const std::filesystem::path& path);

/// Encodes visible=1, hidden=0, nodata=255.
void write_visibility(const VisibilityRaster& vs, const std::filesystem::path& path,
                      RasterFormat format);
void write_dem(const Dem& dem, const std::filesystem::path& path, RasterFormat format);

/// Text codec for ESRI ASCII grids, exposed for in-memory use.
struct AsciiGrid {
    GeoTransform transform;
    std::vector<double> values;
    std::optional<double> nodata;
};
AsciiGrid parse_ascii_grid(const std::string& text);
std::string format_ascii_grid(const GeoTransform& t, const std::vector<double>& values,
                              std::optional<double> nodata);

/// One polygon per 4-connected region of visible cells: an exterior ring
/// (counter-clockwise) followed by hole rings (clockwise). Rings are closed.
struct VisibilityPolygon {
    std::vector<std::vector<MapCoord>> rings;
    std::size_t cell_count = 0;
    double area_m2 = 0.0;
};

std::vector<VisibilityPolygon> trace_polygons(const VisibilityRaster& vs);

/// RFC 7946 FeatureCollection of the visible regions in map coordinates.
nlohmann::json polygonize(const VisibilityRaster& vs,
                          const std::string& crs_note = "map easting/northing in metres; "
                                                        "CRS of the source DEM");

/// Signed shoelace area of a closed ring (positive when counter-clockwise).
double ring_area(const std::vector<MapCoord>& ring);

} // namespace marscoloc
