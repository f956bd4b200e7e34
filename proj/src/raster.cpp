#include "marscoloc/raster.hpp"

#include "marscoloc/error.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace marscoloc {

// Implemented in geotiff.cpp.
AsciiGrid read_geotiff(const std::filesystem::path& path);
void write_geotiff_f64(const std::filesystem::path& path, const GeoTransform& t,
                       const std::vector<double>& values, std::optional<double> nodata);
void write_geotiff_u8(const std::filesystem::path& path, const GeoTransform& t,
                      const std::vector<std::uint8_t>& values, std::uint8_t nodata);

MapCoord GeoTransform::pixel_to_map(double col, double row) const
{
    return {origin_easting + col * pixel_size, origin_northing - row * pixel_size};
}

PixelCoord GeoTransform::map_to_pixel(double easting, double northing) const
{
    PixelCoord p;
    p.col = (easting - origin_easting) / pixel_size;
    p.row = (origin_northing - northing) / pixel_size;
    p.in_bounds = p.col >= 0.0 && p.row >= 0.0 && p.col <= static_cast<double>(cols) &&
                  p.row <= static_cast<double>(rows);
    return p;
}

MapCoord GeoTransform::cell_center(std::int64_t row, std::int64_t col) const
{
    return pixel_to_map(static_cast<double>(col) + 0.5, static_cast<double>(row) + 0.5);
}

bool GeoTransform::contains(double easting, double northing) const
{
    return map_to_pixel(easting, northing).in_bounds;
}

GeoTransform GeoTransform::window(std::int64_t row0, std::int64_t col0, std::int64_t nrows,
                                  std::int64_t ncols) const
{
    GeoTransform w = *this;
    const auto corner = pixel_to_map(static_cast<double>(col0), static_cast<double>(row0));
    w.origin_easting = corner.easting;
    w.origin_northing = corner.northing;
    w.rows = nrows;
    w.cols = ncols;
    return w;
}

void validate(const GeoTransform& t)
{
    if (!(t.pixel_size > 0.0) || !std::isfinite(t.pixel_size))
        throw Error(ErrorCode::InvalidArgument, "pixel size must be positive");
    if (t.rows <= 0 || t.cols <= 0)
        throw Error(ErrorCode::InvalidArgument, "raster dimensions must be positive");
    if (!std::isfinite(t.origin_easting) || !std::isfinite(t.origin_northing))
        throw Error(ErrorCode::InvalidArgument, "raster origin must be finite");
}

Dem::Dem(GeoTransform transform, std::vector<double> elevations, double nodata)
    : transform_(transform), elevations_(std::move(elevations)), nodata_(nodata)
{
    validate(transform_);
    if (elevations_.size() != transform_.cell_count())
        throw Error(ErrorCode::InvalidArgument,
                    "DEM grid holds " + std::to_string(elevations_.size()) + " cells, transform says " +
                        std::to_string(transform_.cell_count()));
    valid_.resize(elevations_.size());
    bool any = false;
    for (std::size_t i = 0; i < elevations_.size(); ++i) {
        const double z = elevations_[i];
        valid_[i] = std::isfinite(z) && z != nodata_;
        any = any || valid_[i];
    }
    if (!any)
        throw Error(ErrorCode::AllNodata, "DEM contains no valid elevations");
}

double Dem::sample_pixel(double col, double row, double offset) const
{
    const auto last_col = transform_.cols - 1;
    const auto last_row = transform_.rows - 1;
    const double x = std::clamp(col - 0.5, 0.0, static_cast<double>(last_col));
    const double y = std::clamp(row - 0.5, 0.0, static_cast<double>(last_row));

    auto c0 = static_cast<std::int64_t>(x);
    auto r0 = static_cast<std::int64_t>(y);
    double fx = x - static_cast<double>(c0);
    double fy = y - static_cast<double>(r0);
    std::int64_t c1 = c0 + 1;
    std::int64_t r1 = r0 + 1;
    if (c0 >= last_col) {
        c0 = c1 = last_col;
        fx = 0.0;
    }
    if (r0 >= last_row) {
        r0 = r1 = last_row;
        fy = 0.0;
    }

    const std::int64_t rr[4] = {r0, r0, r1, r1};
    const std::int64_t cc[4] = {c0, c1, c0, c1};
    const double w[4] = {(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy};

    double v[4] = {};
    bool clean = true;
    for (int k = 0; k < 4; ++k) {
        if (w[k] == 0.0)
            continue;
        if (!valid(rr[k], cc[k])) {
            clean = false;
            break;
        }
        v[k] = at(rr[k], cc[k]) - offset;
    }
    if (clean) {
        // Nested lerps reproduce constant neighbourhoods exactly.
        const double top = fx == 0.0 ? v[0] : v[0] + fx * (v[1] - v[0]);
        const double bottom = fx == 0.0 ? v[2] : v[2] + fx * (v[3] - v[2]);
        return fy == 0.0 ? top : top + fy * (bottom - top);
    }

    double best = std::numeric_limits<double>::quiet_NaN();
    double best_d2 = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 4; ++k) {
        if (!valid(rr[k], cc[k]))
            continue;
        const double dx = x - static_cast<double>(cc[k]);
        const double dy = y - static_cast<double>(rr[k]);
        const double d2 = dx * dx + dy * dy;
        if (d2 < best_d2) {
            best_d2 = d2;
            best = at(rr[k], cc[k]) - offset;
        }
    }
    return best;
}

double sample_elevation(const Dem& dem, double easting, double northing)
{
    const auto p = dem.transform().map_to_pixel(easting, northing);
    if (!p.in_bounds)
        throw Error(ErrorCode::OutOfBounds, "point (" + std::to_string(easting) + ", " +
                                                std::to_string(northing) + ") is outside the DEM");
    const double z = dem.sample_pixel(p.col, p.row);
    if (std::isnan(z))
        throw Error(ErrorCode::NodataNeighborhood, "no elevation data around (" +
                                                       std::to_string(easting) + ", " +
                                                       std::to_string(northing) + ")");
    return z;
}

std::size_t VisibilityRaster::count(Visibility v) const
{
    return static_cast<std::size_t>(std::count(cells.begin(), cells.end(), v));
}

std::optional<CellOffset> lattice_offset(const GeoTransform& a, const GeoTransform& b)
{
    const double px = a.pixel_size;
    if (std::abs(a.pixel_size - b.pixel_size) > 1e-9 * px)
        return std::nullopt;
    const double dc = (b.origin_easting - a.origin_easting) / px;
    const double dr = (a.origin_northing - b.origin_northing) / px;
    const double rc = std::round(dc);
    const double rr = std::round(dr);
    if (std::abs(dc - rc) > 1e-6 || std::abs(dr - rr) > 1e-6)
        return std::nullopt;
    return CellOffset{static_cast<std::int64_t>(rr), static_cast<std::int64_t>(rc)};
}

VisibilityRaster embed(const VisibilityRaster& src, const GeoTransform& target, Visibility fill)
{
    const auto off = lattice_offset(target, src.transform);
    if (!off)
        throw Error(ErrorCode::GridMismatch, "rasters are not on the same lattice");
    VisibilityRaster out(target, fill);
    out.provenance = src.provenance;
    for (std::int64_t r = 0; r < src.transform.rows; ++r) {
        const auto tr = r + off->rows;
        if (tr < 0 || tr >= target.rows)
            continue;
        for (std::int64_t c = 0; c < src.transform.cols; ++c) {
            const auto tc = c + off->cols;
            if (tc >= 0 && tc < target.cols)
                out.at(tr, tc) = src.at(r, c);
        }
    }
    return out;
}

RasterFormat parse_raster_format(const std::string& name)
{
    if (name == "ascii" || name == "asc" || name == "ascii_grid")
        return RasterFormat::AsciiGrid;
    if (name == "geotiff" || name == "tif" || name == "tiff")
        return RasterFormat::GeoTiff;
    throw Error(ErrorCode::Config, "unknown raster format '" + name + "'");
}

std::string extension(RasterFormat format)
{
    return format == RasterFormat::AsciiGrid ? ".asc" : ".tif";
}

// ------------------------------------------------------------ ASCII grid ---

namespace {

std::string format_number(double v)
{
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

[[noreturn]] void bad_grid(const std::string& why)
{
    throw Error(ErrorCode::UnsupportedFormat, "not a valid ESRI ASCII grid: " + why);
}

std::string lower(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

bool parse_double(const std::string& token, double& out)
{
    const char* first = token.data() + (token.starts_with('+') ? 1 : 0);
    const auto [ptr, ec] = std::from_chars(first, token.data() + token.size(), out);
    return ec == std::errc() && ptr == token.data() + token.size();
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::Io, "cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

bool is_tiff(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    char magic[4] = {};
    in.read(magic, 4);
    return in.gcount() == 4 && ((magic[0] == 'I' && magic[1] == 'I' && magic[2] == 42) ||
                                (magic[0] == 'M' && magic[1] == 'M' && magic[3] == 42));
}

AsciiGrid read_any(const std::filesystem::path& path)
{
    if (!std::filesystem::exists(path))
        throw Error(ErrorCode::Io, "no such file " + path.string());
    const auto ext = lower(path.extension().string());
    if (ext == ".tif" || ext == ".tiff" || is_tiff(path))
        return read_geotiff(path);
    if (ext == ".asc" || ext == ".txt" || ext == ".grd" || ext.empty())
        return parse_ascii_grid(read_file(path));
    throw Error(ErrorCode::UnsupportedFormat, "unsupported raster format " + path.string());
}

} // namespace

AsciiGrid parse_ascii_grid(const std::string& text)
{
    std::istringstream in(text);
    AsciiGrid g;
    std::optional<double> ncols, nrows, xll, yll, cellsize;
    bool x_center = false, y_center = false;

    std::string token;
    std::streampos data_start = 0;
    while (true) {
        data_start = in.tellg();
        if (!(in >> token))
            break;
        const auto key = lower(token);
        if (!std::isalpha(static_cast<unsigned char>(key[0])))
            break;
        std::string value_s;
        if (!(in >> value_s))
            bad_grid("header " + token + " has no value");
        double value = 0.0;
        if (!parse_double(value_s, value))
            bad_grid("header " + token + " is not numeric");
        if (key == "ncols") ncols = value;
        else if (key == "nrows") nrows = value;
        else if (key == "xllcorner") xll = value;
        else if (key == "xllcenter") { xll = value; x_center = true; }
        else if (key == "yllcorner") yll = value;
        else if (key == "yllcenter") { yll = value; y_center = true; }
        else if (key == "cellsize") cellsize = value;
        else if (key == "nodata_value") g.nodata = value;
        else if (key == "dx" || key == "dy" || key == "xcellsize" || key == "ycellsize")
            throw Error(ErrorCode::NonSquarePixels, "ASCII grid declares separate x/y cell sizes");
        else
            bad_grid("unknown header key " + token);
    }
    if (!ncols || !nrows || !xll || !yll || !cellsize)
        bad_grid("missing one of ncols, nrows, xllcorner, yllcorner, cellsize");
    if (*ncols < 1 || *nrows < 1 || *ncols != std::floor(*ncols) || *nrows != std::floor(*nrows))
        bad_grid("ncols/nrows must be positive integers");
    if (!(*cellsize > 0))
        bad_grid("cellsize must be positive");

    g.transform.cols = static_cast<std::int64_t>(*ncols);
    g.transform.rows = static_cast<std::int64_t>(*nrows);
    g.transform.pixel_size = *cellsize;
    g.transform.origin_easting = *xll - (x_center ? *cellsize / 2 : 0.0);
    const double y_lower = *yll - (y_center ? *cellsize / 2 : 0.0);
    g.transform.origin_northing = y_lower + static_cast<double>(g.transform.rows) * *cellsize;

    in.clear();
    in.seekg(data_start);
    g.values.reserve(g.transform.cell_count());
    while (in >> token) {
        double v = 0.0;
        if (!parse_double(token, v))
            bad_grid("non-numeric cell value '" + token + "'");
        g.values.push_back(v);
    }
    if (g.values.size() != g.transform.cell_count())
        bad_grid("expected " + std::to_string(g.transform.cell_count()) + " values, found " +
                 std::to_string(g.values.size()));
    return g;
}

std::string format_ascii_grid(const GeoTransform& t, const std::vector<double>& values,
                              std::optional<double> nodata)
{
    std::string out;
    out += "ncols " + std::to_string(t.cols) + "\n";
    out += "nrows " + std::to_string(t.rows) + "\n";
    out += "xllcorner " + format_number(t.origin_easting) + "\n";
    out += "yllcorner " +
           format_number(t.origin_northing - static_cast<double>(t.rows) * t.pixel_size) + "\n";
    out += "cellsize " + format_number(t.pixel_size) + "\n";
    if (nodata)
        out += "NODATA_value " + format_number(*nodata) + "\n";
    for (std::int64_t r = 0; r < t.rows; ++r) {
        for (std::int64_t c = 0; c < t.cols; ++c) {
            if (c != 0)
                out += ' ';
            out += format_number(values[static_cast<std::size_t>(r * t.cols + c)]);
        }
        out += '\n';
    }
    return out;
}

Dem load_dem(const std::filesystem::path& path)
{
    auto g = read_any(path);
    const double nodata = g.nodata.value_or(-std::numeric_limits<double>::max());
    return Dem(g.transform, std::move(g.values), nodata);
}

VisibilityRaster load_visibility(const std::filesystem::path& path)
{
    const auto g = read_any(path);
    VisibilityRaster vs(g.transform);
    for (std::size_t i = 0; i < g.values.size(); ++i) {
        const double v = g.values[i];
        if (v == 1.0)
            vs.cells[i] = Visibility::Visible;
        else if (v == 0.0)
            vs.cells[i] = Visibility::Hidden;
        else if (v == 255.0 || (g.nodata && v == *g.nodata) || std::isnan(v))
            vs.cells[i] = Visibility::Nodata;
        else
            throw Error(ErrorCode::UnsupportedFormat,
                        path.string() + " is not a visibility raster (cell value " +
                            format_number(v) + ")");
    }
    return vs;
}

void write_visibility(const VisibilityRaster& vs, const std::filesystem::path& path,
                      RasterFormat format)
{
    if (format == RasterFormat::GeoTiff) {
        std::vector<std::uint8_t> bytes(vs.cells.size());
        std::transform(vs.cells.begin(), vs.cells.end(), bytes.begin(),
                       [](Visibility v) { return static_cast<std::uint8_t>(v); });
        write_geotiff_u8(path, vs.transform, bytes, 255);
        return;
    }
    std::vector<double> values(vs.cells.size());
    std::transform(vs.cells.begin(), vs.cells.end(), values.begin(),
                   [](Visibility v) { return static_cast<double>(static_cast<std::uint8_t>(v)); });
    std::ofstream out(path, std::ios::binary);
    out << format_ascii_grid(vs.transform, values, 255.0);
    if (!out)
        throw Error(ErrorCode::Io, "cannot write " + path.string());
}

void write_dem(const Dem& dem, const std::filesystem::path& path, RasterFormat format)
{
    const bool has_nodata = dem.nodata() != -std::numeric_limits<double>::max();
    const std::optional<double> nodata = has_nodata ? std::optional(dem.nodata()) : std::nullopt;
    if (format == RasterFormat::GeoTiff) {
        write_geotiff_f64(path, dem.transform(), dem.elevations(), nodata);
        return;
    }
    std::ofstream out(path, std::ios::binary);
    out << format_ascii_grid(dem.transform(), dem.elevations(), nodata);
    if (!out)
        throw Error(ErrorCode::Io, "cannot write " + path.string());
}

} // namespace marscoloc
