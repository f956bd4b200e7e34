// Single-band GeoTIFF codec on top of libtiff. Only the georeferencing tags
// needed for a north-up square-pixel grid are read and written.

#include "marscoloc/error.hpp"
#include "marscoloc/raster.hpp"

#include <tiffio.h>

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <mutex>

namespace marscoloc {

namespace {

constexpr ttag_t kModelPixelScale = 33550;
constexpr ttag_t kModelTiepoint = 33922;
constexpr ttag_t kModelTransformation = 34264;
constexpr ttag_t kGeoKeyDirectory = 34735;
constexpr ttag_t kGdalNodata = 42113;

constexpr int kRasterTypeGeoKey = 1025;
constexpr int kRasterPixelIsPoint = 2;

TIFFExtendProc g_parent_extender = nullptr;

void register_geotiff_tags(TIFF* tif)
{
    static const TIFFFieldInfo fields[] = {
        {kModelPixelScale, -1, -1, TIFF_DOUBLE, FIELD_CUSTOM, 1, 1,
         const_cast<char*>("ModelPixelScaleTag")},
        {kModelTiepoint, -1, -1, TIFF_DOUBLE, FIELD_CUSTOM, 1, 1,
         const_cast<char*>("ModelTiepointTag")},
        {kModelTransformation, -1, -1, TIFF_DOUBLE, FIELD_CUSTOM, 1, 1,
         const_cast<char*>("ModelTransformationTag")},
        {kGeoKeyDirectory, -1, -1, TIFF_SHORT, FIELD_CUSTOM, 1, 1,
         const_cast<char*>("GeoKeyDirectoryTag")},
        {kGdalNodata, -1, -1, TIFF_ASCII, FIELD_CUSTOM, 1, 0, const_cast<char*>("GDALNoDataValue")},
    };
    TIFFMergeFieldInfo(tif, fields, sizeof fields / sizeof fields[0]);
    if (g_parent_extender != nullptr)
        g_parent_extender(tif);
}

void install_extender()
{
    static std::once_flag once;
    std::call_once(once, [] {
        g_parent_extender = TIFFSetTagExtender(register_geotiff_tags);
        // Keep libtiff quiet; failures surface as exceptions.
        TIFFSetWarningHandler(nullptr);
        TIFFSetErrorHandler(nullptr);
    });
}

struct TiffCloser {
    void operator()(TIFF* t) const { TIFFClose(t); }
};
using TiffPtr = std::unique_ptr<TIFF, TiffCloser>;

TiffPtr open(const std::filesystem::path& path, const char* mode)
{
    install_extender();
    TiffPtr tif(TIFFOpen(path.string().c_str(), mode));
    if (!tif)
        throw Error(ErrorCode::Io, std::string("cannot open TIFF ") + path.string());
    return tif;
}

[[noreturn]] void unsupported(const std::filesystem::path& path, const std::string& why)
{
    throw Error(ErrorCode::UnsupportedFormat, path.string() + ": " + why);
}

template <typename T>
double fetch_as_double(const void* buf, std::size_t i)
{
    return static_cast<double>(static_cast<const T*>(buf)[i]);
}

double convert(const void* buf, std::size_t i, uint16_t format, uint16_t bits)
{
    if (format == SAMPLEFORMAT_IEEEFP)
        return bits == 32 ? fetch_as_double<float>(buf, i) : fetch_as_double<double>(buf, i);
    if (format == SAMPLEFORMAT_INT) {
        switch (bits) {
        case 8: return fetch_as_double<std::int8_t>(buf, i);
        case 16: return fetch_as_double<std::int16_t>(buf, i);
        default: return fetch_as_double<std::int32_t>(buf, i);
        }
    }
    switch (bits) {
    case 8: return fetch_as_double<std::uint8_t>(buf, i);
    case 16: return fetch_as_double<std::uint16_t>(buf, i);
    default: return fetch_as_double<std::uint32_t>(buf, i);
    }
}

GeoTransform read_georeference(TIFF* tif, const std::filesystem::path& path, std::uint32_t width,
                               std::uint32_t height)
{
    GeoTransform t;
    t.cols = width;
    t.rows = height;

    bool pixel_is_point = false;
    uint32_t key_count = 0;
    uint16_t* keys = nullptr;
    if (TIFFGetField(tif, kGeoKeyDirectory, &key_count, &keys) && key_count >= 4) {
        const uint32_t n = keys[3];
        for (uint32_t k = 0; k < n && 4 + 4 * k + 3 < key_count; ++k) {
            const uint16_t* entry = keys + 4 + 4 * k;
            if (entry[0] == kRasterTypeGeoKey && entry[1] == 0)
                pixel_is_point = entry[3] == kRasterPixelIsPoint;
        }
    }

    uint32_t count = 0;
    double* values = nullptr;
    if (TIFFGetField(tif, kModelTransformation, &count, &values) && count >= 16) {
        const double a = values[0], b = values[1], d = values[3];
        const double e = values[4], f = values[5], h = values[7];
        if (b != 0.0 || e != 0.0 || !(f < 0.0) || !(a > 0.0))
            throw Error(ErrorCode::RotatedTransform, path.string() + " is not north-up");
        if (std::abs(a + f) > 1e-9 * a)
            throw Error(ErrorCode::NonSquarePixels, path.string() + " has non-square pixels");
        t.pixel_size = a;
        t.origin_easting = d;
        t.origin_northing = h;
    } else {
        double* scale = nullptr;
        double* tie = nullptr;
        uint32_t scale_count = 0, tie_count = 0;
        if (!TIFFGetField(tif, kModelPixelScale, &scale_count, &scale) || scale_count < 2 ||
            !TIFFGetField(tif, kModelTiepoint, &tie_count, &tie) || tie_count < 6)
            unsupported(path, "missing GeoTIFF georeferencing tags");
        if (tie_count > 6)
            throw Error(ErrorCode::RotatedTransform,
                        path.string() + " is georeferenced by multiple tie points");
        if (!(scale[0] > 0.0) || !(scale[1] > 0.0))
            throw Error(ErrorCode::RotatedTransform, path.string() + " is not north-up");
        if (std::abs(scale[0] - scale[1]) > 1e-9 * scale[0])
            throw Error(ErrorCode::NonSquarePixels, path.string() + " has non-square pixels");
        t.pixel_size = scale[0];
        t.origin_easting = tie[3] - tie[0] * scale[0];
        t.origin_northing = tie[4] + tie[1] * scale[1];
    }
    if (pixel_is_point) {
        t.origin_easting -= t.pixel_size / 2;
        t.origin_northing += t.pixel_size / 2;
    }
    return t;
}

void write_georeference(TIFF* tif, const GeoTransform& t, const std::string& nodata)
{
    double scale[3] = {t.pixel_size, t.pixel_size, 0.0};
    double tie[6] = {0.0, 0.0, 0.0, t.origin_easting, t.origin_northing, 0.0};
    // version 1.1.0, 2 keys: GTModelType = projected, GTRasterType = pixel is area
    uint16_t keys[12] = {1, 1, 0, 2, 1024, 0, 1, 1, 1025, 0, 1, 1};
    TIFFSetField(tif, kModelPixelScale, 3, scale);
    TIFFSetField(tif, kModelTiepoint, 6, tie);
    TIFFSetField(tif, kGeoKeyDirectory, 12, keys);
    if (!nodata.empty())
        TIFFSetField(tif, kGdalNodata, nodata.c_str());
}

std::string nodata_text(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

template <typename T>
void write_rows(TIFF* tif, const std::filesystem::path& path, const GeoTransform& t,
                const std::vector<T>& values)
{
    std::vector<T> row(static_cast<std::size_t>(t.cols));
    for (std::int64_t r = 0; r < t.rows; ++r) {
        std::memcpy(row.data(), values.data() + r * t.cols, row.size() * sizeof(T));
        if (TIFFWriteScanline(tif, row.data(), static_cast<uint32_t>(r), 0) < 0)
            throw Error(ErrorCode::Io, "failed writing " + path.string());
    }
}

void set_common(TIFF* tif, const GeoTransform& t, uint16_t bits, uint16_t format)
{
    TIFFSetField(tif, TIFFTAG_IMAGEWIDTH, static_cast<uint32_t>(t.cols));
    TIFFSetField(tif, TIFFTAG_IMAGELENGTH, static_cast<uint32_t>(t.rows));
    TIFFSetField(tif, TIFFTAG_SAMPLESPERPIXEL, 1);
    TIFFSetField(tif, TIFFTAG_BITSPERSAMPLE, bits);
    TIFFSetField(tif, TIFFTAG_SAMPLEFORMAT, format);
    TIFFSetField(tif, TIFFTAG_PHOTOMETRIC, PHOTOMETRIC_MINISBLACK);
    TIFFSetField(tif, TIFFTAG_PLANARCONFIG, PLANARCONFIG_CONTIG);
    TIFFSetField(tif, TIFFTAG_COMPRESSION, COMPRESSION_NONE);
    TIFFSetField(tif, TIFFTAG_ROWSPERSTRIP, TIFFDefaultStripSize(tif, 0));
}

} // namespace

AsciiGrid read_geotiff(const std::filesystem::path& path)
{
    auto tif = open(path, "r");
    uint32_t width = 0, height = 0;
    uint16_t spp = 1, bits = 0, format = SAMPLEFORMAT_UINT, planar = PLANARCONFIG_CONTIG;
    TIFFGetField(tif.get(), TIFFTAG_IMAGEWIDTH, &width);
    TIFFGetField(tif.get(), TIFFTAG_IMAGELENGTH, &height);
    TIFFGetFieldDefaulted(tif.get(), TIFFTAG_SAMPLESPERPIXEL, &spp);
    TIFFGetFieldDefaulted(tif.get(), TIFFTAG_BITSPERSAMPLE, &bits);
    TIFFGetFieldDefaulted(tif.get(), TIFFTAG_SAMPLEFORMAT, &format);
    TIFFGetFieldDefaulted(tif.get(), TIFFTAG_PLANARCONFIG, &planar);
    if (width == 0 || height == 0)
        unsupported(path, "empty image");
    if (spp != 1)
        unsupported(path, "only single-band rasters are supported");
    const bool float_ok = format == SAMPLEFORMAT_IEEEFP && (bits == 32 || bits == 64);
    const bool int_ok = (format == SAMPLEFORMAT_INT || format == SAMPLEFORMAT_UINT) &&
                        (bits == 8 || bits == 16 || bits == 32);
    if (!float_ok && !int_ok)
        unsupported(path, "unsupported sample type");

    AsciiGrid g;
    g.transform = read_georeference(tif.get(), path, width, height);

    char* nodata = nullptr;
    if (TIFFGetField(tif.get(), kGdalNodata, &nodata) && nodata != nullptr) {
        char* end = nullptr;
        const double v = std::strtod(nodata, &end);
        if (end != nodata)
            g.nodata = v;
    }

    g.values.assign(static_cast<std::size_t>(width) * height, 0.0);
    if (TIFFIsTiled(tif.get())) {
        uint32_t tw = 0, th = 0;
        TIFFGetField(tif.get(), TIFFTAG_TILEWIDTH, &tw);
        TIFFGetField(tif.get(), TIFFTAG_TILELENGTH, &th);
        std::vector<unsigned char> buf(static_cast<std::size_t>(TIFFTileSize(tif.get())));
        for (uint32_t y0 = 0; y0 < height; y0 += th) {
            for (uint32_t x0 = 0; x0 < width; x0 += tw) {
                if (TIFFReadTile(tif.get(), buf.data(), x0, y0, 0, 0) < 0)
                    throw Error(ErrorCode::Io, "failed reading tile of " + path.string());
                for (uint32_t y = 0; y < th && y0 + y < height; ++y)
                    for (uint32_t x = 0; x < tw && x0 + x < width; ++x)
                        g.values[static_cast<std::size_t>(y0 + y) * width + x0 + x] =
                            convert(buf.data(), static_cast<std::size_t>(y) * tw + x, format, bits);
            }
        }
    } else {
        std::vector<unsigned char> buf(static_cast<std::size_t>(TIFFScanlineSize(tif.get())));
        for (uint32_t y = 0; y < height; ++y) {
            if (TIFFReadScanline(tif.get(), buf.data(), y, 0) < 0)
                throw Error(ErrorCode::Io, "failed reading row of " + path.string());
            for (uint32_t x = 0; x < width; ++x)
                g.values[static_cast<std::size_t>(y) * width + x] = convert(buf.data(), x, format, bits);
        }
    }
    return g;
}

void write_geotiff_f64(const std::filesystem::path& path, const GeoTransform& t,
                       const std::vector<double>& values, std::optional<double> nodata)
{
    auto tif = open(path, "w");
    set_common(tif.get(), t, 64, SAMPLEFORMAT_IEEEFP);
    write_georeference(tif.get(), t, nodata ? nodata_text(*nodata) : std::string());
    write_rows(tif.get(), path, t, values);
}

void write_geotiff_u8(const std::filesystem::path& path, const GeoTransform& t,
                      const std::vector<std::uint8_t>& values, std::uint8_t nodata)
{
    auto tif = open(path, "w");
    set_common(tif.get(), t, 8, SAMPLEFORMAT_UINT);
    write_georeference(tif.get(), t, std::to_string(nodata));
    write_rows(tif.get(), path, t, values);
}

} // namespace marscoloc
