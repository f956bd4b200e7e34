#include "support.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include <unistd.h>

namespace testsupport {

namespace fs = std::filesystem;
using namespace marscoloc;

fs::path fixture(const std::string& name)
{
    return fs::path(MARSCOLOC_FIXTURES) / name;
}

TempDir::TempDir()
{
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("marscoloc_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
}

TempDir::~TempDir()
{
    std::error_code ec;
    fs::remove_all(path_, ec);
}

std::string read_file(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& p, const std::string& text)
{
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << text;
}

Dem make_dem(std::int64_t rows, std::int64_t cols, double pixel, double x0, double y0,
             const std::function<double(std::int64_t, std::int64_t)>& height)
{
    GeoTransform t{x0, y0, pixel, rows, cols};
    std::vector<double> z(t.cell_count());
    for (std::int64_t r = 0; r < rows; ++r)
        for (std::int64_t c = 0; c < cols; ++c)
            z[static_cast<std::size_t>(r * cols + c)] = height(r, c);
    return Dem(t, std::move(z));
}

Dem flat_dem(std::int64_t n, double value, double pixel)
{
    return make_dem(n, n, pixel, 0.0, static_cast<double>(n) * pixel,
                    [value](std::int64_t, std::int64_t) { return value; });
}

Dem wall_dem(std::int64_t n, std::int64_t wall_col, double height, double pixel)
{
    return make_dem(n, n, pixel, 0.0, static_cast<double>(n) * pixel,
                    [=](std::int64_t, std::int64_t c) { return c == wall_col ? height : 0.0; });
}

Dem smooth_random_dem(std::int64_t n, std::uint64_t seed, int hills, double pixel)
{
    std::mt19937_64 rng(seed);
    const double size = static_cast<double>(n);
    std::uniform_real_distribution<double> pos(0.0, size);
    std::uniform_real_distribution<double> sigma(size / 16.0, size / 5.0);
    std::uniform_real_distribution<double> amp(-15.0, 30.0);
    struct Hill {
        double x, y, s, a;
    };
    std::vector<Hill> hs;
    for (int i = 0; i < hills; ++i)
        hs.push_back({pos(rng), pos(rng), sigma(rng), amp(rng)});
    return make_dem(n, n, pixel, 0.0, size * pixel, [&](std::int64_t r, std::int64_t c) {
        const double x = static_cast<double>(c) + 0.5;
        const double y = static_cast<double>(r) + 0.5;
        double z = 0.0;
        for (const auto& h : hs) {
            const double d2 = (x - h.x) * (x - h.x) + (y - h.y) * (y - h.y);
            z += h.a * std::exp(-d2 / (2.0 * h.s * h.s));
        }
        return std::round(z * 1024.0) / 1024.0;
    });
}

Viewpoint viewpoint_at(const Dem& dem, std::int64_t row, std::int64_t col, double eye_height,
                       double radius_m, FovSector s)
{
    Viewpoint vp;
    const auto c = dem.transform().cell_center(row, col);
    vp.pose.easting = c.easting;
    vp.pose.northing = c.northing;
    vp.observer_height_m = eye_height;
    vp.radius_m = radius_m;
    vp.sector = s;
    vp.image_id = "test";
    return vp;
}

FovSector sector(double left, double right, double lower, double upper)
{
    FovSector s;
    s.azimuth_left_deg = left;
    s.azimuth_right_deg = right;
    s.elevation_lower_deg = lower;
    s.elevation_upper_deg = upper;
    s.full_circle = left == right;
    return s;
}

double bearing_deg(double dx, double dy)
{
    double a = std::atan2(dx, -dy) * 180.0 / std::numbers::pi;
    if (a < 0.0)
        a += 360.0;
    return a >= 360.0 ? 0.0 : a;
}

bool on_arc(double az, double left, double right)
{
    if (left == right)
        return true;
    auto wrap = [](double a) {
        a = std::fmod(a, 360.0);
        return a < 0.0 ? a + 360.0 : a;
    };
    const double width = wrap(right - left);
    const double off = wrap(az - left);
    return off <= width + 1e-7 || off >= 360.0 - 1e-7;
}

double bilinear(const Dem& dem, double x, double y)
{
    const auto& t = dem.transform();
    const double cx = std::clamp(x - 0.5, 0.0, static_cast<double>(t.cols - 1));
    const double cy = std::clamp(y - 0.5, 0.0, static_cast<double>(t.rows - 1));
    const auto c0 = static_cast<std::int64_t>(std::floor(cx));
    const auto r0 = static_cast<std::int64_t>(std::floor(cy));
    const auto c1 = std::min(c0 + 1, t.cols - 1);
    const auto r1 = std::min(r0 + 1, t.rows - 1);
    const double fx = cx - static_cast<double>(c0);
    const double fy = cy - static_cast<double>(r0);
    const double top = dem.at(r0, c0) * (1.0 - fx) + dem.at(r0, c1) * fx;
    const double bottom = dem.at(r1, c0) * (1.0 - fx) + dem.at(r1, c1) * fx;
    return top * (1.0 - fy) + bottom * fy;
}

double dense_max_slope(const Dem& dem, double ox, double oy, double eye, double tx, double ty,
                       int per_px)
{
    const double pixel = dem.transform().pixel_size;
    const double d = std::hypot(tx - ox, ty - oy);
    double best = -std::numeric_limits<double>::infinity();
    for (int j = 1;; ++j) {
        const double s = static_cast<double>(j) / per_px;
        if (s >= d)
            break;
        const double f = s / d;
        const double z = bilinear(dem, ox + (tx - ox) * f, oy + (ty - oy) * f);
        best = std::max(best, (z - eye) / (s * pixel));
    }
    return best;
}

bool dense_los(const Dem& dem, double ox, double oy, double eye, double tx, double ty,
               double target_z, int per_px)
{
    const double d_m = std::hypot(tx - ox, ty - oy) * dem.transform().pixel_size;
    if (d_m == 0.0)
        return true;
    return dense_max_slope(dem, ox, oy, eye, tx, ty, per_px) < (target_z - eye) / d_m;
}

std::vector<std::vector<bool>> flat_oracle(std::int64_t n, std::int64_t orow, std::int64_t ocol,
                                           double eye, double radius_px, const FovSector& s)
{
    std::vector<std::vector<bool>> out(static_cast<std::size_t>(n),
                                       std::vector<bool>(static_cast<std::size_t>(n), false));
    for (std::int64_t r = 0; r < n; ++r) {
        for (std::int64_t c = 0; c < n; ++c) {
            const double dx = static_cast<double>(c - ocol);
            const double dy = static_cast<double>(r - orow);
            const double d = std::hypot(dx, dy);
            bool v;
            if (d == 0.0) {
                v = s.elevation_lower_deg <= 0.0 && s.elevation_upper_deg >= 0.0;
            } else {
                const double elev = std::atan2(-eye, d) * 180.0 / std::numbers::pi;
                v = d <= radius_px && on_arc(bearing_deg(dx, dy), s.azimuth_left_deg,
                                             s.azimuth_right_deg) &&
                    elev >= s.elevation_lower_deg - 1e-7 && elev <= s.elevation_upper_deg + 1e-7;
            }
            out[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = v;
        }
    }
    return out;
}

std::vector<std::vector<bool>> visible_grid(const VisibilityRaster& vs, const Dem& dem)
{
    const auto& full = dem.transform();
    const auto off = lattice_offset(full, vs.transform);
    std::vector<std::vector<bool>> out(static_cast<std::size_t>(full.rows),
                                       std::vector<bool>(static_cast<std::size_t>(full.cols), false));
    for (std::int64_t r = 0; r < vs.transform.rows; ++r)
        for (std::int64_t c = 0; c < vs.transform.cols; ++c)
            out[static_cast<std::size_t>(r + off->rows)][static_cast<std::size_t>(c + off->cols)] =
                vs.at(r, c) == Visibility::Visible;
    return out;
}

namespace {

struct TiffBuilder {
    std::vector<std::uint8_t> bytes;

    void u16(std::uint16_t v)
    {
        bytes.push_back(static_cast<std::uint8_t>(v & 0xFF));
        bytes.push_back(static_cast<std::uint8_t>(v >> 8));
    }
    void u32(std::uint32_t v)
    {
        for (int i = 0; i < 4; ++i)
            bytes.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
    }
    void f64(double v)
    {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        for (int i = 0; i < 8; ++i)
            bytes.push_back(static_cast<std::uint8_t>((bits >> (8 * i)) & 0xFF));
    }
};

} // namespace

std::vector<std::uint8_t> tiff_bytes(std::int64_t rows, std::int64_t cols,
                                     const std::vector<double>& values, double pixel, double x0,
                                     double y0, const std::string& nodata)
{
    constexpr std::uint16_t kShort = 3, kLong = 4, kAscii = 2, kDouble = 12;
    struct Entry {
        std::uint16_t tag, type;
        std::uint32_t count, value;
    };

    const int n_entries = nodata.empty() ? 12 : 13;
    const std::uint32_t ifd_size = 2 + 12 * static_cast<std::uint32_t>(n_entries) + 4;
    const std::uint32_t scale_at = 8 + ifd_size;
    const std::uint32_t tie_at = scale_at + 24;
    const std::uint32_t nodata_at = tie_at + 48;
    const auto nodata_len = static_cast<std::uint32_t>(nodata.size() + 1);
    std::uint32_t data_at = nodata_at + (nodata.empty() ? 0 : nodata_len);
    data_at += data_at % 8 ? 8 - data_at % 8 : 0;
    const auto data_len = static_cast<std::uint32_t>(rows * cols * 8);

    std::vector<Entry> entries = {
        {256, kLong, 1, static_cast<std::uint32_t>(cols)},
        {257, kLong, 1, static_cast<std::uint32_t>(rows)},
        {258, kShort, 1, 64},
        {259, kShort, 1, 1},
        {262, kShort, 1, 1},
        {273, kLong, 1, data_at},
        {277, kShort, 1, 1},
        {278, kLong, 1, static_cast<std::uint32_t>(rows)},
        {279, kLong, 1, data_len},
        {339, kShort, 1, 3},
        {33550, kDouble, 3, scale_at},
        {33922, kDouble, 6, tie_at},
    };
    if (!nodata.empty())
        entries.push_back({42113, kAscii, nodata_len, nodata_at});

    TiffBuilder b;
    b.bytes = {'I', 'I', 42, 0};
    b.u32(8);
    b.u16(static_cast<std::uint16_t>(entries.size()));
    for (const auto& e : entries) {
        b.u16(e.tag);
        b.u16(e.type);
        b.u32(e.count);
        if (e.type == kShort) {
            b.u16(static_cast<std::uint16_t>(e.value));
            b.u16(0);
        } else {
            b.u32(e.value);
        }
    }
    b.u32(0);
    for (double v : {pixel, pixel, 0.0})
        b.f64(v);
    for (double v : {0.0, 0.0, 0.0, x0, y0, 0.0})
        b.f64(v);
    if (!nodata.empty()) {
        b.bytes.insert(b.bytes.end(), nodata.begin(), nodata.end());
        b.bytes.push_back(0);
    }
    while (b.bytes.size() < data_at)
        b.bytes.push_back(0);
    for (double v : values)
        b.f64(v);
    return b.bytes;
}

} // namespace testsupport
