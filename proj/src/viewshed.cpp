#include "marscoloc/viewshed.hpp"

#include "marscoloc/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <thread>

namespace marscoloc {

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;
constexpr double kStepPx = 0.5;
constexpr double kTailPx = 2.0;
constexpr double kRayDensity = 2.0;

// Azimuth of a pixel-space offset (x east, y south), clockwise from north.
// Axis-aligned offsets are returned exactly.
double azimuth_deg(double dx, double dy)
{
    if (dx == 0.0)
        return dy <= 0.0 ? 0.0 : 180.0;
    if (dy == 0.0)
        return dx > 0.0 ? 90.0 : 270.0;
    return normalize_azimuth(std::atan2(dx, -dy) * kRadToDeg);
}

// Everything about the observer that every cell test needs, in pixel units
// with heights relative to the observer cell's stored elevation.
struct Observer {
    const Dem* dem = nullptr;
    double x = 0.0;
    double y = 0.0;
    std::int64_t row = 0;
    std::int64_t col = 0;
    double reference = 0.0;
    double eye = 0.0;
    double pixel = 1.0;
    double radius_m = 0.0;
    FovSector sector;
    double drop_per_m2 = 0.0;

    double drop(double d_m) const { return d_m * d_m * drop_per_m2; }
};

Observer make_observer(const Dem& dem, const Viewpoint& vp, Curvature curvature,
                       double planet_radius_m)
{
    const auto& t = dem.transform();
    const auto p = t.map_to_pixel(vp.pose.easting, vp.pose.northing);
    if (!p.in_bounds)
        throw Error(ErrorCode::OutOfBounds, "viewpoint '" + vp.image_id + "' lies outside the DEM");
    if (!(vp.radius_m > 0.0))
        throw Error(ErrorCode::InvalidRadius, "viewshed radius must be positive");

    Observer o;
    o.dem = &dem;
    o.x = p.col;
    o.y = p.row;
    o.col = std::min<std::int64_t>(static_cast<std::int64_t>(p.col), t.cols - 1);
    o.row = std::min<std::int64_t>(static_cast<std::int64_t>(p.row), t.rows - 1);
    if (!dem.valid(o.row, o.col))
        throw Error(ErrorCode::NodataObserver, "viewpoint '" + vp.image_id + "' sits on nodata");
    o.reference = dem.at(o.row, o.col);
    const double ground = dem.sample_pixel(o.x, o.y, o.reference);
    if (std::isnan(ground))
        throw Error(ErrorCode::NodataObserver, "viewpoint '" + vp.image_id + "' sits on nodata");
    o.eye = ground + vp.observer_height_m;
    o.pixel = t.pixel_size;
    o.radius_m = vp.radius_m;
    o.sector = vp.sector;
    if (curvature == Curvature::Mars) {
        if (!(planet_radius_m > 0.0))
            throw Error(ErrorCode::InvalidArgument, "planet radius must be positive");
        o.drop_per_m2 = 1.0 / (2.0 * planet_radius_m);
    }
    return o;
}

bool in_band(const FovSector& s, double elevation_deg)
{
    return elevation_deg >= s.elevation_lower_deg - kAngleTolerance &&
           elevation_deg <= s.elevation_upper_deg + kAngleTolerance;
}

// Geometry of one target relative to the observer.
struct Target {
    double dx = 0.0;
    double dy = 0.0;
    double d_px = 0.0;
    double slope = 0.0;
};

// Sector, radius and elevation-band gates. Returns false when the target is
// ruled out before any terrain is consulted.
bool admissible(const Observer& o, double tx, double ty, double target_rel, Target& out)
{
    out.dx = tx - o.x;
    out.dy = ty - o.y;
    out.d_px = std::hypot(out.dx, out.dy);
    const double d_m = out.d_px * o.pixel;
    if (d_m > o.radius_m)
        return false;
    if (d_m == 0.0) {
        out.slope = 0.0;
        return in_band(o.sector, 0.0);
    }
    if (!in_sector(o.sector, azimuth_deg(out.dx, out.dy)))
        return false;
    out.slope = (target_rel - o.drop(d_m) - o.eye) / d_m;
    return in_band(o.sector, std::atan(out.slope) * kRadToDeg);
}

// Terrain slope of the k-th half-pixel sample along direction (ux, uy).
double sample_slope(const Observer& o, double ux, double uy, std::int64_t k)
{
    const double s_px = static_cast<double>(k) * kStepPx;
    const double x = o.x + ux * s_px;
    const double y = o.y + uy * s_px;
    const auto& t = o.dem->transform();
    const auto col = std::clamp<std::int64_t>(static_cast<std::int64_t>(std::floor(x)), 0, t.cols - 1);
    const auto row = std::clamp<std::int64_t>(static_cast<std::int64_t>(std::floor(y)), 0, t.rows - 1);
    if (!o.dem->valid(row, col))
        return std::numeric_limits<double>::infinity();
    const double z = o.dem->sample_pixel(x, y, o.reference);
    if (std::isnan(z))
        return std::numeric_limits<double>::infinity();
    const double s_m = s_px * o.pixel;
    return (z - o.drop(s_m) - o.eye) / s_m;
}

bool unobstructed(const Observer& o, const Target& t)
{
    if (t.d_px == 0.0)
        return true;
    const double ux = t.dx / t.d_px;
    const double uy = t.dy / t.d_px;
    for (std::int64_t k = 1; static_cast<double>(k) * kStepPx < t.d_px; ++k) {
        if (!(sample_slope(o, ux, uy, k) < t.slope))
            return false;
    }
    return true;
}

// Largest sample slope on the straight segment to a target, from sample
// `k_first` up to the target.
double tail_max(const Observer& o, double dx, double dy, double d_px, std::int64_t k_first)
{
    const double ux = dx / d_px;
    const double uy = dy / d_px;
    double best = -std::numeric_limits<double>::infinity();
    for (auto k = k_first; static_cast<double>(k) * kStepPx < d_px; ++k)
        best = std::max(best, sample_slope(o, ux, uy, k));
    return best;
}

struct Window {
    std::int64_t row0, col0, rows, cols;
};

Window radius_window(const Observer& o, const GeoTransform& t)
{
    const double r_px = o.radius_m / o.pixel;
    const auto row0 = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::floor(o.y - r_px)));
    const auto col0 = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::floor(o.x - r_px)));
    const auto row1 = std::min<std::int64_t>(t.rows, static_cast<std::int64_t>(std::ceil(o.y + r_px)) + 1);
    const auto col1 = std::min<std::int64_t>(t.cols, static_cast<std::int64_t>(std::ceil(o.x + r_px)) + 1);
    return {row0, col0, row1 - row0, col1 - col0};
}

template <typename Fn>
void parallel_for(unsigned workers, std::int64_t n, Fn&& fn)
{
    workers = std::max(1u, workers);
    if (workers == 1 || n < 2) {
        fn(std::int64_t{0}, n);
        return;
    }
    std::vector<std::jthread> pool;
    const std::int64_t chunk = (n + workers - 1) / workers;
    for (std::int64_t begin = 0; begin < n; begin += chunk)
        pool.emplace_back([&fn, begin, end = std::min(n, begin + chunk)] { fn(begin, end); });
}

void exact_pass(const Observer& o, const Window& w, unsigned workers, VisibilityRaster& out,
                double target_height)
{
    const Dem& dem = *o.dem;
    parallel_for(workers, w.rows, [&](std::int64_t r_begin, std::int64_t r_end) {
        for (std::int64_t wr = r_begin; wr < r_end; ++wr) {
            const auto r = w.row0 + wr;
            for (std::int64_t wc = 0; wc < w.cols; ++wc) {
                const auto c = w.col0 + wc;
                if (!dem.valid(r, c)) {
                    out.at(wr, wc) = Visibility::Nodata;
                    continue;
                }
                Target t;
                bool visible = false;
                if (r == o.row && c == o.col) {
                    visible = in_band(o.sector, 0.0);
                } else {
                    const double tx = static_cast<double>(c) + 0.5;
                    const double ty = static_cast<double>(r) + 0.5;
                    visible = admissible(o, tx, ty, dem.at(r, c) - o.reference + target_height, t) &&
                              unobstructed(o, t);
                }
                out.at(wr, wc) = visible ? Visibility::Visible : Visibility::Hidden;
            }
        }
    });
}

void sweep_pass(const Observer& o, const Window& w, unsigned workers, VisibilityRaster& out,
                double target_height)
{
    const Dem& dem = *o.dem;
    // Rays are spaced for the farthest DEM corner rather than the radius so
    // that the ray set, and hence the result, does not change with radius.
    const auto& t = dem.transform();
    double reach_px = 1.0;
    for (double cx : {0.0, static_cast<double>(t.cols)})
        for (double cy : {0.0, static_cast<double>(t.rows)})
            reach_px = std::max(reach_px, std::hypot(cx - o.x, cy - o.y));
    const double max_step = std::atan(0.5 / reach_px) / kRayDensity;
    const auto n_rays = static_cast<std::int64_t>(std::ceil(2.0 * std::numbers::pi / max_step));
    const double step = 2.0 * std::numbers::pi / static_cast<double>(n_rays);

    struct Candidate {
        std::size_t cell;
        double dx;
        double dy;
        double d_px;
        double slope;
    };

    // Gate every cell, then bucket the survivors by their nearest ray.
    std::vector<Candidate> candidates;
    std::vector<std::int64_t> ray_of;
    for (std::int64_t wr = 0; wr < w.rows; ++wr) {
        const auto r = w.row0 + wr;
        for (std::int64_t wc = 0; wc < w.cols; ++wc) {
            const auto c = w.col0 + wc;
            const auto cell = static_cast<std::size_t>(wr * w.cols + wc);
            if (!dem.valid(r, c)) {
                out.cells[cell] = Visibility::Nodata;
                continue;
            }
            if (r == o.row && c == o.col) {
                out.cells[cell] = in_band(o.sector, 0.0) ? Visibility::Visible : Visibility::Hidden;
                continue;
            }
            Target t;
            const double tx = static_cast<double>(c) + 0.5;
            const double ty = static_cast<double>(r) + 0.5;
            if (!admissible(o, tx, ty, dem.at(r, c) - o.reference + target_height, t))
                continue;
            double bearing = std::atan2(t.dx, -t.dy);
            if (bearing < 0.0)
                bearing += 2.0 * std::numbers::pi;
            const auto ray = static_cast<std::int64_t>(std::llround(bearing / step)) % n_rays;
            candidates.push_back({cell, t.dx, t.dy, t.d_px, t.slope});
            ray_of.push_back(ray);
        }
    }

    std::vector<std::size_t> start(static_cast<std::size_t>(n_rays) + 1, 0);
    for (auto ray : ray_of)
        ++start[static_cast<std::size_t>(ray) + 1];
    for (std::size_t k = 1; k < start.size(); ++k)
        start[k] += start[k - 1];
    std::vector<Candidate> bucketed(candidates.size());
    {
        auto fill = start;
        for (std::size_t k = 0; k < candidates.size(); ++k)
            bucketed[fill[static_cast<std::size_t>(ray_of[k])]++] = candidates[k];
    }

    parallel_for(workers, n_rays, [&](std::int64_t ray_begin, std::int64_t ray_end) {
        for (auto ray = ray_begin; ray < ray_end; ++ray) {
            const auto first = bucketed.begin() + static_cast<std::ptrdiff_t>(start[static_cast<std::size_t>(ray)]);
            const auto last = bucketed.begin() + static_cast<std::ptrdiff_t>(start[static_cast<std::size_t>(ray) + 1]);
            if (first == last)
                continue;
            std::sort(first, last, [](const Candidate& a, const Candidate& b) {
                return a.d_px < b.d_px || (a.d_px == b.d_px && a.cell < b.cell);
            });
            const double angle = static_cast<double>(ray) * step;
            const double ux = std::sin(angle);
            const double uy = -std::cos(angle);
            double running_max = -std::numeric_limits<double>::infinity();
            std::int64_t k = 1;
            for (auto it = first; it != last; ++it) {
                const double reach = it->d_px - kTailPx;
                for (; static_cast<double>(k) * kStepPx <= reach; ++k)
                    running_max = std::max(running_max, sample_slope(o, ux, uy, k));
                const bool visible = it->slope > running_max &&
                                     it->slope > tail_max(o, it->dx, it->dy, it->d_px, k);
                out.cells[it->cell] = visible ? Visibility::Visible : Visibility::Hidden;
            }
        }
    });
}

} // namespace

ViewshedMode parse_mode(const std::string& name)
{
    if (name == "exact")
        return ViewshedMode::Exact;
    if (name == "sweep")
        return ViewshedMode::Sweep;
    throw Error(ErrorCode::Config, "unknown viewshed mode '" + name + "'");
}

Curvature parse_curvature(const std::string& name)
{
    if (name == "off")
        return Curvature::Off;
    if (name == "mars")
        return Curvature::Mars;
    throw Error(ErrorCode::Config, "unknown curvature setting '" + name + "'");
}

bool in_sector(const FovSector& sector, double azimuth_deg)
{
    if (sector.full_circle)
        return true;
    const double width = normalize_azimuth(sector.azimuth_right_deg - sector.azimuth_left_deg);
    const double offset = normalize_azimuth(azimuth_deg - sector.azimuth_left_deg);
    return offset <= width + kAngleTolerance || offset >= 360.0 - kAngleTolerance;
}

bool line_of_sight(const Dem& dem, const Viewpoint& viewpoint, double target_easting,
                   double target_northing, double target_height_m, Curvature curvature,
                   double planet_radius_m)
{
    const Observer o = make_observer(dem, viewpoint, curvature, planet_radius_m);
    const auto p = dem.transform().map_to_pixel(target_easting, target_northing);
    if (!p.in_bounds)
        throw Error(ErrorCode::OutOfBounds, "target lies outside the DEM");
    const double ground = dem.sample_pixel(p.col, p.row, o.reference);
    if (std::isnan(ground))
        throw Error(ErrorCode::NodataNeighborhood, "no elevation data at target");
    Target t;
    return admissible(o, p.col, p.row, ground + target_height_m, t) && unobstructed(o, t);
}

VisibilityRaster compute_viewshed(const Dem& dem, const ViewshedParams& params)
{
    const auto& s = params.viewpoint.sector;
    if (!(s.elevation_upper_deg > s.elevation_lower_deg) ||
        (!s.full_circle && s.azimuth_left_deg == s.azimuth_right_deg))
        throw Error(ErrorCode::EmptySector, "viewpoint '" + params.viewpoint.image_id +
                                                "' has a zero-width field of view");
    if (!(params.target_height_m >= 0.0))
        throw Error(ErrorCode::InvalidArgument, "target height must be >= 0");

    const Observer o = make_observer(dem, params.viewpoint, params.curvature, params.planet_radius_m);
    const Window w = radius_window(o, dem.transform());
    VisibilityRaster out(dem.transform().window(w.row0, w.col0, w.rows, w.cols));

    if (params.mode == ViewshedMode::Exact)
        exact_pass(o, w, params.workers, out, params.target_height_m);
    else
        sweep_pass(o, w, params.workers, out, params.target_height_m);

    out.provenance = params.viewpoint.image_id;
    return out;
}

} // namespace marscoloc
