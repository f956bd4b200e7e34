// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include "support.hpp"

#include "marscoloc/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>

using namespace marscoloc;
using testsupport::fixture;
using testsupport::sector;
using testsupport::viewpoint_at;
using testsupport::visible_grid;
namespace fs = std::filesystem;

namespace {

using Grid = std::vector<std::vector<bool>>;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

VisibilityRaster run(const Dem& dem, const Viewpoint& vp, ViewshedMode mode)
{
    ViewshedParams p;
    p.viewpoint = vp;
    p.mode = mode;
    return compute_viewshed(dem, p);
}

std::size_t mismatches(const Grid& a, const Grid& b)
{
    std::size_t n = 0;
    for (std::size_t r = 0; r < a.size(); ++r)
        for (std::size_t c = 0; c < a[r].size(); ++c)
            n += a[r][c] != b[r][c] ? 1 : 0;
    return n;
}

bool subset(const Grid& a, const Grid& b)
{
    for (std::size_t r = 0; r < a.size(); ++r)
        for (std::size_t c = 0; c < a[r].size(); ++c)
            if (a[r][c] && !b[r][c])
                return false;
    return true;
}

std::size_t count(const Grid& g)
{
    std::size_t n = 0;
    for (const auto& row : g)
        for (bool b : row)
            n += b ? 1 : 0;
    return n;
}

// --------------------------------------------------------------- criteria

Outcome pointing_suite()
{
    std::mt19937_64 rng(20240601);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst_width = 0.0, worst_sym = 0.0;
    int wraps = 0, unclamped = 0;
    for (int i = 0; i < 10000; ++i) {
        CameraPointing p;
        p.hfov_deg = 0.01 + u(rng) * 359.98;
        p.vfov_deg = 0.01 + u(rng) * 179.99;
        p.elevation_deg = -90.0 + u(rng) * 180.0;
        // Every fourth draw straddles north.
        p.azimuth_deg = i % 4 == 0 ? std::fmod(360.0 + (u(rng) - 0.5) * p.hfov_deg, 360.0)
                                   : u(rng) * 360.0;
        const auto s = fov_bounds(p);
        if (s.azimuth_right_deg < s.azimuth_left_deg)
            ++wraps;
        double width = std::fmod(s.azimuth_right_deg - s.azimuth_left_deg, 360.0);
        if (width < 0.0)
            width += 360.0;
        worst_width = std::max(worst_width, std::fabs(width - p.hfov_deg));
        if (!s.elevation_clamped) {
            ++unclamped;
            worst_sym = std::max(worst_sym, std::fabs(s.elevation_upper_deg + s.elevation_lower_deg -
                                                      2.0 * p.elevation_deg));
        }
    }
    return {worst_width <= 1e-9 && worst_sym <= 1e-9 && wraps > 0,
            fmt("max width error %.3g deg, max symmetry error %.3g deg", worst_width, worst_sym) +
                ", " + std::to_string(wraps) + " wraparound, " + std::to_string(unclamped) +
                " unclamped"};
}

Outcome parser_fixtures()
{
    const auto msl = read_label_file(fixture("msl_mastcam_0056_1632.LBL").string(),
                                     builtin_profile(Mission::Curiosity));
    const auto m20 = read_label_file(fixture("m2020_zcam_0089.xml").string(),
                                     builtin_profile(Mission::Perseverance));

    std::vector<std::string> names = {"SITE", "DRIVE", "POSE", "ARM", "CHIMRA",
                                      "DRILL", "RSM", "HGA", "DRT", "IC"};
    std::vector<int> values = {56, 1632, 8, 0, 0, 0, 142, 90, 0, 0};
    std::vector<std::size_t> order(names.size());
    for (std::size_t i = 0; i < order.size(); ++i)
        order[i] = i;
    std::mt19937 rng(7);
    int permutations_ok = 0;
    const int trials = 1000;
    for (int t = 0; t < trials; ++t) {
        std::shuffle(order.begin(), order.end(), rng);
        std::string n = "ROVER_MOTION_COUNTER_NAME = (";
        std::string v = "ROVER_MOTION_COUNTER = (";
        for (std::size_t i = 0; i < order.size(); ++i) {
            n += (i ? ", \"" : "\"") + names[order[i]] + "\"";
            v += (i ? ", " : "") + std::to_string(values[order[i]]);
        }
        if (extract_rmc_pds3(pvl::parse(n + ")\n" + v + ")\nEND"),
                             builtin_profile(Mission::Curiosity)) == RmcIndex{56, 1632})
            ++permutations_ok;
    }
    const bool pass = msl.rmc == RmcIndex{56, 1632} && m20.rmc == RmcIndex{4, 48} &&
                      permutations_ok == trials;
    return {pass, "PDS3 (" + std::to_string(msl.rmc.site) + ", " + std::to_string(msl.rmc.drive) +
                      "), PDS4 (" + std::to_string(m20.rmc.site) + ", " +
                      std::to_string(m20.rmc.drive) + "), " + std::to_string(permutations_ok) +
                      "/" + std::to_string(trials) + " permutations"};
}

Outcome exact_analytic()
{
    const auto flat = testsupport::flat_dem(64, 0.0);
    const auto disk_vp = viewpoint_at(flat, 32, 32, 2.0, 20.0, full_sector());
    const auto disk = mismatches(visible_grid(run(flat, disk_vp, ViewshedMode::Exact), flat),
                                 testsupport::flat_oracle(64, 32, 32, 2.0, 20.0, full_sector()));
    const auto q = sector(0.0, 90.0);
    const auto quarter =
        mismatches(visible_grid(run(flat, viewpoint_at(flat, 32, 32, 2.0, 20.0, q), ViewshedMode::Exact), flat),
                   testsupport::flat_oracle(64, 32, 32, 2.0, 20.0, q));

    const double eye = 2.0;
    const auto wall = testsupport::wall_dem(64, 40, 10.0);
    const auto wall_vp = viewpoint_at(wall, 32, 32, eye, 20.0, full_sector());
    const auto got = visible_grid(run(wall, wall_vp, ViewshedMode::Exact), wall);
    Grid dense(64, std::vector<bool>(64, false));
    std::size_t shadow = 0;
    for (int r = 0; r < 64; ++r) {
        for (int c = 0; c < 64; ++c) {
            if (std::hypot(r - 32.0, c - 32.0) > 20.0)
                continue;
            dense[std::size_t(r)][std::size_t(c)] =
                testsupport::dense_los(wall, 32.5, 32.5, eye, c + 0.5, r + 0.5, wall.at(r, c));
            shadow += dense[std::size_t(r)][std::size_t(c)] ? 0 : 1;
        }
    }
    const auto wall_diff = mismatches(got, dense);
    return {disk == 0 && quarter == 0 && wall_diff == 0 && shadow > 0,
            "disk " + std::to_string(disk) + ", quarter-disk " + std::to_string(quarter) +
                ", wall " + std::to_string(wall_diff) + " mismatching cells (" +
                std::to_string(shadow) + " shadow cells)"};
}

double in_radius_agreement(const Grid& a, const Grid& b, double cr, double cc, double radius)
{
    std::size_t total = 0, same = 0;
    for (std::size_t r = 0; r < a.size(); ++r)
        for (std::size_t c = 0; c < a[r].size(); ++c) {
            if (std::hypot(double(r) - cr, double(c) - cc) > radius)
                continue;
            ++total;
            same += a[r][c] == b[r][c] ? 1 : 0;
        }
    return double(same) / double(total);
}

Outcome sweep_vs_exact()
{
    double worst = 1.0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto dem = testsupport::smooth_random_dem(128, seed);
        const auto vp = viewpoint_at(dem, 64, 64, 2.0, 60.0, full_sector());
        worst = std::min(worst, in_radius_agreement(visible_grid(run(dem, vp, ViewshedMode::Exact), dem),
                                                    visible_grid(run(dem, vp, ViewshedMode::Sweep), dem),
                                                    64.0, 64.0, 60.0));
    }
    std::size_t fixture_diff = 0;
    const auto flat = testsupport::flat_dem(64, 0.0);
    const auto wall = testsupport::wall_dem(64, 40, 10.0);
    for (const Dem* dem : {&flat, &wall}) {
        for (const auto& s : {full_sector(), sector(0.0, 90.0), sector(300.0, 60.0, -30.0, 10.0)}) {
            const auto vp = viewpoint_at(*dem, 32, 32, 2.0, 20.0, s);
            fixture_diff += mismatches(visible_grid(run(*dem, vp, ViewshedMode::Exact), *dem),
                                       visible_grid(run(*dem, vp, ViewshedMode::Sweep), *dem));
        }
    }
    return {worst >= 0.995 && fixture_diff == 0,
            fmt("worst agreement %.4f%% over 20 DEMs", 100.0 * worst) + ", " +
                std::to_string(fixture_diff) + " mismatches on flat and wall fixtures"};
}

Outcome monotonicity()
{
    int checks = 0, failures = 0;
    for (std::uint64_t seed = 101; seed <= 105; ++seed) {
        const auto dem = testsupport::smooth_random_dem(96, seed);
        const auto s = sector(30.0, 250.0, -50.0, 25.0);
        const auto base = viewpoint_at(dem, 48, 48, 2.0, 40.0, s);
        for (auto mode : {ViewshedMode::Exact, ViewshedMode::Sweep}) {
            const auto big = visible_grid(run(dem, base, mode), dem);
            auto small = base;
            small.radius_m = 25.0;
            auto narrow = base;
            narrow.sector = sector(60.0, 200.0, -50.0, 25.0);
            ++checks;
            failures += subset(visible_grid(run(dem, small, mode), dem), big) ? 0 : 1;
            ++checks;
            failures += subset(visible_grid(run(dem, narrow, mode), dem), big) ? 0 : 1;
        }
        const auto full = viewpoint_at(dem, 48, 48, 2.0, 40.0, full_sector());
        auto tall = full;
        tall.observer_height_m = 6.0;
        ++checks;
        failures += subset(visible_grid(run(dem, full, ViewshedMode::Exact), dem),
                           visible_grid(run(dem, tall, ViewshedMode::Exact), dem))
                        ? 0
                        : 1;
    }
    return {failures == 0, std::to_string(checks - failures) + "/" + std::to_string(checks) +
                               " subset checks hold (radius, sector, observer height)"};
}

Outcome terrain_offset()
{
    int identical = 0;
    const int dems = 5;
    for (std::uint64_t seed = 201; seed < 201 + dems; ++seed) {
        const auto dem = testsupport::smooth_random_dem(96, seed);
        auto z = dem.elevations();
        for (auto& v : z)
            v += 100.0;
        const Dem raised(dem.transform(), z);
        const auto vp = viewpoint_at(dem, 40, 50, 2.0, 45.0, sector(100.0, 340.0, -60.0, 30.0));
        const auto a = run(dem, vp, ViewshedMode::Exact);
        const auto b = run(raised, vp, ViewshedMode::Exact);
        identical += a.transform == b.transform && a.cells == b.cells ? 1 : 0;
    }
    return {identical == dems,
            std::to_string(identical) + "/" + std::to_string(dems) + " rasters bit-identical after +100 m"};
}

Outcome overlap_validation()
{
    const auto flat = testsupport::flat_dem(64, 0.0);
    auto vs_for = [&](double l, double r) {
        return run(flat, viewpoint_at(flat, 32, 32, 2.0, 20.0, sector(l, r)), ViewshedMode::Exact);
    };
    const auto a = vs_for(0.0, 90.0);
    const auto b = vs_for(60.0, 150.0);
    const auto shared = overlap(a, b);
    const auto wedge = testsupport::flat_oracle(64, 32, 32, 2.0, 20.0, sector(60.0, 90.0));
    const auto wedge_diff = mismatches(visible_grid(shared.overlap, flat), wedge);
    const bool wedge_area = shared.area_overlap_m2 == double(count(wedge));

    const auto self = overlap(a, a);

    // Same viewpoint: the observer's own cell is visible in every sector.
    const auto same_vp = overlap(a, vs_for(180.0, 270.0));
    const auto same_grid = visible_grid(same_vp.overlap, flat);
    const bool only_observer = count(same_grid) == 1 && same_grid[32][32];

    // Distinct viewpoints looking away from each other.
    const auto ne = run(flat, viewpoint_at(flat, 30, 34, 2.0, 20.0, sector(0.0, 90.0)), ViewshedMode::Exact);
    const auto sw = run(flat, viewpoint_at(flat, 34, 30, 2.0, 20.0, sector(180.0, 270.0)), ViewshedMode::Exact);
    const auto apart = overlap(ne, sw);

    const bool pass = wedge_diff == 0 && wedge_area && self.jaccard == 1.0 &&
                      self.overlap.cells == a.cells && only_observer &&
                      apart.area_overlap_m2 == 0.0 && apart.jaccard == 0.0;
    return {pass, "30 deg wedge " + std::to_string(wedge_diff) + " mismatching cells, " +
                      fmt("jaccard(x,x) %.6f, disjoint sectors overlap %.1f m2 (distinct viewpoints)",
                          self.jaccard, apart.area_overlap_m2) +
                      fmt(", %.1f m2 (shared viewpoint, observer cell only)", same_vp.area_overlap_m2)};
}

Outcome performance()
{
    const auto big = testsupport::smooth_random_dem(2048, 77, 40);
    const auto vp = viewpoint_at(big, 1024, 1024, 2.0, 800.0, sector(30.0, 150.0));
    const auto t0 = std::chrono::steady_clock::now();
    const auto sweep = run(big, vp, ViewshedMode::Sweep);
    const double sweep_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const auto small = testsupport::smooth_random_dem(256, 78);
    const auto vp2 = viewpoint_at(small, 128, 128, 2.0, 100.0, full_sector());
    const auto t1 = std::chrono::steady_clock::now();
    const auto exact = run(small, vp2, ViewshedMode::Exact);
    const double exact_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t1).count();

    const bool pass = sweep_s < 5.0 && exact_s < 10.0 && sweep.count(Visibility::Visible) > 0 &&
                      exact.count(Visibility::Visible) > 0;
    return {pass, fmt("sweep 2048x2048 r=800 120 deg %.2f s (limit 5), exact 256x256 r=100 %.2f s (limit 10)",
                      sweep_s, exact_s)};
}

PipelineConfig fixture_config(const testsupport::TempDir& dir)
{
    std::ostringstream out;
    out << "ncols 64\nnrows 64\nxllcorner 1000\nyllcorner 2000\ncellsize 1\nNODATA_value -9999\n";
    for (int r = 0; r < 64; ++r)
        for (int c = 0; c < 64; ++c)
            out << -4449 << (c == 63 ? '\n' : ' ');
    testsupport::write_file(dir / "dem.asc", out.str());
    auto c = default_config();
    c.dem = dir / "dem.asc";
    c.places_csv = fixture("places_synthetic.csv");
    c.out_dir = dir / "out";
    c.observer_height_m = 2.0;
    c.radius_m = 20.0;
    return c;
}

Outcome determinism()
{
    testsupport::TempDir dir;
    const auto config = fixture_config(dir);
    const std::vector<std::string> labels = {fixture("msl_mastcam_0056_1632.LBL").string(),
                                             fixture("msl_mastcam_0057_0010.LBL").string()};
    auto snapshot = [&] {
        const auto results = colocate(config, labels);
        std::vector<std::string> files;
        for (const auto& r : results) {
            if (!r.ok())
                return std::vector<std::string>{};
            files.push_back(testsupport::read_file(r.raster_path));
            files.push_back(testsupport::read_file(r.geojson_path));
        }
        files.push_back(testsupport::read_file(config.out_dir / "viewpoints.csv"));
        return files;
    };
    const auto first = snapshot();
    const auto second = snapshot();
    return {!first.empty() && first == second,
            std::to_string(first.size()) + " output files compared byte for byte across two runs"};
}

Outcome end_to_end()
{
    testsupport::TempDir dir;
    const auto config = fixture_config(dir);
    const auto results = colocate(config, {fixture("msl_mastcam_0056_1632.LBL").string()});
    if (results.size() != 1 || !results[0].ok())
        return {false, results.empty() ? "no result" : results[0].error};
    const auto& r = results[0];
    const bool files = fs::exists(r.raster_path) && fs::exists(r.geojson_path) &&
                       fs::exists(config.out_dir / "viewpoints.csv");
    const auto csv = testsupport::read_file(config.out_dir / "viewpoints.csv");
    const bool row = !r.csv_row.empty() && csv.find(r.csv_row + "\n") != std::string::npos;

    const auto vs = load_visibility(r.raster_path);
    const auto fc = nlohmann::json::parse(testsupport::read_file(r.geojson_path));
    double area = 0.0;
    for (const auto& f : fc["features"])
        for (const auto& ring : f["geometry"]["coordinates"])
            for (std::size_t i = 0; i + 1 < ring.size(); ++i)
                area += (ring[i][0].get<double>() * ring[i + 1][1].get<double>() -
                         ring[i + 1][0].get<double>() * ring[i][1].get<double>()) /
                        2.0;
    const double px = vs.transform.pixel_size;
    const double expected = double(vs.count(Visibility::Visible)) * px * px;
    const double rel = std::fabs(area - expected) / expected;
    return {files && row && rel <= 1e-6,
            fmt("GeoJSON area %.3f m2 vs %.3f m2 from cells (relative error %.2g)", area, expected, rel)};
}

} // namespace

int main()
{
    struct Criterion {
        int id;
        const char* name;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria = {
        {1, "pointing geometry, 10000 random draws", pointing_suite},
        {2, "label parser fixtures and name permutations", parser_fixtures},
        {3, "exact viewshed analytic suite", exact_analytic},
        {4, "sweep vs exact agreement", sweep_vs_exact},
        {5, "monotonicity on 5 random DEMs", monotonicity},
        {6, "terrain offset invariance", terrain_offset},
        {7, "overlap validation", overlap_validation},
        {8, "performance", performance},
        {9, "colocate determinism", determinism},
        {10, "end-to-end fixture", end_to_end},
    };
    const double limits[] = {1.0, 0.0, 5.0, 60.0, 30.0, 0.0, 0.0, 0.0, 0.0, 0.0};

    int failed = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const double limit = limits[c.id - 1];
        if (limit > 0.0 && s >= limit) {
            o.pass = false;
            o.detail += fmt("; over the %.0f s budget", limit);
        }
        failed += o.pass ? 0 : 1;
        std::printf("criterion %2d %s  %s: %s [%.2f s]\n", c.id, o.pass ? "PASS" : "FAIL", c.name,
                    o.detail.c_str(), s);
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", int(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
