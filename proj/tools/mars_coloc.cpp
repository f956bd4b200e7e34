#include "CLI11.hpp"

#include "marscoloc/error.hpp"
#include "marscoloc/pipeline.hpp"

#include <iostream>
#include <optional>

using namespace marscoloc;

namespace {

constexpr int kUsage = 64;

struct Flags {
    std::string config;
    std::string dem;
    std::string places_csv;
    std::string mission;
    std::optional<double> observer_height;
    std::optional<double> radius;
    std::string mode;
    std::string curvature;
    std::string out_dir;
    std::string format;
    std::string fallback;
    std::optional<unsigned> workers;
    bool force_fetch = false;
};

void add_common(CLI::App& cmd, Flags& f)
{
    cmd.add_option("--config", f.config, "JSON config file")->check(CLI::ExistingFile);
    cmd.add_option("--mission", f.mission, "curiosity or perseverance")
        ->check(CLI::IsMember({"curiosity", "perseverance"}, CLI::ignore_case));
}

void add_viewpoint_flags(CLI::App& cmd, Flags& f)
{
    cmd.add_option("--places-csv", f.places_csv, "rover localization table");
    cmd.add_option("--observer-height", f.observer_height, "mast height above ground (m)");
    cmd.add_option("--radius", f.radius, "viewshed radius (m)");
    cmd.add_option("--fallback", f.fallback, "exact or nearest-preceding")
        ->check(CLI::IsMember({"exact", "nearest-preceding"}));
}

void add_viewshed_flags(CLI::App& cmd, Flags& f)
{
    cmd.add_option("--dem", f.dem, "DEM (.asc or .tif)");
    cmd.add_option("--mode", f.mode, "exact or sweep")->check(CLI::IsMember({"exact", "sweep"}));
    cmd.add_option("--curvature", f.curvature, "off or mars")->check(CLI::IsMember({"off", "mars"}));
    cmd.add_option("--out-dir", f.out_dir, "output directory");
    cmd.add_option("--format", f.format, "ascii or geotiff")
        ->check(CLI::IsMember({"ascii", "geotiff"}));
    cmd.add_option("--workers", f.workers, "threads per viewshed")->check(CLI::PositiveNumber);
}

PipelineConfig resolve(const Flags& f)
{
    auto c = resolve_config(f.config.empty() ? std::nullopt
                                              : std::optional<std::filesystem::path>(f.config));
    if (!f.mission.empty()) c.mission = parse_mission(f.mission);
    if (!f.dem.empty()) c.dem = f.dem;
    if (!f.places_csv.empty()) c.places_csv = f.places_csv;
    if (f.observer_height) c.observer_height_m = *f.observer_height;
    if (f.radius) c.radius_m = *f.radius;
    if (!f.mode.empty()) c.mode = parse_mode(f.mode);
    if (!f.curvature.empty()) c.curvature = parse_curvature(f.curvature);
    if (!f.out_dir.empty()) c.out_dir = f.out_dir;
    if (!f.format.empty()) c.format = parse_raster_format(f.format);
    if (!f.fallback.empty()) c.fallback = parse_fallback(f.fallback);
    if (f.workers) c.workers = *f.workers;
    if (f.force_fetch) c.force_fetch = true;
    return c;
}

int report(const std::vector<ColocationResult>& results)
{
    for (const auto& r : results) {
        const auto& name = r.image_id.empty() ? r.label_path : r.image_id;
        for (const auto& w : r.warnings)
            std::cerr << "warning: " << name << ": " << w << '\n';
        if (!r.ok()) {
            std::cerr << "error: " << (r.label_path.empty() ? name : r.label_path) << ": "
                      << to_string(*r.error_code) << ": " << r.error << '\n';
            continue;
        }
        std::cout << name;
        if (!r.raster_path.empty())
            std::cout << ' ' << r.raster_path.string() << ' ' << r.geojson_path.string();
        std::cout << '\n';
    }
    return exit_status(results);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Co-locate rover mast-camera images with orbital maps"};
    app.require_subcommand(1);

    Flags f;
    std::vector<std::string> inputs;
    std::string csv_out;
    std::string raster_a, raster_b, overlap_out;

    auto* colocate_cmd = app.add_subcommand("colocate", "labels to viewsheds, GeoJSON and CSV");
    add_common(*colocate_cmd, f);
    add_viewpoint_flags(*colocate_cmd, f);
    add_viewshed_flags(*colocate_cmd, f);
    colocate_cmd->add_option("labels", inputs, "PDS3 or PDS4 label files")->required();

    auto* viewpoint_cmd = app.add_subcommand("viewpoint", "labels to a viewpoint CSV");
    add_common(*viewpoint_cmd, f);
    add_viewpoint_flags(*viewpoint_cmd, f);
    viewpoint_cmd->add_option("--out-dir", f.out_dir, "output directory");
    viewpoint_cmd->add_option("-o,--output", csv_out, "CSV path (default <out-dir>/viewpoints.csv)");
    viewpoint_cmd->add_option("labels", inputs, "PDS3 or PDS4 label files")->required();

    auto* viewshed_cmd = app.add_subcommand("viewshed", "viewpoint CSV to viewsheds");
    add_common(*viewshed_cmd, f);
    add_viewshed_flags(*viewshed_cmd, f);
    std::string viewpoint_csv;
    viewshed_cmd->add_option("viewpoints", viewpoint_csv, "viewpoint CSV")
        ->required()
        ->check(CLI::ExistingFile);

    auto* overlap_cmd = app.add_subcommand("overlap", "intersect two visibility rasters");
    overlap_cmd->add_option("raster_a", raster_a)->required()->check(CLI::ExistingFile);
    overlap_cmd->add_option("raster_b", raster_b)->required()->check(CLI::ExistingFile);
    overlap_cmd->add_option("-o,--output", overlap_out, "write <output>.asc/.tif and <output>.geojson");
    overlap_cmd->add_option("--format", f.format, "ascii or geotiff")
        ->check(CLI::IsMember({"ascii", "geotiff"}));

    auto* fetch_cmd = app.add_subcommand("fetch", "download products into the cache");
    add_common(*fetch_cmd, f);
    fetch_cmd->add_flag("--force-fetch", f.force_fetch, "re-download cached products");
    fetch_cmd->add_option("product_ids", inputs, "PDS product ids")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kUsage;
    }

    try {
        if (overlap_cmd->parsed()) {
            const auto format = f.format.empty() ? RasterFormat::AsciiGrid : parse_raster_format(f.format);
            std::optional<std::filesystem::path> stem;
            if (!overlap_out.empty())
                stem = overlap_out;
            const auto out = overlap_command(raster_a, raster_b, stem, format);
            std::cout << format_overlap_report(out.report);
            if (out.raster_path)
                std::cout << "wrote " << out.raster_path->string() << ' '
                          << out.geojson_path->string() << '\n';
            return 0;
        }

        const auto config = resolve(f);

        if (colocate_cmd->parsed())
            return report(colocate(config, inputs));

        if (viewpoint_cmd->parsed()) {
            auto results = build_viewpoints(config, inputs);
            std::vector<Viewpoint> ok;
            for (const auto& r : results) {
                if (r.ok())
                    ok.push_back(*r.viewpoint);
            }
            if (!ok.empty()) {
                std::filesystem::path path = csv_out;
                if (csv_out.empty()) {
                    std::filesystem::create_directories(config.out_dir);
                    path = config.out_dir / "viewpoints.csv";
                }
                export_viewpoint_csv(ok, path);
                std::cout << "wrote " << path.string() << '\n';
            }
            return report(results);
        }

        if (viewshed_cmd->parsed())
            return report(viewshed_from_viewpoints(config, read_viewpoint_csv(viewpoint_csv)));

        if (fetch_cmd->parsed()) {
            const auto& urls = config.fetch_urls.at(config.mission);
            std::size_t failed = 0;
            for (const auto& id : inputs) {
                try {
                    const auto p = fetch_product(id, config.mission, config.cache_dir, urls,
                                                 config.force_fetch);
                    std::cout << id << ' ' << p.label_path.string() << ' ' << p.image_path.string()
                              << (p.from_cache ? " (cached)" : "") << '\n';
                } catch (const Error& e) {
                    ++failed;
                    std::cerr << "error: " << id << ": " << to_string(e.code()) << ": " << e.what()
                              << '\n';
                }
            }
            return failed == 0 ? 0 : (failed == inputs.size() ? 1 : 2);
        }
    } catch (const Error& e) {
        std::cerr << "error: " << to_string(e.code()) << ": " << e.what() << '\n';
        return e.code() == ErrorCode::EmptyInput ? kUsage : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return kUsage;
}
