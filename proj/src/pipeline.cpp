#include "marscoloc/error.hpp"
#include "marscoloc/pipeline.hpp"

#include <cstdio>
#include <fstream>
#include <set>

namespace marscoloc {

namespace fs = std::filesystem;

namespace {

std::string safe_stem(const std::string& id, const std::string& fallback)
{
    std::string stem = id.empty() ? fallback : id;
    for (char& c : stem) {
        const bool ok = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') ||
                        c == '_' || c == '-' || c == '.';
        if (!ok)
            c = '_';
    }
    return stem.empty() ? "viewpoint" : stem;
}

// One output stem per input, unique within the batch.
std::vector<std::string> unique_stems(const std::vector<std::string>& wanted)
{
    std::set<std::string> used;
    std::vector<std::string> out;
    for (const auto& w : wanted) {
        auto stem = w;
        for (int n = 2; used.contains(stem); ++n)
            stem = w + "_" + std::to_string(n);
        used.insert(stem);
        out.push_back(stem);
    }
    return out;
}

void record_failure(ColocationResult& r, ErrorCode code, const std::string& message)
{
    r.error_code = code;
    r.error = message;
}

template <typename F>
void guarded(ColocationResult& r, F&& body)
{
    try {
        body();
    } catch (const Error& e) {
        record_failure(r, e.code(), e.what());
    } catch (const std::exception& e) {
        record_failure(r, ErrorCode::Io, e.what());
    }
}

void append(std::vector<std::string>& to, const std::vector<std::string>& from)
{
    to.insert(to.end(), from.begin(), from.end());
}

Dem load_config_dem(const PipelineConfig& config)
{
    if (config.dem.empty())
        throw Error(ErrorCode::Config, "no DEM configured");
    if (!fs::exists(config.dem))
        throw Error(ErrorCode::Config, "DEM not found: " + config.dem.string());
    return load_dem(config.dem);
}

LocalizationTable load_config_table(const PipelineConfig& config)
{
    if (config.places_csv.empty())
        throw Error(ErrorCode::Config, "no localization CSV configured");
    if (!fs::exists(config.places_csv))
        throw Error(ErrorCode::Config, "localization CSV not found: " + config.places_csv.string());
    return load_table_file(config.places_csv.string(), config.schema());
}

void require_labels(const std::vector<std::string>& label_paths)
{
    if (label_paths.empty())
        throw Error(ErrorCode::EmptyInput, "no label files given");
}

void viewpoint_for_label(const PipelineConfig& config, const LocalizationTable& table,
                         ColocationResult& r)
{
    const auto meta = read_label_file(r.label_path, config.profile());
    r.image_id = meta.product_id;
    append(r.warnings, meta.warnings);
    const auto pose = table.lookup(meta.rmc, config.fallback);
    append(r.warnings, pose.provenance.warnings);
    auto vp = build_viewpoint(pose, meta.pointing, config.observer_height(), config.radius_m,
                              meta.product_id);
    append(r.warnings, vp.warnings);
    r.csv_row = viewpoint_csv_row(vp);
    r.viewpoint = std::move(vp);
}

void viewshed_for_result(const PipelineConfig& config, const Dem& dem, const std::string& stem,
                         ColocationResult& r)
{
    ViewshedParams params;
    params.viewpoint = *r.viewpoint;
    params.mode = config.mode;
    params.target_height_m = config.target_height_m;
    params.curvature = config.curvature;
    params.planet_radius_m = config.planet_radius_m;
    params.workers = config.workers;
    const auto vs = compute_viewshed(dem, params);
    write_outputs(vs, config.out_dir, stem, config.format, r);
}

void write_batch_csv(const PipelineConfig& config, const std::vector<ColocationResult>& results)
{
    std::vector<Viewpoint> ok;
    for (const auto& r : results) {
        if (r.ok() && r.viewpoint)
            ok.push_back(*r.viewpoint);
    }
    if (!ok.empty())
        export_viewpoint_csv(ok, config.out_dir / "viewpoints.csv");
}

} // namespace

void write_outputs(const VisibilityRaster& vs, const fs::path& out_dir, const std::string& stem,
                   RasterFormat format, ColocationResult& result)
{
    const auto raster_path = out_dir / (stem + extension(format));
    const auto geojson_path = out_dir / (stem + ".geojson");
    write_visibility(vs, raster_path, format);

    const auto doc = polygonize(vs);
    std::ofstream out(geojson_path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error(ErrorCode::Io, "cannot write " + geojson_path.string());
    out << doc.dump() << '\n';
    if (!out)
        throw Error(ErrorCode::Io, "write failed for " + geojson_path.string());

    result.raster_path = raster_path;
    result.geojson_path = geojson_path;
}

std::vector<ColocationResult> build_viewpoints(const PipelineConfig& config,
                                               const std::vector<std::string>& label_paths)
{
    validate(config);
    require_labels(label_paths);
    const auto table = load_config_table(config);

    std::vector<ColocationResult> results(label_paths.size());
    for (std::size_t i = 0; i < label_paths.size(); ++i) {
        auto& r = results[i];
        r.label_path = label_paths[i];
        guarded(r, [&] { viewpoint_for_label(config, table, r); });
    }
    return results;
}

std::vector<ColocationResult> colocate(const PipelineConfig& config,
                                       const std::vector<std::string>& label_paths)
{
    validate(config);
    require_labels(label_paths);
    const auto dem = load_config_dem(config);
    const auto table = load_config_table(config);
    fs::create_directories(config.out_dir);

    std::vector<ColocationResult> results(label_paths.size());
    for (std::size_t i = 0; i < label_paths.size(); ++i) {
        auto& r = results[i];
        r.label_path = label_paths[i];
        guarded(r, [&] { viewpoint_for_label(config, table, r); });
    }

    std::vector<std::string> wanted;
    for (const auto& r : results)
        wanted.push_back(safe_stem(r.image_id, fs::path(r.label_path).stem().string()));
    const auto stems = unique_stems(wanted);

    for (std::size_t i = 0; i < results.size(); ++i) {
        auto& r = results[i];
        if (r.ok())
            guarded(r, [&] { viewshed_for_result(config, dem, stems[i], r); });
    }
    write_batch_csv(config, results);
    return results;
}

std::vector<ColocationResult> viewshed_from_viewpoints(const PipelineConfig& config,
                                                       const std::vector<Viewpoint>& viewpoints)
{
    validate(config);
    if (viewpoints.empty())
        throw Error(ErrorCode::EmptyInput, "no viewpoints given");
    const auto dem = load_config_dem(config);
    fs::create_directories(config.out_dir);

    std::vector<std::string> wanted;
    for (std::size_t i = 0; i < viewpoints.size(); ++i)
        wanted.push_back(safe_stem(viewpoints[i].image_id, "viewpoint_" + std::to_string(i + 1)));
    const auto stems = unique_stems(wanted);

    std::vector<ColocationResult> results(viewpoints.size());
    for (std::size_t i = 0; i < viewpoints.size(); ++i) {
        auto& r = results[i];
        r.image_id = viewpoints[i].image_id;
        r.viewpoint = viewpoints[i];
        r.csv_row = viewpoint_csv_row(viewpoints[i]);
        guarded(r, [&] { viewshed_for_result(config, dem, stems[i], r); });
    }
    return results;
}

int exit_status(const std::vector<ColocationResult>& results)
{
    std::size_t failed = 0;
    for (const auto& r : results)
        failed += r.ok() ? 0 : 1;
    if (results.empty() || failed == results.size())
        return 1;
    return failed == 0 ? 0 : 2;
}

OverlapOutputs overlap_command(const fs::path& raster_a, const fs::path& raster_b,
                               const std::optional<fs::path>& out_stem, RasterFormat format)
{
    const auto a = load_visibility(raster_a);
    const auto b = load_visibility(raster_b);
    OverlapOutputs out;
    out.report = overlap(a, b);
    if (out_stem) {
        if (out_stem->has_parent_path())
            fs::create_directories(out_stem->parent_path());
        ColocationResult sink;
        write_outputs(out.report.overlap, out_stem->parent_path(), out_stem->filename().string(),
                      format, sink);
        out.raster_path = sink.raster_path;
        out.geojson_path = sink.geojson_path;
    }
    return out;
}

std::string format_overlap_report(const OverlapReport& report)
{
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "area_a_m2 %.6f\narea_b_m2 %.6f\narea_overlap_m2 %.6f\njaccard %.6f\n",
                  report.area_a_m2, report.area_b_m2, report.area_overlap_m2, report.jaccard);
    return buf;
}

} // namespace marscoloc
