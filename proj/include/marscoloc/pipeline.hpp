#pragma once

#include "marscoloc/error.hpp"
#include "marscoloc/labels.hpp"
#include "marscoloc/localization.hpp"
#include "marscoloc/pointing.hpp"
#include "marscoloc/raster.hpp"
#include "marscoloc/viewshed.hpp"

#include "json.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace marscoloc {

/// URL templates for one mission. Placeholders: {product_id},
/// {product_id_lower}, {sol} (as written in the product id) and {sol5}
/// (zero-padded to five digits).
struct ProductUrls {
    std::string label;
    std::string image;
};

struct PipelineConfig {
    Mission mission = Mission::Curiosity;
    std::filesystem::path dem;
    std::filesystem::path places_csv;
    std::filesystem::path cache_dir = "pds_cache";
    std::filesystem::path out_dir = "out";

    /// Unset means the mission profile's default.
    std::optional<double> observer_height_m;
    double radius_m = kDefaultRadiusM;
    double target_height_m = 0.0;
    ViewshedMode mode = ViewshedMode::Sweep;
    Curvature curvature = Curvature::Off;
    double planet_radius_m = kMarsMeanRadiusM;
    RasterFormat format = RasterFormat::AsciiGrid;
    Fallback fallback = Fallback::Exact;
    unsigned workers = 1;

    /// Unset means the mission profile's paired schema.
    std::optional<std::string> csv_schema;
    std::map<std::string, CsvSchema> schemas;
    std::map<Mission, ExtractionProfile> profiles;
    std::map<Mission, ProductUrls> fetch_urls;
    bool force_fetch = false;

    const ExtractionProfile& profile() const { return profiles.at(mission); }
    const CsvSchema& schema() const;
    double observer_height() const;
};

/// Built-in profiles, schemas and fetch templates.
PipelineConfig default_config();

/// Merges a JSON config document over `config`. Unknown keys are rejected.
void apply_json(PipelineConfig& config, const nlohmann::json& doc);
PipelineConfig load_config(const std::filesystem::path& path);

/// Applies MARS_COLOC_CACHE when set.
void apply_environment(PipelineConfig& config);

/// Defaults, then the environment, then the config file when given.
/// Command-line flags go on top of the result.
PipelineConfig resolve_config(const std::optional<std::filesystem::path>& config_file);

/// Throws Config on non-positive numeric settings.
void validate(const PipelineConfig& config);

struct ColocationResult {
    std::string label_path;
    std::string image_id;
    std::optional<Viewpoint> viewpoint;
    std::filesystem::path raster_path;
    std::filesystem::path geojson_path;
    std::string csv_row;
    std::vector<std::string> warnings;
    /// Set when this label failed; other labels are unaffected.
    std::optional<ErrorCode> error_code;
    std::string error;

    bool ok() const { return !error_code.has_value(); }
};

/// Full chain per label: detect, parse, extract, localize, build the
/// viewpoint, compute the viewshed and write raster + GeoJSON. The
/// successful viewpoints are exported to <out_dir>/viewpoints.csv.
/// Throws on configuration problems (missing DEM, table, empty list).
std::vector<ColocationResult> colocate(const PipelineConfig& config,
                                       const std::vector<std::string>& label_paths);

/// Stops after building viewpoints; nothing is written.
std::vector<ColocationResult> build_viewpoints(const PipelineConfig& config,
                                               const std::vector<std::string>& label_paths);

/// Viewsheds for viewpoints already exported to CSV.
std::vector<ColocationResult> viewshed_from_viewpoints(const PipelineConfig& config,
                                                       const std::vector<Viewpoint>& viewpoints);

/// Raster + GeoJSON for a single viewpoint, written under `out_dir`.
void write_outputs(const VisibilityRaster& vs, const std::filesystem::path& out_dir,
                   const std::string& stem, RasterFormat format, ColocationResult& result);

/// 0 all ok, 1 all failed, 2 partial failure.
int exit_status(const std::vector<ColocationResult>& results);

// ------------------------------------------------------- viewpoint CSV ---

inline constexpr const char* kViewpointCsvHeader =
    "image_id,easting_m,northing_m,observer_height_m,radius_m,azimuth_left_deg,"
    "azimuth_right_deg,elevation_lower_deg,elevation_upper_deg";

std::string viewpoint_csv_row(const Viewpoint& vp);
/// Header plus one row per viewpoint, numbers as %.6f, LF line endings.
std::string format_viewpoint_csv(const std::vector<Viewpoint>& viewpoints);
/// Throws EmptyInput for an empty list.
void export_viewpoint_csv(const std::vector<Viewpoint>& viewpoints,
                          const std::filesystem::path& path);
std::vector<Viewpoint> parse_viewpoint_csv(std::string_view text);
std::vector<Viewpoint> read_viewpoint_csv(const std::filesystem::path& path);

// ------------------------------------------------------------- fetching ---

struct FetchedProduct {
    std::filesystem::path image_path;
    std::filesystem::path label_path;
    /// True when both files came from the cache without a network request.
    bool from_cache = false;
};

/// Sol as written in the product id: the leading digits for Curiosity,
/// the second underscore-separated field for Perseverance. Empty if absent.
std::string product_sol(const std::string& product_id, Mission mission);
std::string expand_url(const std::string& url_template, const std::string& product_id,
                       Mission mission);

/// Downloads a product's image and label into
/// <cache_dir>/<mission>/<product_id>/. A complete, non-empty cache entry
/// is returned without touching the network unless `force` is set.
FetchedProduct fetch_product(const std::string& product_id, Mission mission,
                             const std::filesystem::path& cache_dir, const ProductUrls& urls,
                             bool force = false);

// ------------------------------------------------------------- overlap ---

struct OverlapOutputs {
    OverlapReport report;
    std::optional<std::filesystem::path> raster_path;
    std::optional<std::filesystem::path> geojson_path;
};

/// Loads two visibility rasters and intersects them. With `out_stem`,
/// writes <out_stem><ext> and <out_stem>.geojson.
OverlapOutputs overlap_command(const std::filesystem::path& raster_a,
                               const std::filesystem::path& raster_b,
                               const std::optional<std::filesystem::path>& out_stem = std::nullopt,
                               RasterFormat format = RasterFormat::AsciiGrid);

std::string format_overlap_report(const OverlapReport& report);

} // namespace marscoloc
