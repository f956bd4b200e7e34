#include "marscoloc/error.hpp"
#include "marscoloc/pipeline.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

namespace marscoloc {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where)
{
    if (!obj.is_object())
        throw Error(ErrorCode::Config, where + " must be a JSON object");
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.contains(key))
            throw Error(ErrorCode::Config, "unknown key '" + key + "' in " + where);
    }
}

template <typename T>
T get(const json& obj, const std::string& key, const std::string& where)
{
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::Config, where + "." + key + ": " + e.what());
    }
}

void apply_schema(CsvSchema& s, const json& doc, const std::string& where)
{
    reject_unknown(doc, {"site", "drive", "easting", "northing", "elevation", "header_required"},
                   where);
    if (doc.contains("site")) s.site = get<std::string>(doc, "site", where);
    if (doc.contains("drive")) s.drive = get<std::string>(doc, "drive", where);
    if (doc.contains("easting")) s.easting = get<std::string>(doc, "easting", where);
    if (doc.contains("northing")) s.northing = get<std::string>(doc, "northing", where);
    if (doc.contains("elevation")) {
        if (doc["elevation"].is_null())
            s.elevation.reset();
        else
            s.elevation = get<std::string>(doc, "elevation", where);
    }
    if (doc.contains("header_required"))
        s.header_required = get<bool>(doc, "header_required", where);
}

void apply_rule(FieldRule& rule, const json& doc, const std::string& where)
{
    reject_unknown(doc, {"path", "selector", "selector_key", "value_key", "unit", "required"}, where);
    if (doc.contains("path")) rule.path = get<std::string>(doc, "path", where);
    if (doc.contains("selector")) rule.selector = get<std::string>(doc, "selector", where);
    if (doc.contains("selector_key")) rule.selector_key = get<std::string>(doc, "selector_key", where);
    if (doc.contains("value_key")) rule.value_key = get<std::string>(doc, "value_key", where);
    if (doc.contains("unit")) rule.unit = get<std::string>(doc, "unit", where);
    if (doc.contains("required")) rule.required = get<bool>(doc, "required", where);
}

void apply_profile(ExtractionProfile& p, const json& doc, const std::string& where)
{
    reject_unknown(doc, {"fields", "observer_height_m", "csv_schema"}, where);
    if (doc.contains("observer_height_m"))
        p.observer_height_m = get<double>(doc, "observer_height_m", where);
    if (doc.contains("csv_schema"))
        p.csv_schema = get<std::string>(doc, "csv_schema", where);
    if (doc.contains("fields")) {
        const auto& fields = doc["fields"];
        if (!fields.is_object())
            throw Error(ErrorCode::Config, where + ".fields must be an object");
        for (const auto& [name, rule_doc] : fields.items())
            apply_rule(p.rules[parse_field(name)], rule_doc, where + ".fields." + name);
    }
}

} // namespace

const CsvSchema& PipelineConfig::schema() const
{
    const auto name = csv_schema.value_or(profile().csv_schema);
    const auto it = schemas.find(name);
    if (it == schemas.end())
        throw Error(ErrorCode::Config, "unknown CSV schema '" + name + "'");
    return it->second;
}

double PipelineConfig::observer_height() const
{
    return observer_height_m.value_or(profile().observer_height_m);
}

PipelineConfig default_config()
{
    PipelineConfig c;
    for (auto m : {Mission::Curiosity, Mission::Perseverance})
        c.profiles[m] = builtin_profile(m);
    for (const auto& name : builtin_schema_names())
        c.schemas[name] = builtin_schema(name);
    // Public PDS Imaging Node layouts. The MSL volume (MSLMST_xxxx) depends
    // on the sol range and must be adjusted per product.
    c.fetch_urls[Mission::Curiosity] = {
        "https://planetarydata.jpl.nasa.gov/img/data/msl/MSLMST_0001/DATA/RDR/SURFACE/{sol5}/{product_id}.LBL",
        "https://planetarydata.jpl.nasa.gov/img/data/msl/MSLMST_0001/DATA/RDR/SURFACE/{sol5}/{product_id}.IMG",
    };
    c.fetch_urls[Mission::Perseverance] = {
        "https://planetarydata.jpl.nasa.gov/img/data/mars2020/mars2020_mastcamz_ops_calibrated/data/{sol5}/ids/rdr/zcam/{product_id_lower}.xml",
        "https://planetarydata.jpl.nasa.gov/img/data/mars2020/mars2020_mastcamz_ops_calibrated/data/{sol5}/ids/rdr/zcam/{product_id_lower}.png",
    };
    return c;
}

void apply_json(PipelineConfig& c, const json& doc)
{
    const std::string where = "config";
    reject_unknown(doc,
                   {"mission", "dem", "places_csv", "cache_dir", "out_dir", "observer_height_m",
                    "radius_m", "target_height_m", "mode", "curvature", "planet_radius_m", "format",
                    "fallback", "workers", "csv_schema", "schemas", "profiles", "fetch"},
                   where);
    if (doc.contains("mission")) c.mission = parse_mission(get<std::string>(doc, "mission", where));
    if (doc.contains("dem")) c.dem = get<std::string>(doc, "dem", where);
    if (doc.contains("places_csv")) c.places_csv = get<std::string>(doc, "places_csv", where);
    if (doc.contains("cache_dir")) c.cache_dir = get<std::string>(doc, "cache_dir", where);
    if (doc.contains("out_dir")) c.out_dir = get<std::string>(doc, "out_dir", where);
    if (doc.contains("observer_height_m"))
        c.observer_height_m = get<double>(doc, "observer_height_m", where);
    if (doc.contains("radius_m")) c.radius_m = get<double>(doc, "radius_m", where);
    if (doc.contains("target_height_m")) c.target_height_m = get<double>(doc, "target_height_m", where);
    if (doc.contains("mode")) c.mode = parse_mode(get<std::string>(doc, "mode", where));
    if (doc.contains("curvature"))
        c.curvature = parse_curvature(get<std::string>(doc, "curvature", where));
    if (doc.contains("planet_radius_m")) c.planet_radius_m = get<double>(doc, "planet_radius_m", where);
    if (doc.contains("format")) c.format = parse_raster_format(get<std::string>(doc, "format", where));
    if (doc.contains("fallback")) c.fallback = parse_fallback(get<std::string>(doc, "fallback", where));
    if (doc.contains("workers")) c.workers = get<unsigned>(doc, "workers", where);
    if (doc.contains("csv_schema")) c.csv_schema = get<std::string>(doc, "csv_schema", where);

    if (doc.contains("schemas")) {
        for (const auto& [name, sdoc] : doc["schemas"].items()) {
            auto& s = c.schemas[name];
            s.name = name;
            apply_schema(s, sdoc, "schemas." + name);
        }
    }
    if (doc.contains("profiles")) {
        for (const auto& [name, pdoc] : doc["profiles"].items()) {
            const auto mission = parse_mission(name);
            apply_profile(c.profiles[mission], pdoc, "profiles." + name);
        }
    }
    if (doc.contains("fetch")) {
        for (const auto& [name, fdoc] : doc["fetch"].items()) {
            const auto w = "fetch." + name;
            reject_unknown(fdoc, {"label", "image"}, w);
            auto& urls = c.fetch_urls[parse_mission(name)];
            if (fdoc.contains("label")) urls.label = get<std::string>(fdoc, "label", w);
            if (fdoc.contains("image")) urls.image = get<std::string>(fdoc, "image", w);
        }
    }
}

namespace {

json read_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::Config, "cannot open config " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::Config, path.string() + ": " + e.what());
    }
}

} // namespace

PipelineConfig load_config(const std::filesystem::path& path)
{
    auto c = default_config();
    apply_json(c, read_config(path));
    return c;
}

void apply_environment(PipelineConfig& config)
{
    if (const char* cache = std::getenv("MARS_COLOC_CACHE"); cache != nullptr && *cache != '\0')
        config.cache_dir = cache;
}

PipelineConfig resolve_config(const std::optional<std::filesystem::path>& config_file)
{
    auto c = default_config();
    apply_environment(c);
    if (config_file)
        apply_json(c, read_config(*config_file));
    return c;
}

void validate(const PipelineConfig& c)
{
    if (!(c.radius_m > 0.0))
        throw Error(ErrorCode::Config, "radius_m must be positive");
    if (!(c.observer_height() >= 0.0))
        throw Error(ErrorCode::Config, "observer_height_m must be >= 0");
    if (!(c.target_height_m >= 0.0))
        throw Error(ErrorCode::Config, "target_height_m must be >= 0");
    if (!(c.planet_radius_m > 0.0))
        throw Error(ErrorCode::Config, "planet_radius_m must be positive");
    if (c.workers == 0)
        throw Error(ErrorCode::Config, "workers must be >= 1");
    validate(c.profile());
    validate(c.schema());
}

} // namespace marscoloc
