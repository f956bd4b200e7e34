#include "marscoloc/localization.hpp"

#include "marscoloc/error.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace marscoloc {

namespace {

std::string normalize_name(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\"");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\"");
    std::string out(s.substr(first, last - first + 1));
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::optional<double> to_double(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t");
    if (first == std::string_view::npos)
        return std::nullopt;
    s = s.substr(first, s.find_last_not_of(" \t") - first + 1);
    if (s.starts_with('+'))
        s.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        return std::nullopt;
    return v;
}

} // namespace

Fallback parse_fallback(std::string_view name)
{
    if (name == "exact")
        return Fallback::Exact;
    if (name == "nearest-preceding" || name == "nearest_preceding")
        return Fallback::NearestPreceding;
    throw Error(ErrorCode::Config, "unknown fallback '" + std::string(name) + "'");
}

void validate(const CsvSchema& schema)
{
    std::vector<std::string> names = {schema.site, schema.drive, schema.easting, schema.northing};
    if (schema.elevation)
        names.push_back(*schema.elevation);
    std::set<std::string> seen;
    for (const auto& n : names) {
        const auto key = normalize_name(n);
        if (key.empty())
            throw Error(ErrorCode::Config, "CSV schema '" + schema.name + "' has an empty mapping");
        if (!seen.insert(key).second)
            throw Error(ErrorCode::Config,
                        "CSV schema '" + schema.name + "' maps two fields to '" + n + "'");
    }
}

CsvSchema builtin_schema(std::string_view name)
{
    CsvSchema s;
    s.name = std::string(name);
    if (name == "msl_localized_interp" || name == "m2020_best_interp")
        return s;
    throw Error(ErrorCode::Config, "unknown CSV schema '" + std::string(name) + "'");
}

std::vector<std::string> builtin_schema_names()
{
    return {"msl_localized_interp", "m2020_best_interp"};
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text)
{
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool quoted = false;
    bool any = false;

    auto end_record = [&] {
        record.push_back(std::move(field));
        field.clear();
        if (!(record.size() == 1 && record[0].empty()))
            records.push_back(std::move(record));
        record.clear();
        any = false;
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        any = true;
        if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            record.push_back(std::move(field));
            field.clear();
        } else if (c == '\n') {
            end_record();
        } else if (c != '\r') {
            field += c;
        }
    }
    if (any || !field.empty() || !record.empty())
        end_record();
    return records;
}

LocalizationTable::LocalizationTable(std::string source_name,
                                     std::map<RmcIndex, LocalizationRow> rows)
    : source_name_(std::move(source_name)), rows_(std::move(rows))
{
    // std::map order is (site, drive) ascending, so drives arrive sorted.
    for (const auto& [key, row] : rows_)
        drives_by_site_[key.site].push_back(key.drive);
}

const LocalizationRow* LocalizationTable::find(const RmcIndex& rmc) const
{
    const auto it = rows_.find(rmc);
    return it == rows_.end() ? nullptr : &it->second;
}

RoverPose LocalizationTable::lookup(const RmcIndex& rmc, Fallback fallback) const
{
    if (rows_.empty())
        throw Error(ErrorCode::EmptyTable, "localization table " + source_name_ + " is empty");

    RmcIndex matched = rmc;
    const LocalizationRow* row = find(rmc);
    if (row == nullptr && fallback == Fallback::NearestPreceding) {
        const auto site = drives_by_site_.find(rmc.site);
        if (site != drives_by_site_.end()) {
            const auto& drives = site->second;
            auto it = std::upper_bound(drives.begin(), drives.end(), rmc.drive);
            if (it != drives.begin()) {
                matched.drive = *std::prev(it);
                row = find(matched);
            }
        }
    }
    if (row == nullptr)
        throw Error(ErrorCode::NotFound, "RMC " + to_string(rmc) + " not found in " + source_name_ +
                                             (fallback == Fallback::NearestPreceding
                                                  ? " (no preceding drive in site)"
                                                  : ""));

    RoverPose pose;
    pose.easting = row->easting;
    pose.northing = row->northing;
    pose.elevation = row->elevation;
    pose.rmc = matched;
    pose.provenance.source = source_name_;
    pose.provenance.approximate = matched != rmc;
    if (pose.provenance.approximate)
        pose.provenance.warnings.push_back("RMC " + to_string(rmc) +
                                           " not localized; using nearest preceding " +
                                           to_string(matched));
    if (!rmc.stationary())
        pose.provenance.warnings.push_back("odd drive " + std::to_string(rmc.drive) +
                                           ": rover was moving at capture");
    return pose;
}

LocalizationTable load_table(std::string_view csv_text, const CsvSchema& schema,
                             std::string source_name)
{
    validate(schema);
    auto records = parse_csv(csv_text);

    struct Columns {
        std::size_t site, drive, easting, northing;
        std::optional<std::size_t> elevation;
    } cols{};

    std::size_t first_data = 0;
    if (schema.header_required) {
        if (records.empty())
            throw Error(ErrorCode::EmptyTable, source_name + " has no header row");
        const auto& header = records[0];
        auto column = [&](const std::string& mapped, bool required) -> std::optional<std::size_t> {
            const auto want = normalize_name(mapped);
            for (std::size_t i = 0; i < header.size(); ++i) {
                if (normalize_name(header[i]) == want)
                    return i;
            }
            if (required)
                throw Error(ErrorCode::MissingColumn,
                            source_name + " has no column '" + mapped + "'");
            return std::nullopt;
        };
        cols.site = *column(schema.site, true);
        cols.drive = *column(schema.drive, true);
        cols.easting = *column(schema.easting, true);
        cols.northing = *column(schema.northing, true);
        if (schema.elevation)
            cols.elevation = column(*schema.elevation, false);
        first_data = 1;
    } else {
        auto index = [&](const std::string& mapped) {
            const auto v = to_double(mapped);
            if (!v || *v < 0 || *v != std::floor(*v))
                throw Error(ErrorCode::Config,
                            "headerless schema needs column indices, got '" + mapped + "'");
            return static_cast<std::size_t>(*v);
        };
        cols.site = index(schema.site);
        cols.drive = index(schema.drive);
        cols.easting = index(schema.easting);
        cols.northing = index(schema.northing);
        if (schema.elevation)
            cols.elevation = index(*schema.elevation);
    }

    std::map<RmcIndex, LocalizationRow> rows;
    std::vector<std::string> bad;
    for (std::size_t r = first_data; r < records.size(); ++r) {
        const auto& rec = records[r];
        const std::size_t line = r + 1;
        auto cell = [&](std::size_t c) -> std::optional<double> {
            if (c >= rec.size())
                return std::nullopt;
            return to_double(rec[c]);
        };
        const auto site = cell(cols.site);
        const auto drive = cell(cols.drive);
        const auto e = cell(cols.easting);
        const auto n = cell(cols.northing);
        const bool keys_ok = site && drive && *site >= 0 && *drive >= 0 &&
                             *site == std::floor(*site) && *drive == std::floor(*drive);
        if (!keys_ok || !e || !n || !std::isfinite(*e) || !std::isfinite(*n)) {
            bad.push_back(std::to_string(line));
            continue;
        }
        const RmcIndex key{static_cast<std::int64_t>(*site), static_cast<std::int64_t>(*drive)};
        LocalizationRow row{*e, *n, std::nullopt};
        if (cols.elevation) {
            const auto z = cell(*cols.elevation);
            if (z && std::isfinite(*z))
                row.elevation = z;
        }
        if (!rows.emplace(key, row).second)
            throw Error(ErrorCode::DuplicateKey, source_name + ": duplicate key " + to_string(key) +
                                                     " at line " + std::to_string(line));
    }
    if (!bad.empty()) {
        std::string list;
        for (std::size_t i = 0; i < bad.size() && i < 20; ++i)
            list += (i ? ", " : "") + bad[i];
        if (bad.size() > 20)
            list += ", ...";
        throw Error(ErrorCode::BadRow, source_name + ": unparseable rows at lines " + list);
    }
    if (rows.empty())
        throw Error(ErrorCode::EmptyTable, source_name + " has no data rows");
    return LocalizationTable(std::move(source_name), std::move(rows));
}

LocalizationTable load_table_file(const std::string& path, const CsvSchema& schema)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::Io, "cannot open localization table " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_table(buf.str(), schema, path);
}

} // namespace marscoloc
