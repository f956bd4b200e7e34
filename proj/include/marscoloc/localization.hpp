#pragma once

#include "marscoloc/labels.hpp"

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace marscoloc {

/// Maps logical localization fields to CSV columns. With `header_required`
/// the mappings are header names (matched case-insensitively after
/// trimming); without it they are zero-based column indices.
struct CsvSchema {
    std::string name;
    std::string site = "site";
    std::string drive = "drive";
    std::string easting = "easting";
    std::string northing = "northing";
    std::optional<std::string> elevation = "elevation";
    bool header_required = true;
};

/// Throws Config when a mapping is empty or two mappings collide.
void validate(const CsvSchema& schema);

/// Shipped defaults: "msl_localized_interp" and "m2020_best_interp".
CsvSchema builtin_schema(std::string_view name);
std::vector<std::string> builtin_schema_names();

struct PoseProvenance {
    std::string source;
    /// True when nearest-preceding fallback picked a different drive.
    bool approximate = false;
    std::vector<std::string> warnings;
};

struct RoverPose {
    double easting = 0.0;
    double northing = 0.0;
    std::optional<double> elevation;
    /// Key of the table row actually used; unset for poses that did not
    /// come from a localization table.
    std::optional<RmcIndex> rmc;
    PoseProvenance provenance;
};

struct LocalizationRow {
    double easting = 0.0;
    double northing = 0.0;
    std::optional<double> elevation;
};

enum class Fallback { Exact, NearestPreceding };

Fallback parse_fallback(std::string_view name);

/// Immutable after load; lookups are safe from any number of threads.
class LocalizationTable {
public:
    LocalizationTable(std::string source_name, std::map<RmcIndex, LocalizationRow> rows);

    const std::string& source_name() const { return source_name_; }
    std::size_t size() const { return rows_.size(); }
    bool empty() const { return rows_.empty(); }
    const LocalizationRow* find(const RmcIndex& rmc) const;

    /// Throws NotFound on an exact miss, or when no drive <= the query exists
    /// in the query's site. Callers must not co-locate on a miss.
    RoverPose lookup(const RmcIndex& rmc, Fallback fallback = Fallback::Exact) const;

private:
    std::string source_name_;
    std::map<RmcIndex, LocalizationRow> rows_;
    // site -> ascending drives
    std::unordered_map<std::int64_t, std::vector<std::int64_t>> drives_by_site_;
};

/// Parses CSV text (header row, LF or CRLF, RFC 4180 quoting).
LocalizationTable load_table(std::string_view csv_text, const CsvSchema& schema,
                             std::string source_name = "<memory>");
LocalizationTable load_table_file(const std::string& path, const CsvSchema& schema);

inline RoverPose lookup_pose(const LocalizationTable& table, const RmcIndex& rmc,
                             Fallback fallback = Fallback::Exact)
{
    return table.lookup(rmc, fallback);
}

/// Splits CSV text into records of fields. Exposed for the viewpoint CSV
/// reader as well.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

} // namespace marscoloc
