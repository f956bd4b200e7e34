#include "marscoloc/error.hpp"
#include "marscoloc/pipeline.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace marscoloc {

namespace {

std::string fixed6(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    std::string s(buf);
    if (s == "-0.000000")
        s.erase(0, 1);
    return s;
}

std::string quoted(const std::string& field)
{
    if (field.find_first_of(",\"\r\n") == std::string::npos)
        return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + "\"";
}

double number(const std::string& text, std::size_t line, const char* column)
{
    double v = 0.0;
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last)
        throw Error(ErrorCode::NotNumeric, "viewpoint CSV line " + std::to_string(line) + ": " +
                                               column + " is not a number: '" + text + "'");
    return v;
}

} // namespace

std::string viewpoint_csv_row(const Viewpoint& vp)
{
    const auto& s = vp.sector;
    std::string row = quoted(vp.image_id);
    for (double v : {vp.pose.easting, vp.pose.northing, vp.observer_height_m, vp.radius_m,
                     s.azimuth_left_deg, s.azimuth_right_deg, s.elevation_lower_deg,
                     s.elevation_upper_deg}) {
        row += ',';
        row += fixed6(v);
    }
    return row;
}

std::string format_viewpoint_csv(const std::vector<Viewpoint>& viewpoints)
{
    std::string out = kViewpointCsvHeader;
    out += '\n';
    for (const auto& vp : viewpoints) {
        out += viewpoint_csv_row(vp);
        out += '\n';
    }
    return out;
}

void export_viewpoint_csv(const std::vector<Viewpoint>& viewpoints,
                          const std::filesystem::path& path)
{
    if (viewpoints.empty())
        throw Error(ErrorCode::EmptyInput, "no viewpoints to export");
    const auto text = format_viewpoint_csv(viewpoints);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error(ErrorCode::Io, "cannot write " + path.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out)
        throw Error(ErrorCode::Io, "write failed for " + path.string());
}

std::vector<Viewpoint> parse_viewpoint_csv(std::string_view text)
{
    const auto records = parse_csv(text);
    if (records.empty())
        throw Error(ErrorCode::EmptyTable, "viewpoint CSV is empty");

    std::string header;
    for (std::size_t i = 0; i < records[0].size(); ++i)
        header += (i ? "," : "") + records[0][i];
    if (header != kViewpointCsvHeader)
        throw Error(ErrorCode::MissingColumn, "unexpected viewpoint CSV header: " + header);

    static constexpr const char* names[] = {"easting_m",        "northing_m",
                                            "observer_height_m", "radius_m",
                                            "azimuth_left_deg",  "azimuth_right_deg",
                                            "elevation_lower_deg", "elevation_upper_deg"};
    std::vector<Viewpoint> out;
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        if (rec.size() == 1 && rec[0].empty())
            continue;
        if (rec.size() != 9)
            throw Error(ErrorCode::BadRow, "viewpoint CSV line " + std::to_string(r + 1) +
                                               " has " + std::to_string(rec.size()) +
                                               " fields, expected 9");
        double v[8];
        for (int i = 0; i < 8; ++i)
            v[i] = number(rec[static_cast<std::size_t>(i) + 1], r + 1, names[i]);

        Viewpoint vp;
        vp.image_id = rec[0];
        vp.pose.easting = v[0];
        vp.pose.northing = v[1];
        vp.pose.provenance.source = "viewpoint CSV";
        vp.observer_height_m = v[2];
        vp.radius_m = v[3];
        vp.sector.azimuth_left_deg = normalize_azimuth(v[4]);
        vp.sector.azimuth_right_deg = normalize_azimuth(v[5]);
        vp.sector.elevation_lower_deg = v[6];
        vp.sector.elevation_upper_deg = v[7];
        vp.sector.full_circle = vp.sector.azimuth_left_deg == vp.sector.azimuth_right_deg;
        if (!(vp.radius_m > 0.0))
            throw Error(ErrorCode::InvalidRadius,
                        "viewpoint CSV line " + std::to_string(r + 1) + ": radius must be positive");
        out.push_back(std::move(vp));
    }
    return out;
}

std::vector<Viewpoint> read_viewpoint_csv(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::Io, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_viewpoint_csv(ss.str());
}

} // namespace marscoloc
