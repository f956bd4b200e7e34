#include "marscoloc/labels.hpp"

#include "marscoloc/error.hpp"
#include "marscoloc/pointing.hpp"

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace marscoloc {

namespace pt = boost::property_tree;

namespace {

std::string lower(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

void check_unit(Field field, const FieldRule& rule, const std::optional<std::string>& unit)
{
    if (rule.unit.empty() || !unit)
        return;
    if (lower(*unit) != lower(rule.unit))
        throw Error(ErrorCode::UnitMismatch, to_string(field) + ": expected unit '" + rule.unit +
                                                 "', label says '" + *unit + "'");
}

std::int64_t to_index(Field field, double v)
{
    if (!std::isfinite(v) || v != std::floor(v) || v < 0.0)
        throw Error(ErrorCode::NotNumeric,
                    to_string(field) + " must be a non-negative integer, got " + std::to_string(v));
    return static_cast<std::int64_t>(v);
}

const FieldRule* rule_for(const ExtractionProfile& profile, Field field)
{
    const auto it = profile.rules.find(field);
    return it == profile.rules.end() ? nullptr : &it->second;
}

const FieldRule& required_rule(const ExtractionProfile& profile, Field field)
{
    const auto* rule = rule_for(profile, field);
    if (rule == nullptr)
        throw Error(ErrorCode::Config, "profile has no rule for field " + to_string(field));
    return *rule;
}

[[noreturn]] void missing(Field field, const std::string& where)
{
    throw Error(ErrorCode::MissingField, "missing field " + to_string(field) + " (" + where + ")");
}

// ---------------------------------------------------------------- PDS3 ---

const pvl::Value& pvl_lookup(const pvl::LabelTree& tree, Field field, const std::string& path)
{
    const auto* v = tree.find(path);
    if (v == nullptr)
        missing(field, path);
    return *v;
}

double pvl_number(const pvl::LabelTree& tree, Field field, const FieldRule& rule)
{
    const pvl::Value* value = nullptr;
    if (rule.selector.empty()) {
        value = &pvl_lookup(tree, field, rule.path);
    } else {
        const auto& names_v = pvl_lookup(tree, field, rule.selector_key);
        const auto& values_v = pvl_lookup(tree, field, rule.path);
        const auto* names = names_v.items();
        const auto* values = values_v.items();
        if (names == nullptr || values == nullptr)
            throw Error(ErrorCode::NotNumeric, rule.selector_key + " and " + rule.path +
                                                   " must both be sequences");
        if (names->size() != values->size())
            throw Error(ErrorCode::LengthMismatch,
                        rule.selector_key + " has " + std::to_string(names->size()) +
                            " names but " + rule.path + " has " + std::to_string(values->size()) +
                            " values");
        for (std::size_t i = 0; i < names->size(); ++i) {
            if ((*names)[i].as_text() == rule.selector) {
                value = &(*values)[i];
                break;
            }
        }
        if (value == nullptr)
            missing(field, rule.selector_key + " has no \"" + rule.selector + "\"");
    }
    const auto n = value->as_number();
    if (!n)
        throw Error(ErrorCode::NotNumeric, to_string(field) + " at " + rule.path + " is not numeric");
    check_unit(field, rule, *value->unit());
    return *n;
}

std::optional<std::string> pvl_text(const pvl::LabelTree& tree, Field field, const FieldRule& rule)
{
    const auto* v = tree.find(rule.path);
    if (v == nullptr) {
        if (rule.required)
            missing(field, rule.path);
        return std::nullopt;
    }
    if (auto t = v->as_text())
        return t;
    if (auto n = v->as_number()) {
        std::ostringstream os;
        os << *n;
        return os.str();
    }
    throw Error(ErrorCode::NotNumeric, to_string(field) + " at " + rule.path + " is not scalar");
}

// ---------------------------------------------------------------- PDS4 ---

std::vector<std::string> split_path(std::string_view path)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= path.size()) {
        const auto slash = path.find('/', start);
        const auto part = path.substr(start, slash == std::string_view::npos ? slash : slash - start);
        if (!part.empty())
            out.emplace_back(part);
        if (slash == std::string_view::npos)
            break;
        start = slash + 1;
    }
    return out;
}

void collect_descendants(const pt::ptree& node, const std::string& name,
                         std::vector<const pt::ptree*>& out)
{
    for (const auto& [key, child] : node) {
        if (key == "<xmlattr>" || key == "<xmlcomment>")
            continue;
        if (key == name)
            out.push_back(&child);
        collect_descendants(child, name, out);
    }
}

std::vector<const pt::ptree*> resolve(const pt::ptree& root, std::string_view path)
{
    const bool anywhere = path.starts_with("//");
    const auto parts = split_path(path);
    if (parts.empty())
        return {};

    std::vector<const pt::ptree*> current;
    std::size_t next = 0;
    if (anywhere) {
        collect_descendants(root, parts[0], current);
        next = 1;
    } else {
        current.push_back(&root);
    }
    for (; next < parts.size(); ++next) {
        std::vector<const pt::ptree*> step;
        for (const auto* node : current) {
            for (const auto& [key, child] : *node) {
                if (key == parts[next])
                    step.push_back(&child);
            }
        }
        current = std::move(step);
    }
    return current;
}

std::optional<std::string> xml_unit(const pt::ptree& node)
{
    if (auto u = node.get_optional<std::string>("<xmlattr>.unit"))
        return *u;
    return std::nullopt;
}

struct XmlScalar {
    std::string text;
    std::optional<std::string> unit;
};

// All matches must agree; a single distinct value is returned.
std::optional<XmlScalar> xml_scalar(const pt::ptree& root, Field field, const FieldRule& rule)
{
    std::vector<XmlScalar> found;
    for (const auto* node : resolve(root, rule.path)) {
        if (rule.selector.empty()) {
            found.push_back({trim(node->data()), xml_unit(*node)});
            continue;
        }
        const auto id = node->get_child_optional(rule.selector_key);
        if (!id || trim(id->data()) != rule.selector)
            continue;
        const auto value = node->get_child_optional(rule.value_key);
        if (!value || trim(value->data()).empty())
            throw Error(ErrorCode::NotNumeric, rule.selector_key + " " + rule.selector +
                                                   " has no " + rule.value_key);
        found.push_back({trim(value->data()), xml_unit(*value)});
    }
    if (found.empty()) {
        if (rule.required)
            missing(field, rule.selector.empty() ? rule.path : rule.path + "[" + rule.selector + "]");
        return std::nullopt;
    }
    for (const auto& f : found) {
        if (f.text != found.front().text)
            throw Error(ErrorCode::AmbiguousField,
                        to_string(field) + " resolves to conflicting values '" +
                            found.front().text + "' and '" + f.text + "' at " + rule.path);
    }
    return found.front();
}

double parse_number(Field field, const std::string& text)
{
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size() || !std::isfinite(v))
        throw Error(ErrorCode::NotNumeric, to_string(field) + " is not numeric: '" + text + "'");
    return v;
}

double xml_number(const pt::ptree& root, Field field, const FieldRule& rule)
{
    const auto s = xml_scalar(root, field, rule);
    check_unit(field, rule, s->unit);
    return parse_number(field, s->text);
}

pt::ptree parse_xml(std::string_view xml_text)
{
    std::istringstream in{std::string(xml_text)};
    pt::ptree root;
    try {
        pt::read_xml(in, root, pt::xml_parser::trim_whitespace);
    } catch (const pt::xml_parser_error& e) {
        throw Error(ErrorCode::MalformedXml, "line " + std::to_string(e.line()) + ": " + e.message());
    }
    return root;
}

RmcIndex rmc_from_xml(const pt::ptree& root, const ExtractionProfile& profile)
{
    RmcIndex rmc;
    rmc.site = to_index(Field::Site, xml_number(root, Field::Site, required_rule(profile, Field::Site)));
    rmc.drive =
        to_index(Field::Drive, xml_number(root, Field::Drive, required_rule(profile, Field::Drive)));
    return rmc;
}

void add_parity_warning(ImageMetadata& m)
{
    if (!m.rmc.stationary())
        m.warnings.push_back("odd drive " + std::to_string(m.rmc.drive) +
                             ": image captured while the rover was moving");
}

} // namespace

std::string to_string(Mission mission)
{
    return mission == Mission::Curiosity ? "curiosity" : "perseverance";
}

Mission parse_mission(std::string_view name)
{
    const auto n = lower(name);
    if (n == "curiosity" || n == "msl")
        return Mission::Curiosity;
    if (n == "perseverance" || n == "m2020" || n == "mars2020")
        return Mission::Perseverance;
    throw Error(ErrorCode::Config, "unknown mission '" + std::string(name) + "'");
}

std::string to_string(const RmcIndex& rmc)
{
    return "(" + std::to_string(rmc.site) + "," + std::to_string(rmc.drive) + ")";
}

std::string to_string(Field field)
{
    switch (field) {
    case Field::Site: return "site";
    case Field::Drive: return "drive";
    case Field::AzimuthDeg: return "azimuth_deg";
    case Field::ElevationDeg: return "elevation_deg";
    case Field::HfovDeg: return "hfov_deg";
    case Field::VfovDeg: return "vfov_deg";
    case Field::ProductId: return "product_id";
    case Field::Frame: return "frame";
    }
    return "?";
}

Field parse_field(std::string_view name)
{
    for (Field f : {Field::Site, Field::Drive, Field::AzimuthDeg, Field::ElevationDeg,
                    Field::HfovDeg, Field::VfovDeg, Field::ProductId, Field::Frame}) {
        if (to_string(f) == name)
            return f;
    }
    throw Error(ErrorCode::Config, "unknown label field '" + std::string(name) + "'");
}

CameraPointing normalized(const CameraPointing& p)
{
    if (!std::isfinite(p.elevation_deg) || p.elevation_deg < -90.0 || p.elevation_deg > 90.0)
        throw Error(ErrorCode::InvalidPointing,
                    "elevation out of [-90, 90]: " + std::to_string(p.elevation_deg));
    if (!std::isfinite(p.hfov_deg) || !(p.hfov_deg > 0.0) || p.hfov_deg > 360.0)
        throw Error(ErrorCode::InvalidPointing, "hFOV out of (0, 360]: " + std::to_string(p.hfov_deg));
    if (!std::isfinite(p.vfov_deg) || !(p.vfov_deg > 0.0) || p.vfov_deg > 180.0)
        throw Error(ErrorCode::InvalidPointing, "vFOV out of (0, 180]: " + std::to_string(p.vfov_deg));
    if (!std::isfinite(p.azimuth_deg))
        throw Error(ErrorCode::InvalidPointing, "azimuth must be finite");
    CameraPointing out = p;
    out.azimuth_deg = normalize_azimuth(p.azimuth_deg);
    return out;
}

ExtractionProfile builtin_profile(Mission mission)
{
    ExtractionProfile p;
    p.mission = mission;
    p.observer_height_m = 2.0;
    if (mission == Mission::Curiosity) {
        p.format = LabelFormat::Pds3Pvl;
        p.csv_schema = "msl_localized_interp";
        p.rules[Field::Site] = {"ROVER_MOTION_COUNTER", "SITE", "ROVER_MOTION_COUNTER_NAME", "", "", true};
        p.rules[Field::Drive] = {"ROVER_MOTION_COUNTER", "DRIVE", "ROVER_MOTION_COUNTER_NAME", "", "", true};
        p.rules[Field::AzimuthDeg] = {"SITE_DERIVED_GEOMETRY_PARMS.INSTRUMENT_AZIMUTH", "", "", "", "deg", true};
        p.rules[Field::ElevationDeg] = {"SITE_DERIVED_GEOMETRY_PARMS.INSTRUMENT_ELEVATION", "", "", "", "deg", true};
        p.rules[Field::HfovDeg] = {"INSTRUMENT_STATE_PARMS.AZIMUTH_FOV", "", "", "", "deg", true};
        p.rules[Field::VfovDeg] = {"INSTRUMENT_STATE_PARMS.ELEVATION_FOV", "", "", "", "deg", true};
        p.rules[Field::ProductId] = {"PRODUCT_ID", "", "", "", "", true};
    } else {
        p.format = LabelFormat::Pds4Xml;
        p.csv_schema = "m2020_best_interp";
        p.rules[Field::Site] = {"//geom:Coordinate_Space_Index", "SITE", "geom:index_id",
                                "geom:index_value_number", "", true};
        p.rules[Field::Drive] = {"//geom:Coordinate_Space_Index", "DRIVE", "geom:index_id",
                                 "geom:index_value_number", "", true};
        p.rules[Field::AzimuthDeg] = {"//geom:Device_Angle_Index", "AZIMUTH-SITE", "geom:index_id",
                                      "geom:index_value_angle", "deg", true};
        p.rules[Field::ElevationDeg] = {"//geom:Device_Angle_Index", "ELEVATION-SITE", "geom:index_id",
                                        "geom:index_value_angle", "deg", true};
        p.rules[Field::HfovDeg] = {"//img:horizontal_fov", "", "", "", "deg", true};
        p.rules[Field::VfovDeg] = {"//img:vertical_fov", "", "", "", "deg", true};
        p.rules[Field::ProductId] = {"//logical_identifier", "", "", "", "", true};
        p.rules[Field::Frame] = {"//geom:coordinate_space_frame_type", "", "", "", "", false};
    }
    return p;
}

void validate(const ExtractionProfile& profile)
{
    for (Field f : {Field::Site, Field::Drive, Field::AzimuthDeg, Field::ElevationDeg,
                    Field::HfovDeg, Field::VfovDeg, Field::ProductId}) {
        const auto* rule = rule_for(profile, f);
        if (rule == nullptr || rule->path.empty())
            throw Error(ErrorCode::Config, to_string(profile.mission) +
                                               " profile has no rule for " + to_string(f));
        if (!rule->selector.empty() && rule->selector_key.empty())
            throw Error(ErrorCode::Config, to_string(f) + " rule has a selector but no selector_key");
        if (profile.format == LabelFormat::Pds4Xml && !rule->selector.empty() &&
            rule->value_key.empty())
            throw Error(ErrorCode::Config, to_string(f) + " rule has a selector but no value_key");
    }
}

RmcIndex extract_rmc_pds3(const pvl::LabelTree& tree, const ExtractionProfile& profile)
{
    RmcIndex rmc;
    rmc.site = to_index(Field::Site, pvl_number(tree, Field::Site, required_rule(profile, Field::Site)));
    rmc.drive =
        to_index(Field::Drive, pvl_number(tree, Field::Drive, required_rule(profile, Field::Drive)));
    return rmc;
}

ImageMetadata extract_pds3(const pvl::LabelTree& tree, const ExtractionProfile& profile)
{
    validate(profile);
    ImageMetadata m;
    m.mission = profile.mission;
    m.rmc = extract_rmc_pds3(tree, profile);

    CameraPointing raw;
    raw.azimuth_deg = pvl_number(tree, Field::AzimuthDeg, required_rule(profile, Field::AzimuthDeg));
    raw.elevation_deg =
        pvl_number(tree, Field::ElevationDeg, required_rule(profile, Field::ElevationDeg));
    raw.hfov_deg = pvl_number(tree, Field::HfovDeg, required_rule(profile, Field::HfovDeg));
    raw.vfov_deg = pvl_number(tree, Field::VfovDeg, required_rule(profile, Field::VfovDeg));
    m.pointing = normalized(raw);

    m.product_id = *pvl_text(tree, Field::ProductId, required_rule(profile, Field::ProductId));
    if (m.product_id.empty())
        missing(Field::ProductId, "empty value");
    if (const auto* frame = rule_for(profile, Field::Frame))
        m.frame = pvl_text(tree, Field::Frame, *frame);

    add_parity_warning(m);
    return m;
}

RmcIndex extract_rmc_pds4(std::string_view xml_text, const ExtractionProfile& profile)
{
    return rmc_from_xml(parse_xml(xml_text), profile);
}

ImageMetadata extract_pds4(std::string_view xml_text, const ExtractionProfile& profile)
{
    validate(profile);
    const auto root = parse_xml(xml_text);

    ImageMetadata m;
    m.mission = profile.mission;
    m.rmc = rmc_from_xml(root, profile);

    CameraPointing raw;
    raw.azimuth_deg = xml_number(root, Field::AzimuthDeg, required_rule(profile, Field::AzimuthDeg));
    raw.elevation_deg =
        xml_number(root, Field::ElevationDeg, required_rule(profile, Field::ElevationDeg));
    raw.hfov_deg = xml_number(root, Field::HfovDeg, required_rule(profile, Field::HfovDeg));
    raw.vfov_deg = xml_number(root, Field::VfovDeg, required_rule(profile, Field::VfovDeg));
    m.pointing = normalized(raw);

    auto id = xml_scalar(root, Field::ProductId, required_rule(profile, Field::ProductId))->text;
    // urn:nasa:pds:<bundle>:<collection>:<product>
    if (id.starts_with("urn:"))
        id = id.substr(id.rfind(':') + 1);
    if (id.empty())
        missing(Field::ProductId, "empty value");
    m.product_id = id;

    if (const auto* frame = rule_for(profile, Field::Frame)) {
        if (auto s = xml_scalar(root, Field::Frame, *frame))
            m.frame = s->text;
    }
    add_parity_warning(m);
    return m;
}

LabelFormat detect_format(std::string_view filename, std::string_view head)
{
    if (lower(filename).ends_with(".xml"))
        return LabelFormat::Pds4Xml;

    std::string_view h = head;
    if (h.starts_with("\xEF\xBB\xBF"))
        h.remove_prefix(3);
    // Leading blanks and /* comments */ are allowed before the first statement.
    while (true) {
        const auto first = h.find_first_not_of(" \t\r\n");
        if (first == std::string_view::npos) {
            h = {};
            break;
        }
        h.remove_prefix(first);
        if (!h.starts_with("/*"))
            break;
        const auto close = h.find("*/");
        if (close == std::string_view::npos) {
            h = {};
            break;
        }
        h.remove_prefix(close + 2);
    }
    if (h.starts_with("<?xml") || h.starts_with("<"))
        return LabelFormat::Pds4Xml;

    std::size_t i = 0;
    while (i < h.size() && (std::isalnum(static_cast<unsigned char>(h[i])) || h[i] == '_' ||
                            h[i] == ':' || h[i] == '^'))
        ++i;
    if (i > 0 && std::isalpha(static_cast<unsigned char>(h[h[0] == '^' ? 1 : 0]))) {
        while (i < h.size() && (h[i] == ' ' || h[i] == '\t'))
            ++i;
        if (i < h.size() && h[i] == '=')
            return LabelFormat::Pds3Pvl;
    }
    throw Error(ErrorCode::UnrecognizedFormat,
                "cannot tell label format of '" + std::string(filename) + "'");
}

LabelFormat detect_format(std::string_view filename, std::span<const std::byte> head)
{
    return detect_format(filename,
                         std::string_view(reinterpret_cast<const char*>(head.data()), head.size()));
}

ImageMetadata read_label_file(const std::string& path, const ExtractionProfile& profile)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::Io, "cannot open label " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();

    const auto format = detect_format(path, std::string_view(text).substr(0, 256));
    if (format != profile.format)
        throw Error(ErrorCode::Config, path + " is a " +
                                           (format == LabelFormat::Pds3Pvl ? "PDS3" : "PDS4") +
                                           " label but the " + to_string(profile.mission) +
                                           " profile expects the other format");
    if (format == LabelFormat::Pds3Pvl)
        return extract_pds3(pvl::parse(text), profile);
    return extract_pds4(text, profile);
}

} // namespace marscoloc
