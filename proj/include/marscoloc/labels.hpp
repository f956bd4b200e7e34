#pragma once

#include "marscoloc/pvl.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace marscoloc {

enum class Mission { Curiosity, Perseverance };

std::string to_string(Mission mission);
/// Accepts "curiosity" / "perseverance" (case-insensitive).
Mission parse_mission(std::string_view name);

/// Rover Motion Counter stop: SITE opens a local frame, DRIVE increments on
/// every move. Odd drives are captured while the rover is moving.
struct RmcIndex {
    std::int64_t site = 0;
    std::int64_t drive = 0;

    bool stationary() const { return drive % 2 == 0; }
    auto operator<=>(const RmcIndex&) const = default;
};

std::string to_string(const RmcIndex& rmc);

/// Mast pointing at capture time. Azimuth is clockwise from north, elevation
/// is zero at the horizon and positive up. All angles in degrees.
struct CameraPointing {
    double azimuth_deg = 0.0;
    double elevation_deg = 0.0;
    double hfov_deg = 0.0;
    double vfov_deg = 0.0;

    bool operator==(const CameraPointing&) const = default;
};

/// Throws InvalidPointing unless elevation is in [-90, 90], hFOV in (0, 360]
/// and vFOV in (0, 180]; returns the pointing with azimuth wrapped to [0, 360).
CameraPointing normalized(const CameraPointing& pointing);

struct ImageMetadata {
    std::string product_id;
    Mission mission = Mission::Curiosity;
    RmcIndex rmc;
    CameraPointing pointing;
    /// Coordinate frame the RMC was reported in, when the label names one.
    std::optional<std::string> frame;
    std::vector<std::string> warnings;

    bool operator==(const ImageMetadata&) const = default;
};

enum class LabelFormat { Pds3Pvl, Pds4Xml };

enum class Field { Site, Drive, AzimuthDeg, ElevationDeg, HfovDeg, VfovDeg, ProductId, Frame };

std::string to_string(Field field);
Field parse_field(std::string_view name);

/// Where one logical field lives in a label.
///
/// PDS3: `path` is a dotted keyword path. With a `selector`, `path` names a
/// value sequence and `selector_key` the parallel name sequence; the value
/// aligned with the name equal to `selector` is taken.
///
/// PDS4: `path` is a slash-separated element path, absolute from the
/// document root or starting with "//" to match at any depth. With a
/// `selector`, each matched element is a record whose `selector_key` child
/// must equal `selector`; the value comes from its `value_key` child.
struct FieldRule {
    std::string path;
    std::string selector;
    std::string selector_key;
    std::string value_key;
    /// Expected unit annotation; empty means no check.
    std::string unit;
    bool required = true;

    bool operator==(const FieldRule&) const = default;
};

struct ExtractionProfile {
    Mission mission = Mission::Curiosity;
    LabelFormat format = LabelFormat::Pds3Pvl;
    std::map<Field, FieldRule> rules;
    double observer_height_m = 2.0;
    /// Name of the localization CSV schema paired with this mission.
    std::string csv_schema;
};

/// Curiosity Mastcam (PDS3) or Perseverance Mastcam-Z (PDS4) defaults.
ExtractionProfile builtin_profile(Mission mission);

/// Throws Config if a required logical field has no rule.
void validate(const ExtractionProfile& profile);

ImageMetadata extract_pds3(const pvl::LabelTree& tree, const ExtractionProfile& profile);
ImageMetadata extract_pds4(std::string_view xml_text, const ExtractionProfile& profile);

/// SITE/DRIVE only, for fragments that carry no pointing.
RmcIndex extract_rmc_pds3(const pvl::LabelTree& tree, const ExtractionProfile& profile);
RmcIndex extract_rmc_pds4(std::string_view xml_text, const ExtractionProfile& profile);

/// `head` is the first 256 bytes of the file (or all of it when shorter).
LabelFormat detect_format(std::string_view filename, std::span<const std::byte> head);
LabelFormat detect_format(std::string_view filename, std::string_view head);

/// Reads, detects and extracts in one step.
ImageMetadata read_label_file(const std::string& path, const ExtractionProfile& profile);

} // namespace marscoloc
