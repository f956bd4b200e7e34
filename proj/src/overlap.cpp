#include "marscoloc/error.hpp"
#include "marscoloc/viewshed.hpp"

#include <algorithm>

namespace marscoloc {

OverlapReport overlap(const VisibilityRaster& a, const VisibilityRaster& b)
{
    const auto off = lattice_offset(a.transform, b.transform);
    if (!off)
        throw Error(ErrorCode::GridMismatch,
                    "rasters differ in pixel size or are offset by a fraction of a cell");

    const auto row0 = std::min<std::int64_t>(0, off->rows);
    const auto col0 = std::min<std::int64_t>(0, off->cols);
    const auto row1 = std::max(a.transform.rows, off->rows + b.transform.rows);
    const auto col1 = std::max(a.transform.cols, off->cols + b.transform.cols);

    const bool disjoint_extents = off->rows >= a.transform.rows || off->cols >= a.transform.cols ||
                                  off->rows + b.transform.rows <= 0 ||
                                  off->cols + b.transform.cols <= 0;
    if (disjoint_extents)
        throw Error(ErrorCode::GridMismatch, "raster extents do not overlap");

    const auto extent = a.transform.window(row0, col0, row1 - row0, col1 - col0);
    // Nodata doubles as "outside this raster" so that only cells unknown to
    // both inputs stay nodata in the result.
    const auto ea = embed(a, extent, Visibility::Nodata);
    const auto eb = embed(b, extent, Visibility::Nodata);

    OverlapReport report;
    report.overlap = VisibilityRaster(extent);
    std::size_t both = 0;
    for (std::size_t i = 0; i < extent.cell_count(); ++i) {
        const auto va = ea.cells[i];
        const auto vb = eb.cells[i];
        if (va == Visibility::Visible && vb == Visibility::Visible) {
            report.overlap.cells[i] = Visibility::Visible;
            ++both;
        } else if (va == Visibility::Nodata && vb == Visibility::Nodata) {
            report.overlap.cells[i] = Visibility::Nodata;
        }
    }

    const double cell_area = a.transform.pixel_size * a.transform.pixel_size;
    const auto count_a = a.count(Visibility::Visible);
    const auto count_b = b.count(Visibility::Visible);
    const auto count_union = count_a + count_b - both;
    report.area_a_m2 = static_cast<double>(count_a) * cell_area;
    report.area_b_m2 = static_cast<double>(count_b) * cell_area;
    report.area_overlap_m2 = static_cast<double>(both) * cell_area;
    report.jaccard =
        count_union == 0 ? 1.0 : static_cast<double>(both) / static_cast<double>(count_union);
    report.overlap.provenance = "overlap(" + a.provenance + ", " + b.provenance + ")";
    return report;
}

} // namespace marscoloc
