#include "marscoloc/raster.hpp"

#include <array>
#include <cstdint>
#include <deque>

namespace marscoloc {

namespace {

// Edge directions on the vertex lattice (i = column edge index, j = row edge
// index, j grows southward). Listed counter-clockwise in map orientation so
// that (d + 1) % 4 is a left turn.
enum Dir : int { East = 0, North = 1, West = 2, South = 3 };
constexpr std::array<int, 4> kDi = {1, 0, -1, 0};
constexpr std::array<int, 4> kDj = {0, -1, 0, 1};

class Tracer {
public:
    explicit Tracer(const VisibilityRaster& vs)
        : vs_(vs), rows_(vs.transform.rows), cols_(vs.transform.cols),
          edges_(static_cast<std::size_t>((rows_ + 1) * (cols_ + 1)), 0)
    {
    }

    std::vector<VisibilityPolygon> run()
    {
        label_components();
        build_edges();
        std::vector<VisibilityPolygon> polys(component_cells_.size());
        for (std::size_t k = 0; k < polys.size(); ++k)
            polys[k].cell_count = component_cells_[k];

        std::vector<std::vector<std::vector<MapCoord>>> holes(polys.size());
        for (std::int64_t j = 0; j <= rows_; ++j) {
            for (std::int64_t i = 0; i <= cols_; ++i) {
                while (remaining(i, j) != 0) {
                    int d = 0;
                    while ((remaining(i, j) & (1 << d)) == 0)
                        ++d;
                    const auto label = label_left_of(i, j, d);
                    auto ring = trace(i, j, d);
                    const double area = ring_area(ring);
                    polys[label].area_m2 += area;
                    if (area > 0)
                        polys[label].rings.insert(polys[label].rings.begin(), std::move(ring));
                    else
                        holes[label].push_back(std::move(ring));
                }
            }
        }
        for (std::size_t k = 0; k < polys.size(); ++k)
            for (auto& h : holes[k])
                polys[k].rings.push_back(std::move(h));
        return polys;
    }

private:
    bool visible(std::int64_t r, std::int64_t c) const
    {
        return r >= 0 && c >= 0 && r < rows_ && c < cols_ && vs_.at(r, c) == Visibility::Visible;
    }

    std::size_t vid(std::int64_t i, std::int64_t j) const
    {
        return static_cast<std::size_t>(j * (cols_ + 1) + i);
    }

    std::uint8_t remaining(std::int64_t i, std::int64_t j) const { return edges_[vid(i, j)] & 0x0F; }
    bool has_edge(std::int64_t i, std::int64_t j, int d) const
    {
        return (edges_[vid(i, j)] >> 4 & (1 << d)) != 0;
    }

    void add_edge(std::int64_t i, std::int64_t j, int d)
    {
        edges_[vid(i, j)] |= static_cast<std::uint8_t>((1 << d) | (1 << (d + 4)));
    }

    // Boundary edges keep the visible cell on their left.
    void build_edges()
    {
        for (std::int64_t r = 0; r < rows_; ++r) {
            for (std::int64_t c = 0; c < cols_; ++c) {
                if (!visible(r, c))
                    continue;
                if (!visible(r + 1, c))
                    add_edge(c, r + 1, East);
                if (!visible(r, c + 1))
                    add_edge(c + 1, r + 1, North);
                if (!visible(r - 1, c))
                    add_edge(c + 1, r, West);
                if (!visible(r, c - 1))
                    add_edge(c, r, South);
            }
        }
    }

    std::size_t label_left_of(std::int64_t i, std::int64_t j, int d) const
    {
        std::int64_t r = 0, c = 0;
        switch (d) {
        case East: r = j - 1; c = i; break;
        case North: r = j - 1; c = i - 1; break;
        case West: r = j; c = i - 1; break;
        default: r = j; c = i; break;
        }
        return static_cast<std::size_t>(labels_[static_cast<std::size_t>(r * cols_ + c)]);
    }

    // Left turns win at saddle vertices, so diagonal-only contacts stay
    // separate rings (4-connectivity).
    int next_dir(std::int64_t i, std::int64_t j, int incoming) const
    {
        for (int turn : {1, 0, 3}) {
            const int d = (incoming + turn) % 4;
            if (has_edge(i, j, d))
                return d;
        }
        return -1;
    }

    std::vector<MapCoord> trace(std::int64_t i0, std::int64_t j0, int d0)
    {
        const auto& t = vs_.transform;
        std::vector<MapCoord> ring;
        std::int64_t i = i0, j = j0;
        int d = d0;
        int previous = -1;
        while (true) {
            edges_[vid(i, j)] &= static_cast<std::uint8_t>(~(1 << d));
            if (d != previous)
                ring.push_back(t.pixel_to_map(static_cast<double>(i), static_cast<double>(j)));
            previous = d;
            i += kDi[d];
            j += kDj[d];
            const int next = next_dir(i, j, d);
            if (i == i0 && j == j0 && next == d0)
                break;
            d = next;
        }
        if (previous == d0)
            ring.erase(ring.begin());
        ring.push_back(ring.front());
        return ring;
    }

    void label_components()
    {
        labels_.assign(static_cast<std::size_t>(rows_ * cols_), -1);
        std::deque<std::pair<std::int64_t, std::int64_t>> queue;
        for (std::int64_t r = 0; r < rows_; ++r) {
            for (std::int64_t c = 0; c < cols_; ++c) {
                if (!visible(r, c) || labels_[static_cast<std::size_t>(r * cols_ + c)] >= 0)
                    continue;
                const auto label = static_cast<std::int64_t>(component_cells_.size());
                component_cells_.push_back(0);
                labels_[static_cast<std::size_t>(r * cols_ + c)] = label;
                queue.emplace_back(r, c);
                while (!queue.empty()) {
                    const auto [qr, qc] = queue.front();
                    queue.pop_front();
                    ++component_cells_.back();
                    for (int d = 0; d < 4; ++d) {
                        const auto nr = qr + kDj[d];
                        const auto nc = qc + kDi[d];
                        if (!visible(nr, nc))
                            continue;
                        auto& l = labels_[static_cast<std::size_t>(nr * cols_ + nc)];
                        if (l < 0) {
                            l = label;
                            queue.emplace_back(nr, nc);
                        }
                    }
                }
            }
        }
    }

    const VisibilityRaster& vs_;
    std::int64_t rows_;
    std::int64_t cols_;
    // low nibble: edges not yet traced; high nibble: all edges
    std::vector<std::uint8_t> edges_;
    std::vector<std::int64_t> labels_;
    std::vector<std::size_t> component_cells_;
};

} // namespace

double ring_area(const std::vector<MapCoord>& ring)
{
    if (ring.size() < 3)
        return 0.0;
    // Shift to the first vertex to keep precision with large map coordinates.
    const double e0 = ring.front().easting;
    const double n0 = ring.front().northing;
    double twice = 0.0;
    for (std::size_t k = 0; k + 1 < ring.size(); ++k) {
        const double x1 = ring[k].easting - e0, y1 = ring[k].northing - n0;
        const double x2 = ring[k + 1].easting - e0, y2 = ring[k + 1].northing - n0;
        twice += x1 * y2 - x2 * y1;
    }
    return twice / 2.0;
}

std::vector<VisibilityPolygon> trace_polygons(const VisibilityRaster& vs)
{
    return Tracer(vs).run();
}

nlohmann::json polygonize(const VisibilityRaster& vs, const std::string& crs_note)
{
    nlohmann::json features = nlohmann::json::array();
    std::size_t region = 0;
    for (const auto& poly : trace_polygons(vs)) {
        nlohmann::json rings = nlohmann::json::array();
        for (const auto& ring : poly.rings) {
            nlohmann::json coords = nlohmann::json::array();
            for (const auto& p : ring)
                coords.push_back({p.easting, p.northing});
            rings.push_back(std::move(coords));
        }
        features.push_back({
            {"type", "Feature"},
            {"geometry", {{"type", "Polygon"}, {"coordinates", std::move(rings)}}},
            {"properties",
             {{"region", region++}, {"cell_count", poly.cell_count}, {"area_m2", poly.area_m2}}},
        });
    }
    nlohmann::json fc = {
        {"type", "FeatureCollection"},
        {"crs_note", crs_note},
        {"features", std::move(features)},
    };
    if (!vs.provenance.empty())
        fc["provenance"] = vs.provenance;
    return fc;
}

} // namespace marscoloc
