#include "crowdflow/raster.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "crowdflow/error.hpp"

namespace crowdflow {

std::size_t OccupancyGrid::count() const {
    return static_cast<std::size_t>(std::count(cells.begin(), cells.end(), std::uint8_t{1}));
}

namespace {

// Cells whose center lies in the closed interval [a, b].
std::pair<long, long> cells_in(double a, double b) {
    return {static_cast<long>(std::ceil(a - 0.5)), static_cast<long>(std::floor(b - 0.5))};
}

}  // namespace

void for_each_mask_span(const MaskGeometry& mask, int width, int height,
                        const std::function<void(int, int, int)>& emit) {
    const auto& poly = mask.polygon;
    const std::size_t n = poly.size();
    if (n < 3 || width <= 0 || height <= 0) return;

    double y_lo = poly[0].y, y_hi = poly[0].y;
    for (const Point& p : poly) {
        y_lo = std::min(y_lo, p.y);
        y_hi = std::max(y_hi, p.y);
    }
    auto [row_first, row_last] = cells_in(y_lo, y_hi);
    row_first = std::max(row_first, 0L);
    row_last = std::min(row_last, static_cast<long>(height) - 1);

    std::vector<double> crossings;
    std::vector<std::pair<long, long>> runs;
    for (long row = row_first; row <= row_last; ++row) {
        const double cy = static_cast<double>(row) + 0.5;
        crossings.clear();
        runs.clear();

        for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
            const Point& a = poly[j];
            const Point& b = poly[i];
            // Half-open rule: an edge counts when its endpoints straddle cy from [below, above).
            if ((a.y > cy) != (b.y > cy)) {
                crossings.push_back(a.x + (cy - a.y) * (b.x - a.x) / (b.y - a.y));
            } else if (a.y == cy && b.y == cy) {
                runs.push_back(cells_in(std::min(a.x, b.x), std::max(a.x, b.x)));
            }
            // Vertices on the scanline are boundary points the crossing rule can miss (local extrema).
            if (b.y == cy) runs.push_back(cells_in(b.x, b.x));
        }
        std::sort(crossings.begin(), crossings.end());
        for (std::size_t k = 0; k + 1 < crossings.size(); k += 2) {
            runs.push_back(cells_in(crossings[k], crossings[k + 1]));
        }

        for (auto& r : runs) {
            r.first = std::max(r.first, 0L);
            r.second = std::min(r.second, static_cast<long>(width) - 1);
        }
        runs.erase(std::remove_if(runs.begin(), runs.end(), [](const auto& r) { return r.first > r.second; }),
                   runs.end());
        if (runs.empty()) continue;
        std::sort(runs.begin(), runs.end());

        long cur_first = runs[0].first;
        long cur_last = runs[0].second;
        for (std::size_t k = 1; k < runs.size(); ++k) {
            if (runs[k].first <= cur_last + 1) {
                cur_last = std::max(cur_last, runs[k].second);
            } else {
                emit(static_cast<int>(row), static_cast<int>(cur_first), static_cast<int>(cur_last));
                cur_first = runs[k].first;
                cur_last = runs[k].second;
            }
        }
        emit(static_cast<int>(row), static_cast<int>(cur_first), static_cast<int>(cur_last));
    }
}

OccupancyGrid rasterize_mask(const MaskGeometry& mask, const FrameGeometry& geometry) {
    geometry.validate();
    if (mask.polygon.size() < 3 || !(mask.area() > 0.0)) {
        throw Error(ErrorKind::degenerate_mask, "mask polygon has zero area", "mask");
    }
    OccupancyGrid grid{geometry.width, geometry.height,
                       std::vector<std::uint8_t>(static_cast<std::size_t>(geometry.width) * geometry.height, 0)};
    std::size_t set = 0;
    for_each_mask_span(mask, geometry.width, geometry.height, [&](int row, int first, int last) {
        auto* line = grid.cells.data() + static_cast<std::size_t>(row) * geometry.width;
        std::fill(line + first, line + last + 1, std::uint8_t{1});
        set += static_cast<std::size_t>(last - first + 1);
    });
    if (set == 0) throw Error(ErrorKind::degenerate_mask, "mask covers no pixel center", "mask");
    return grid;
}

}  // namespace crowdflow
