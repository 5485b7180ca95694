#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "crowdflow/ingest.hpp"

namespace crowdflow {

/// Row-major binary grid, `height` rows of `width` cells.
struct OccupancyGrid {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> cells;

    std::uint8_t at(int x, int y) const { return cells[static_cast<std::size_t>(y) * width + x]; }
    std::size_t count() const;
};

/// Calls `emit(row, first_col, last_col)` (inclusive) for every run of cells
/// whose center (col + 0.5, row + 0.5) lies inside the polygon or on its
/// boundary under the even-odd rule. Runs are clipped to the frame and
/// emitted row by row, left to right, without overlap.
void for_each_mask_span(const MaskGeometry& mask, int width, int height,
                        const std::function<void(int, int, int)>& emit);

/// Full-frame rasterization of one mask.
/// Throws Error{degenerate_mask} when the polygon has zero area or covers no cell center.
OccupancyGrid rasterize_mask(const MaskGeometry& mask, const FrameGeometry& geometry);

}  // namespace crowdflow
