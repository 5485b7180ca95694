#pragma once

#include <span>
#include <vector>

namespace crowdflow {

struct LoessResult {
    std::vector<double> fitted;
    /// Set when the window was larger than the data and had to be clamped.
    bool window_clamped = false;
};

/// Locally weighted polynomial regression (degree 0 or 1) with tricube weights.
///
/// Each eval point uses the `window` nearest x's. The bandwidth is the distance
/// to the farthest of them; when `window` exceeds the number of points every
/// point is used and the bandwidth grows by (window - n) / 2 average spacings,
/// which is how STL smooths short cycle-subseries with a long seasonal window.
/// Optional `robustness_weights` (same length as x) multiply the tricube weights.
///
/// A degree-1 fit whose weighted spread of x is negligible falls back to the
/// weighted mean. If every weight is zero the fit falls back to y at a
/// coinciding x, or to the plain mean of the neighborhood.
///
/// Throws Error{validation} unless |x| == |y| >= 1, x is strictly increasing,
/// window >= 3 and degree is 0 or 1.
LoessResult loess_smooth(std::span<const double> x, std::span<const double> y, std::span<const double> eval_points,
                         int window, int degree, std::span<const double> robustness_weights = {});

}  // namespace crowdflow
