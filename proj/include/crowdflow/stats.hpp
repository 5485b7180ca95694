#pragma once

#include <span>

namespace crowdflow::stats {

/// Linear-interpolation quantile (Hyndman-Fan type 7, numpy's default).
/// `prob` in [0, 1]; `values` need not be sorted. Empty input returns NaN.
double quantile(std::span<const double> values, double prob);

/// Same as quantile() but assumes `sorted` is ascending.
double quantile_sorted(std::span<const double> sorted, double prob);

double median(std::span<const double> values);

/// Q3 - Q1 with linear-interpolation quartiles.
double iqr(std::span<const double> values);

double mean(std::span<const double> values);

/// Population (divide by n) standard deviation.
double population_sd(std::span<const double> values);

/// Sample (divide by n - 1) standard deviation; 0 for fewer than two values.
double sample_sd(std::span<const double> values);

/// Median absolute deviation scaled by 1.4826 (consistent for the normal).
double scaled_mad(std::span<const double> values);

/// Regularized incomplete beta I_x(a, b) for a, b > 0 and x in [0, 1].
double incomplete_beta(double a, double b, double x);

/// Inverse of incomplete_beta in x: returns x with I_x(a, b) = p.
double inverse_incomplete_beta(double a, double b, double p);

/// Student-t CDF with `dof` degrees of freedom.
double student_t_cdf(double t, double dof);

/// Student-t quantile: t with P(T <= t) = p, for p in (0, 1).
double student_t_quantile(double p, double dof);

}  // namespace crowdflow::stats
