#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace qdsim::num {

// Inverse CDF of the standard normal distribution (Wichura's AS241, ~1e-15
// relative accuracy). p must be in (0, 1).
double normal_quantile(double p);

double mean(std::span<const double> x);
// Sample standard deviation (N-1 denominator).
double stdev(std::span<const double> x);
double median(std::vector<double> x); // by value: sorts a copy

// Linear interpolation quantile of unsorted data, q in [0,1].
double quantile(std::vector<double> x, double q);

// Centered moving average; window must be odd. Ends keep shorter windows.
std::vector<double> moving_average(std::span<const double> y, int window);

// Centered finite differences, one-sided at the ends.
std::vector<double> gradient(std::span<const double> y, double dx);

// Sub-sample offset of an extremum from a 3-point parabola, clamped to [-1,1].
double parabolic_offset(double y_left, double y_center, double y_right);

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double rms_residual = 0.0;
    std::size_t n_used = 0;
};

LineFit fit_line(std::span<const double> x, std::span<const double> y);

// Least-squares line with one pass of MAD-based outlier rejection.
LineFit fit_line_robust(std::span<const double> x, std::span<const double> y);

// Power spectrum |DFT|^2 of a Hann-windowed real signal, bins 0..N/2.
std::vector<double> power_spectrum(std::span<const double> y);

} // namespace qdsim::num
