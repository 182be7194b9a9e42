#pragma once

#include <functional>
#include <span>
#include <vector>

namespace qdsim::lm {

struct Options {
    int max_iterations = 200;
    double ftol = 1e-14;  // relative decrease of the sum of squares
    double xtol = 1e-12;  // relative step size
    double gtol = 1e-14;  // gradient infinity norm (scaled)
    double lambda0 = 1e-3;
};

struct Result {
    std::vector<double> params;
    std::vector<double> stderrs;  // from the covariance at the solution; empty if m <= n
    double rss = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Fills r (size m) with residuals model(p) - data at parameters p.
using ResidualFn = std::function<void(std::span<const double> p, std::span<double> r)>;
// Fills J (row-major m x n) with d r_i / d p_j. Optional; forward differences otherwise.
using JacobianFn = std::function<void(std::span<const double> p, std::span<double> jac)>;

// Damped Gauss-Newton (Levenberg-Marquardt, Nielsen's lambda update) for small
// dense problems (n <= 8 or so).
Result fit(const ResidualFn& residuals, const JacobianFn& jacobian, std::size_t m,
           std::vector<double> p0, const Options& opts = {});

Result fit(const ResidualFn& residuals, std::size_t m, std::vector<double> p0,
           const Options& opts = {});

} // namespace qdsim::lm
