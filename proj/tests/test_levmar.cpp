#include <doctest.h>

#include <cmath>
#include <vector>

#include "qdsim/errors.hpp"
#include "qdsim/levmar.hpp"

using namespace qdsim;

TEST_CASE("levmar recovers an exponential decay") {
    std::vector<double> t, y;
    for (int i = 0; i < 60; ++i) {
        t.push_back(0.05 * i);
        y.push_back(2.3 * std::exp(-1.7 * t.back()));
    }
    auto residuals = [&](std::span<const double> p, std::span<double> r) {
        for (std::size_t i = 0; i < t.size(); ++i)
            r[i] = p[0] * std::exp(-p[1] * t[i]) - y[i];
    };
    auto res = lm::fit(residuals, t.size(), {1.0, 1.0});
    CHECK(res.converged);
    CHECK(res.params[0] == doctest::Approx(2.3).epsilon(1e-8));
    CHECK(res.params[1] == doctest::Approx(1.7).epsilon(1e-8));
    CHECK(res.rss == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("levmar on a linear model matches closed form, with stderr") {
    // y = a x + b with unit-variance-ish residuals
    std::vector<double> x, y;
    for (int i = 0; i < 10; ++i) {
        x.push_back(i);
        y.push_back(2.0 * i + 1.0 + ((i % 2 == 0) ? 0.1 : -0.1));
    }
    auto residuals = [&](std::span<const double> p, std::span<double> r) {
        for (std::size_t i = 0; i < x.size(); ++i) r[i] = p[0] * x[i] + p[1] - y[i];
    };
    auto res = lm::fit(residuals, x.size(), {0.0, 0.0});
    CHECK(res.converged);
    // closed-form least squares for the same data
    double xbar = 0, ybar = 0;
    for (std::size_t i = 0; i < x.size(); ++i) { xbar += x[i]; ybar += y[i]; }
    xbar /= x.size(); ybar /= y.size();
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - xbar) * (x[i] - xbar);
        sxy += (x[i] - xbar) * (y[i] - ybar);
    }
    CHECK(res.params[0] == doctest::Approx(sxy / sxx).epsilon(1e-9));
    CHECK(res.params[1] == doctest::Approx(ybar - sxy / sxx * xbar).epsilon(1e-9));
    CHECK(res.stderrs.size() == 2);
    // analytic s.e. of the slope: s / sqrt(sum (x - xbar)^2)
    double rss = res.rss;
    const double s2 = rss / (10 - 2);
    double sxx2 = 0.0, xbar2 = 4.5;
    for (double xv : x) sxx2 += (xv - xbar2) * (xv - xbar2);
    CHECK(res.stderrs[0] == doctest::Approx(std::sqrt(s2 / sxx2)).epsilon(1e-6));
}

TEST_CASE("levmar rejects underdetermined problems") {
    auto residuals = [](std::span<const double>, std::span<double> r) { r[0] = 0.0; };
    CHECK_THROWS_AS(lm::fit(residuals, 1, {1.0, 2.0}), FitError);
}
