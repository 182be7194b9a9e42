#include "qdsim/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qdsim/errors.hpp"

namespace qdsim::num {

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw DataError("normal_quantile: p must be in (0,1)");

    const double q = p - 0.5;
    if (std::fabs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        const double num =
            q * (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                      6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
                    1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
                  1.3314166789178437745e2) * r + 3.3871328727963666080e0);
        const double den =
            (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                  3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
                5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
              4.2313330701600911252e1) * r + 1.0);
        return num / den;
    }

    double r = (q < 0.0) ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double val;
    if (r <= 5.0) {
        r -= 1.6;
        const double num =
            (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                  2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
                3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
              4.63033784615654529590e0) * r + 1.42343711074968357734e0);
        const double den =
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                  1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
              2.05319162663775882187e0) * r + 1.0);
        val = num / den;
    } else {
        r -= 5.0;
        const double num =
            (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                  1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
              5.46378491116411436990e0) * r + 6.65790464350110377720e0);
        const double den =
            (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                  1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
              5.99832206555887937690e-1) * r + 1.0);
        val = num / den;
    }
    return (q < 0.0) ? -val : val;
}

double mean(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v;
    return x.empty() ? 0.0 : s / static_cast<double>(x.size());
}

double stdev(std::span<const double> x) {
    if (x.size() < 2) return 0.0;
    const double m = mean(x);
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

double median(std::vector<double> x) {
    if (x.empty()) return 0.0;
    std::sort(x.begin(), x.end());
    const std::size_t n = x.size();
    return (n % 2 == 1) ? x[n / 2] : 0.5 * (x[n / 2 - 1] + x[n / 2]);
}

double quantile(std::vector<double> x, double q) {
    if (x.empty()) return 0.0;
    std::sort(x.begin(), x.end());
    q = std::clamp(q, 0.0, 1.0);
    const double pos = q * static_cast<double>(x.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= x.size()) return x.back();
    const double frac = pos - static_cast<double>(lo);
    return x[lo] * (1.0 - frac) + x[lo + 1] * frac;
}

std::vector<double> moving_average(std::span<const double> y, int window) {
    const int n = static_cast<int>(y.size());
    std::vector<double> out(y.begin(), y.end());
    if (window < 3 || n < 3) return out;
    const int half = window / 2;
    for (int i = 0; i < n; ++i) {
        const int a = std::max(0, i - half);
        const int b = std::min(n - 1, i + half);
        double s = 0.0;
        for (int k = a; k <= b; ++k) s += y[static_cast<std::size_t>(k)];
        out[static_cast<std::size_t>(i)] = s / static_cast<double>(b - a + 1);
    }
    return out;
}

std::vector<double> gradient(std::span<const double> y, double dx) {
    const std::size_t n = y.size();
    std::vector<double> d(n, 0.0);
    if (n < 2) return d;
    d[0] = (y[1] - y[0]) / dx;
    d[n - 1] = (y[n - 1] - y[n - 2]) / dx;
    for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (y[i + 1] - y[i - 1]) / (2.0 * dx);
    return d;
}

double parabolic_offset(double y_left, double y_center, double y_right) {
    const double denom = y_left - 2.0 * y_center + y_right;
    if (denom == 0.0) return 0.0;
    return std::clamp(0.5 * (y_left - y_right) / denom, -1.0, 1.0);
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    LineFit f;
    const std::size_t n = std::min(x.size(), y.size());
    if (n < 2) return f;
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < n; ++i) { sx += x[i]; sy += y[i]; }
    const double mx = sx / static_cast<double>(n), my = sy / static_cast<double>(n);
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) return f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - (f.slope * x[i] + f.intercept);
        ss += r * r;
    }
    f.rms_residual = std::sqrt(ss / static_cast<double>(n));
    f.n_used = n;
    return f;
}

LineFit fit_line_robust(std::span<const double> x, std::span<const double> y) {
    LineFit f = fit_line(x, y);
    if (f.n_used < 4) return f;
    const std::size_t n = f.n_used;
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = y[i] - (f.slope * x[i] + f.intercept);
    const double med = median(r);
    std::vector<double> ad(n);
    for (std::size_t i = 0; i < n; ++i) ad[i] = std::fabs(r[i] - med);
    const double mad = median(ad);
    if (mad <= 0.0) return f;
    std::vector<double> xk, yk;
    for (std::size_t i = 0; i < n; ++i) {
        if (std::fabs(r[i] - med) <= 5.0 * 1.4826 * mad) {
            xk.push_back(x[i]);
            yk.push_back(y[i]);
        }
    }
    if (xk.size() < 2 || xk.size() == n) return f;
    return fit_line(xk, yk);
}

std::vector<double> power_spectrum(std::span<const double> y) {
    const std::size_t n = y.size();
    std::vector<double> power;
    if (n < 4) return power;
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double hann =
            0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                  static_cast<double>(n - 1)));
        w[i] = y[i] * hann;
    }
    const std::size_t kmax = n / 2;
    power.resize(kmax + 1, 0.0);
    for (std::size_t k = 0; k <= kmax; ++k) {
        double re = 0.0, im = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double ph = -2.0 * std::numbers::pi * static_cast<double>(k) *
                              static_cast<double>(i) / static_cast<double>(n);
            re += w[i] * std::cos(ph);
            im += w[i] * std::sin(ph);
        }
        power[k] = re * re + im * im;
    }
    return power;
}

} // namespace qdsim::num
