#include "qdsim/levmar.hpp"

#include <algorithm>
#include <cmath>

#include "qdsim/errors.hpp"

namespace qdsim::lm {

namespace {

// Gaussian elimination with partial pivoting; a is n x n row-major, b length n.
// Returns false on a singular system.
bool solve_dense(std::vector<double> a, std::vector<double> b, std::size_t n,
                 std::vector<double>& x) {
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::fabs(a[r * n + col]) > std::fabs(a[piv * n + col])) piv = r;
        if (std::fabs(a[piv * n + col]) < 1e-300) return false;
        if (piv != col) {
            for (std::size_t c = 0; c < n; ++c) std::swap(a[col * n + c], a[piv * n + c]);
            std::swap(b[col], b[piv]);
        }
        const double d = a[col * n + col];
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a[r * n + col] / d;
            if (f == 0.0) continue;
            for (std::size_t c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
            b[r] -= f * b[col];
        }
    }
    x.assign(n, 0.0);
    for (std::size_t ri = n; ri-- > 0;) {
        double s = b[ri];
        for (std::size_t c = ri + 1; c < n; ++c) s -= a[ri * n + c] * x[c];
        x[ri] = s / a[ri * n + ri];
    }
    return true;
}

void numeric_jacobian(const ResidualFn& f, std::span<const double> p, std::span<const double> r0,
                      std::size_t m, std::vector<double>& jac, std::vector<double>& scratch) {
    const std::size_t n = p.size();
    std::vector<double> pp(p.begin(), p.end());
    scratch.resize(m);
    for (std::size_t j = 0; j < n; ++j) {
        const double h = std::sqrt(1e-16) * std::max(std::fabs(pp[j]), 1.0);
        const double saved = pp[j];
        pp[j] = saved + h;
        f(pp, scratch);
        pp[j] = saved;
        for (std::size_t i = 0; i < m; ++i) jac[i * n + j] = (scratch[i] - r0[i]) / h;
    }
}

} // namespace

Result fit(const ResidualFn& residuals, const JacobianFn& jacobian, std::size_t m,
           std::vector<double> p0, const Options& opts) {
    const std::size_t n = p0.size();
    if (n == 0 || m < n) throw FitError("levmar: need at least as many residuals as parameters");

    Result res;
    res.params = std::move(p0);

    std::vector<double> r(m), rtry(m), jac(m * n), scratch;
    std::vector<double> jtj(n * n), g(n), step, ptry(n);

    residuals(res.params, r);
    double rss = 0.0;
    for (double v : r) rss += v * v;

    double lambda = opts.lambda0;
    double nu = 2.0;

    for (res.iterations = 0; res.iterations < opts.max_iterations; ++res.iterations) {
        if (jacobian) jacobian(res.params, jac);
        else numeric_jacobian(residuals, res.params, r, m, jac, scratch);

        std::fill(jtj.begin(), jtj.end(), 0.0);
        std::fill(g.begin(), g.end(), 0.0);
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t a = 0; a < n; ++a) {
                const double ja = jac[i * n + a];
                g[a] += ja * r[i];
                for (std::size_t b = a; b < n; ++b) jtj[a * n + b] += ja * jac[i * n + b];
            }
        }
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < a; ++b) jtj[a * n + b] = jtj[b * n + a];

        double gmax = 0.0;
        for (std::size_t a = 0; a < n; ++a) gmax = std::max(gmax, std::fabs(g[a]));
        if (gmax < opts.gtol * std::max(rss, 1e-300)) {
            res.converged = true;
            break;
        }

        bool accepted = false;
        for (int tries = 0; tries < 30 && !accepted; ++tries) {
            std::vector<double> damped = jtj;
            for (std::size_t a = 0; a < n; ++a) {
                const double d = std::max(jtj[a * n + a], 1e-300);
                damped[a * n + a] = jtj[a * n + a] + lambda * d;
            }
            std::vector<double> rhs(n);
            for (std::size_t a = 0; a < n; ++a) rhs[a] = -g[a];
            if (!solve_dense(damped, rhs, n, step)) {
                lambda *= nu;
                nu *= 2.0;
                continue;
            }
            for (std::size_t a = 0; a < n; ++a) ptry[a] = res.params[a] + step[a];
            residuals(ptry, rtry);
            double rss_try = 0.0;
            for (double v : rtry) rss_try += v * v;

            // gain ratio: actual decrease vs the damped-model prediction
            double pred = 0.0;
            for (std::size_t a = 0; a < n; ++a) {
                const double d = std::max(jtj[a * n + a], 1e-300);
                pred += step[a] * (lambda * d * step[a] - g[a]);
            }
            const double rho = (pred > 0.0) ? (rss - rss_try) / pred : (rss - rss_try);

            if (rss_try < rss) {
                double step_rel = 0.0;
                for (std::size_t a = 0; a < n; ++a)
                    step_rel = std::max(step_rel,
                                        std::fabs(step[a]) / std::max(std::fabs(ptry[a]), 1.0));
                const double drop = rss - rss_try;
                res.params = ptry;
                r = rtry;
                rss = rss_try;
                const double shrink = 1.0 - std::pow(2.0 * rho - 1.0, 3.0);
                lambda *= std::max(1.0 / 3.0, std::min(shrink, 1.0));
                nu = 2.0;
                accepted = true;
                if (drop <= opts.ftol * std::max(rss, 1e-300) || step_rel <= opts.xtol) {
                    res.converged = true;
                }
            } else {
                lambda *= nu;
                nu *= 2.0;
            }
        }
        if (!accepted || res.converged) {
            if (!accepted) res.converged = true; // stalled at a (local) minimum
            break;
        }
    }

    res.rss = rss;

    if (m > n) {
        // covariance = s^2 (J^T J)^-1 via column solves
        if (jacobian) jacobian(res.params, jac);
        else numeric_jacobian(residuals, res.params, r, m, jac, scratch);
        std::fill(jtj.begin(), jtj.end(), 0.0);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t a = 0; a < n; ++a)
                for (std::size_t b = a; b < n; ++b)
                    jtj[a * n + b] += jac[i * n + a] * jac[i * n + b];
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < a; ++b) jtj[a * n + b] = jtj[b * n + a];
        const double s2 = rss / static_cast<double>(m - n);
        res.stderrs.assign(n, 0.0);
        for (std::size_t a = 0; a < n; ++a) {
            std::vector<double> e(n, 0.0), col;
            e[a] = 1.0;
            if (solve_dense(jtj, e, n, col) && col[a] > 0.0)
                res.stderrs[a] = std::sqrt(s2 * col[a]);
        }
    }
    return res;
}

Result fit(const ResidualFn& residuals, std::size_t m, std::vector<double> p0,
           const Options& opts) {
    return fit(residuals, JacobianFn{}, m, std::move(p0), opts);
}

} // namespace qdsim::lm
