// Test-side reference numerics, implemented independently of the library:
// adaptive Simpson instead of Gauss-Legendre, lgamma-based beta density
// instead of boost.  Used to cross-check every frozen expected value.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

inline double simpson_rec(const std::function<double(double)>& f, double a,
                          double b, double fa, double fm, double fb,
                          double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol) {
        return left + right + (left + right - whole) / 15.0;
    }
    return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a,
                        double b, double tol = 1e-12) {
    if (!(b > a)) return 0.0;
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_rec(f, a, b, fa, fm, fb, whole, tol, 60);
}

// Integral split at interior breakpoints (for integrands with kinks).
inline double integrate_pieces(const std::function<double(double)>& f,
                               std::vector<double> cuts, double a, double b,
                               double tol = 1e-12) {
    cuts.push_back(a);
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        if (cuts[i] >= a && cuts[i + 1] <= b && cuts[i + 1] > cuts[i]) {
            acc += integrate(f, cuts[i], cuts[i + 1], tol);
        }
    }
    return acc;
}

inline double beta_pdf(double alpha, double beta, double x) {
    if (x <= 0.0 || x >= 1.0) return 0.0;
    const double logc =
        std::lgamma(alpha + beta) - std::lgamma(alpha) - std::lgamma(beta);
    return std::exp(logc + (alpha - 1.0) * std::log(x) +
                    (beta - 1.0) * std::log(1.0 - x));
}

inline double beta_cdf(double alpha, double beta, double x,
                       double tol = 1e-13) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    return integrate([&](double t) { return beta_pdf(alpha, beta, t); }, 0.0,
                     x, tol);
}

inline std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> xs;
    xs.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        xs.push_back(lo + (hi - lo) * static_cast<double>(i) /
                              static_cast<double>(n - 1));
    }
    return xs;
}

}  // namespace oracle
