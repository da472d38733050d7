#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

namespace auctionlab {

namespace detail {

// 64-point Gauss-Legendre rule on [-1, 1].  Nodes are the roots of the
// degree-64 Legendre polynomial, located by Newton iteration from the
// Chebyshev initial guess; weights are 2 / ((1 - x^2) P'(x)^2).  Computed
// once, at first use.
struct GaussLegendre64 {
    static constexpr int N = 64;
    std::array<double, N> node{};
    std::array<double, N> weight{};

    GaussLegendre64() {
        for (int i = 0; i < (N + 1) / 2; ++i) {
            double x = std::cos(M_PI * (static_cast<double>(i) + 0.75) /
                                (static_cast<double>(N) + 0.5));
            double dp = 1.0;
            for (int iter = 0; iter < 64; ++iter) {
                double p0 = 1.0;
                double p1 = x;
                for (int k = 2; k <= N; ++k) {
                    const double pk =
                        ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = pk;
                }
                dp = N * (x * p1 - p0) / (x * x - 1.0);
                const double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-16) break;
            }
            node[i] = -x;
            node[N - 1 - i] = x;
            const double w = 2.0 / ((1.0 - x * x) * dp * dp);
            weight[i] = w;
            weight[N - 1 - i] = w;
        }
    }
};

inline const GaussLegendre64& gl64() {
    static const GaussLegendre64 rule;
    return rule;
}

}  // namespace detail

// Single 64-node Gauss-Legendre panel over [a, b].
template <class F>
double gauss_panel(F&& f, double a, double b) {
    const auto& rule = detail::gl64();
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double sum = 0.0;
    for (int i = 0; i < detail::GaussLegendre64::N; ++i) {
        sum += rule.weight[i] * f(mid + half * rule.node[i]);
    }
    return half * sum;
}

struct QuadratureControl {
    double abs_tol = 1e-10;
    int max_depth = 40;
};

namespace detail {

template <class F>
double adapt_panel(F& f, double a, double b, double whole, double tol,
                   int depth) {
    const double mid = 0.5 * (a + b);
    const double left = gauss_panel(f, a, mid);
    const double right = gauss_panel(f, mid, b);
    const double split = left + right;
    if (std::abs(split - whole) <= tol || depth <= 0) return split;
    return adapt_panel(f, a, mid, left, 0.5 * tol, depth - 1) +
           adapt_panel(f, mid, b, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

// Adaptive integral of f over [a, b]: panels are bisected until the
// difference between one 64-node panel and its two halves falls below the
// absolute tolerance.
template <class F>
double integrate(F&& f, double a, double b, QuadratureControl ctl = {}) {
    if (!(b > a)) return 0.0;
    const double whole = gauss_panel(f, a, b);
    return detail::adapt_panel(f, a, b, whole, ctl.abs_tol, ctl.max_depth);
}

// Same, but the domain is split first at the supplied interior breakpoints
// (objective kinks, CDF knots) so no panel straddles a non-smooth point.
// Breakpoints outside (a, b) are ignored.
template <class F>
double integrate_with_breaks(F&& f, double a, double b,
                             std::vector<double> breaks,
                             QuadratureControl ctl = {}) {
    if (!(b > a)) return 0.0;
    std::erase_if(breaks, [&](double x) { return !(x > a && x < b); });
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
    breaks.push_back(b);

    QuadratureControl panel_ctl = ctl;
    panel_ctl.abs_tol = ctl.abs_tol / static_cast<double>(breaks.size());

    double total = 0.0;
    double lo = a;
    for (double hi : breaks) {
        total += integrate(f, lo, hi, panel_ctl);
        lo = hi;
    }
    return total;
}

}  // namespace auctionlab
