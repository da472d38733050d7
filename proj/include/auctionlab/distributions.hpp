#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <boost/math/distributions/beta.hpp>

#include "auctionlab/errors.hpp"
#include "auctionlab/quadrature.hpp"
#include "auctionlab/rng.hpp"

namespace auctionlab {

// One knot of a piecewise-linear CDF: F(x) = F at x.  Two knots sharing an
// x describe an atom (a jump of mass F_hi - F_lo at that point).
struct CdfKnot {
    double x;
    double F;
    bool operator==(const CdfKnot&) const = default;
};

// A reported capacity law on [0, 1].  Supported families: Uniform(a, b),
// Beta(alpha, beta), PointMass(c) and an explicit piecewise-linear CDF.
//
// All queries are exact where a closed form exists (moments, CDF integrals,
// expectations of piecewise-linear functions); everything else goes through
// adaptive Gauss-Legendre quadrature with kink-aware panel splitting.
class GenDistribution {
public:
    struct Uniform {
        double lo;
        double hi;
        bool operator==(const Uniform&) const = default;
    };
    struct Beta {
        double alpha;
        double beta;
        bool operator==(const Beta&) const = default;
    };
    struct PointMass {
        double c;
        bool operator==(const PointMass&) const = default;
    };
    struct PiecewiseCdf {
        std::vector<CdfKnot> knots;
        bool operator==(const PiecewiseCdf&) const = default;
    };
    using Value = std::variant<Uniform, Beta, PointMass, PiecewiseCdf>;

    static GenDistribution uniform(double lo, double hi) {
        if (!(std::isfinite(lo) && std::isfinite(hi)) || lo < 0.0 ||
            hi > 1.0 || !(lo < hi)) {
            throw InvalidDistribution(
                "uniform needs 0 <= a < b <= 1, got a=" + std::to_string(lo) +
                " b=" + std::to_string(hi));
        }
        return GenDistribution(Uniform{lo, hi});
    }

    static GenDistribution beta(double alpha, double beta) {
        if (!(std::isfinite(alpha) && std::isfinite(beta)) || !(alpha > 0.0) ||
            !(beta > 0.0)) {
            throw InvalidDistribution("beta needs alpha > 0 and beta > 0");
        }
        return GenDistribution(Beta{alpha, beta});
    }

    static GenDistribution point_mass(double c) {
        if (!std::isfinite(c) || c < 0.0 || c > 1.0) {
            throw InvalidDistribution("point mass location must lie in [0, 1]");
        }
        return GenDistribution(PointMass{c});
    }

    static GenDistribution piecewise_linear_cdf(std::vector<CdfKnot> knots) {
        validate_knots(knots);
        return GenDistribution(PiecewiseCdf{std::move(knots)});
    }

    const Value& value() const { return v_; }
    bool operator==(const GenDistribution&) const = default;

    const char* family_name() const {
        switch (v_.index()) {
            case 0: return "uniform";
            case 1: return "beta";
            case 2: return "point_mass";
            default: return "piecewise_linear_cdf";
        }
    }

    // Right-continuous CDF, defined for any real x (0 below the unit
    // interval, 1 above it).
    double cdf(double x) const {
        if (const auto* u = std::get_if<Uniform>(&v_)) {
            if (x <= u->lo) return 0.0;
            if (x >= u->hi) return 1.0;
            return (x - u->lo) / (u->hi - u->lo);
        }
        if (const auto* b = std::get_if<Beta>(&v_)) {
            if (x <= 0.0) return 0.0;
            if (x >= 1.0) return 1.0;
            return boost::math::cdf(
                boost::math::beta_distribution<double>(b->alpha, b->beta), x);
        }
        if (const auto* p = std::get_if<PointMass>(&v_)) {
            return x >= p->c ? 1.0 : 0.0;
        }
        const auto& knots = std::get<PiecewiseCdf>(v_).knots;
        if (x < knots.front().x) return 0.0;
        if (x >= knots.back().x) return 1.0;
        // Last knot at or left of x gives the right-continuous value; a
        // vertical run of knots at x collapses to the topmost one.
        std::size_t k = 0;
        while (k + 1 < knots.size() && knots[k + 1].x <= x) ++k;
        if (k + 1 == knots.size() || knots[k].x == x) return knots[k].F;
        const auto& a = knots[k];
        const auto& b = knots[k + 1];
        return a.F + (b.F - a.F) * (x - a.x) / (b.x - a.x);
    }

    // Generalized inverse inf{x in [0, 1] : F(x) >= u}.  Monotone in u;
    // u = 0 returns 0 (the infimum of the ambient interval) for every
    // family, and flat stretches of F resolve to their left endpoint.
    double inverse_cdf(double u) const {
        if (!(u >= 0.0 && u <= 1.0)) {
            throw InvalidProbability("inverse_cdf needs u in [0, 1]");
        }
        if (u == 0.0) return 0.0;
        if (const auto* uf = std::get_if<Uniform>(&v_)) {
            return uf->lo + u * (uf->hi - uf->lo);
        }
        if (const auto* b = std::get_if<Beta>(&v_)) {
            if (u == 1.0) return 1.0;
            return boost::math::quantile(
                boost::math::beta_distribution<double>(b->alpha, b->beta), u);
        }
        if (const auto* p = std::get_if<PointMass>(&v_)) {
            return p->c;
        }
        const auto& knots = std::get<PiecewiseCdf>(v_).knots;
        for (std::size_t k = 0; k < knots.size(); ++k) {
            if (knots[k].F >= u) {
                if (k == 0 || knots[k].x == knots[k - 1].x ||
                    knots[k].F == knots[k - 1].F) {
                    return knots[k].x;
                }
                const auto& a = knots[k - 1];
                const auto& b = knots[k];
                return a.x + (u - a.F) * (b.x - a.x) / (b.F - a.F);
            }
        }
        return knots.back().x;
    }

    double mean() const { return moment(1); }

    // E[X^n], exact for every family.
    double moment(int n) const {
        if (n < 0) throw SpecError("moment order must be nonnegative");
        if (n == 0) return 1.0;
        if (const auto* u = std::get_if<Uniform>(&v_)) {
            // (b^{n+1} - a^{n+1}) / ((n + 1)(b - a))
            return (ipow(u->hi, n + 1) - ipow(u->lo, n + 1)) /
                   ((n + 1) * (u->hi - u->lo));
        }
        if (const auto* b = std::get_if<Beta>(&v_)) {
            double m = 1.0;
            for (int k = 0; k < n; ++k) {
                m *= (b->alpha + k) / (b->alpha + b->beta + k);
            }
            return m;
        }
        if (const auto* p = std::get_if<PointMass>(&v_)) {
            return ipow(p->c, n);
        }
        const auto& knots = std::get<PiecewiseCdf>(v_).knots;
        double m = 0.0;
        for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
            const auto& a = knots[k];
            const auto& b = knots[k + 1];
            if (b.x > a.x) {
                const double density = (b.F - a.F) / (b.x - a.x);
                m += density * (ipow(b.x, n + 1) - ipow(a.x, n + 1)) / (n + 1);
            } else {
                m += (b.F - a.F) * ipow(a.x, n);
            }
        }
        return m;
    }

    // Integral of the CDF from 0 to y, for y in [0, 1].  Equals the
    // expected shortfall E[(y - X)^+].
    double cdf_integral(double y) const {
        if (!(y >= 0.0 && y <= 1.0)) {
            throw DomainError("cdf_integral needs y in [0, 1]");
        }
        if (const auto* u = std::get_if<Uniform>(&v_)) {
            if (y <= u->lo) return 0.0;
            const double ramp =
                (std::min(y, u->hi) - u->lo) * (std::min(y, u->hi) - u->lo) /
                (2.0 * (u->hi - u->lo));
            return y <= u->hi ? ramp : ramp + (y - u->hi);
        }
        if (const auto* b = std::get_if<Beta>(&v_)) {
            // int_0^y F = y I_y(a, b) - mean * I_y(a + 1, b)
            if (y == 0.0) return 0.0;
            const double iy = boost::math::ibeta(b->alpha, b->beta, y);
            const double iy1 = boost::math::ibeta(b->alpha + 1.0, b->beta, y);
            return y * iy - b->alpha / (b->alpha + b->beta) * iy1;
        }
        if (const auto* p = std::get_if<PointMass>(&v_)) {
            return std::max(0.0, y - p->c);
        }
        const auto& knots = std::get<PiecewiseCdf>(v_).knots;
        double acc = 0.0;
        for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
            const auto& a = knots[k];
            const auto& b = knots[k + 1];
            if (y <= a.x) break;
            const double hi = std::min(y, b.x);
            if (hi > a.x) {
                const double f_hi =
                    a.F + (b.F - a.F) * (hi - a.x) / (b.x - a.x);
                acc += 0.5 * (a.F + f_hi) * (hi - a.x);
            }
        }
        return acc;
    }

    // A so-called upper inverse sup{x in [0, 1] : F(x) <= u}; only differs
    // from inverse_cdf across jumps.  Used by allocation solvers to extend
    // a response along a flat stretch.
    double inverse_cdf_upper(double u) const {
        if (!(u >= 0.0 && u <= 1.0)) {
            throw InvalidProbability("inverse_cdf_upper needs u in [0, 1]");
        }
        if (u >= 1.0) return 1.0;
        if (const auto* uf = std::get_if<Uniform>(&v_)) {
            return uf->lo + u * (uf->hi - uf->lo);
        }
        if (const auto* b = std::get_if<Beta>(&v_)) {
            if (u == 0.0) return 0.0;
            return boost::math::quantile(
                boost::math::beta_distribution<double>(b->alpha, b->beta), u);
        }
        if (const auto* p = std::get_if<PointMass>(&v_)) {
            return p->c;
        }
        const auto& knots = std::get<PiecewiseCdf>(v_).knots;
        double best = 0.0;
        for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
            const auto& a = knots[k];
            const auto& b = knots[k + 1];
            if (a.F <= u && b.F <= u) {
                best = b.x;
            } else if (a.F <= u && b.F > u && b.x > a.x) {
                best = a.x + (u - a.F) * (b.x - a.x) / (b.F - a.F);
            } else if (a.F > u) {
                break;
            }
        }
        return best;
    }

    // Inverse-CDF sampling; bit-reproducible for a given Rng state.
    double sample(Rng& rng) const { return inverse_cdf(rng.uniform01()); }

    // E[h(X)] for an arbitrary callable.  `h_breaks` lists the kinks of h
    // so quadrature panels are split there first.
    template <class H>
    double expect_of(H&& h, std::span<const double> h_breaks = {},
                     double abs_tol = 1e-10) const {
        if (const auto* p = std::get_if<PointMass>(&v_)) {
            return h(p->c);
        }
        std::vector<double> breaks(h_breaks.begin(), h_breaks.end());
        QuadratureControl ctl;
        ctl.abs_tol = abs_tol;
        if (const auto* u = std::get_if<Uniform>(&v_)) {
            const double width = u->hi - u->lo;
            return integrate_with_breaks([&](double x) { return h(x); },
                                         u->lo, u->hi, std::move(breaks),
                                         ctl) /
                   width;
        }
        if (const auto* b = std::get_if<Beta>(&v_)) {
            boost::math::beta_distribution<double> dist(b->alpha, b->beta);
            if (b->alpha >= 1.0 && b->beta >= 1.0) {
                return integrate_with_breaks(
                    [&](double x) { return h(x) * boost::math::pdf(dist, x); },
                    0.0, 1.0, std::move(breaks), ctl);
            }
            // A shape parameter below 1 makes the density blow up at that
            // endpoint and adaptive bisection never converges there.  Split
            // at 1/2 and substitute t = x^alpha (resp. s = (1-x)^beta) on
            // the singular side; the transformed integrand is bounded.
            const double al = b->alpha;
            const double be = b->beta;
            const double norm =
                1.0 / boost::math::beta(al, be);  // 1 / B(alpha, beta)
            QuadratureControl half_ctl = ctl;
            half_ctl.abs_tol = 0.5 * ctl.abs_tol;
            double acc = 0.0;
            if (al >= 1.0) {
                acc += integrate_with_breaks(
                    [&](double x) { return h(x) * boost::math::pdf(dist, x); },
                    0.0, 0.5, breaks, half_ctl);
            } else {
                std::vector<double> tb;
                for (double x : breaks) {
                    if (x > 0.0 && x < 0.5) tb.push_back(std::pow(x, al));
                }
                acc += (norm / al) *
                       integrate_with_breaks(
                           [&](double t) {
                               const double x = std::pow(t, 1.0 / al);
                               return h(x) * std::pow(1.0 - x, be - 1.0);
                           },
                           0.0, std::pow(0.5, al), std::move(tb), half_ctl);
            }
            if (be >= 1.0) {
                acc += integrate_with_breaks(
                    [&](double x) { return h(x) * boost::math::pdf(dist, x); },
                    0.5, 1.0, breaks, half_ctl);
            } else {
                std::vector<double> sb;
                for (double x : breaks) {
                    if (x > 0.5 && x < 1.0) sb.push_back(std::pow(1.0 - x, be));
                }
                acc += (norm / be) *
                       integrate_with_breaks(
                           [&](double s) {
                               const double x = 1.0 - std::pow(s, 1.0 / be);
                               return h(x) * std::pow(x, al - 1.0);
                           },
                           0.0, std::pow(0.5, be), std::move(sb), half_ctl);
            }
            return acc;
        }
        const auto& knots = std::get<PiecewiseCdf>(v_).knots;
        QuadratureControl seg_ctl = ctl;
        seg_ctl.abs_tol = ctl.abs_tol / static_cast<double>(knots.size());
        double acc = 0.0;
        for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
            const auto& a = knots[k];
            const auto& b = knots[k + 1];
            if (b.x > a.x) {
                const double density = (b.F - a.F) / (b.x - a.x);
                if (density > 0.0) {
                    acc += density *
                           integrate_with_breaks([&](double x) { return h(x); },
                                                 a.x, b.x, breaks, seg_ctl);
                }
            } else if (b.F > a.F) {
                acc += (b.F - a.F) * h(a.x);
            }
        }
        return acc;
    }

    // x-locations where the CDF is not smooth; callers integrating against
    // this law split panels here.
    std::vector<double> smoothness_breaks() const {
        if (const auto* u = std::get_if<Uniform>(&v_)) return {u->lo, u->hi};
        if (const auto* p = std::get_if<PointMass>(&v_)) return {p->c};
        if (const auto* pw = std::get_if<PiecewiseCdf>(&v_)) {
            std::vector<double> xs;
            for (const auto& k : pw->knots) xs.push_back(k.x);
            return xs;
        }
        return {};
    }

private:
    explicit GenDistribution(Value v) : v_(std::move(v)) {}

    static double ipow(double x, int n) {
        double r = 1.0;
        for (int i = 0; i < n; ++i) r *= x;
        return r;
    }

    static void validate_knots(const std::vector<CdfKnot>& knots) {
        if (knots.size() < 2) {
            throw InvalidDistribution("piecewise CDF needs at least 2 knots");
        }
        for (const auto& k : knots) {
            if (!(std::isfinite(k.x) && std::isfinite(k.F))) {
                throw InvalidDistribution("piecewise CDF knot not finite");
            }
        }
        if (knots.front().x != 0.0 || knots.front().F != 0.0) {
            throw InvalidDistribution("piecewise CDF must start at (0, 0)");
        }
        if (knots.back().x != 1.0 || knots.back().F != 1.0) {
            throw InvalidDistribution("piecewise CDF must end at (1, 1)");
        }
        for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
            if (knots[k + 1].x < knots[k].x) {
                throw InvalidDistribution("piecewise CDF x must not decrease");
            }
            if (knots[k + 1].F < knots[k].F) {
                throw InvalidDistribution("piecewise CDF F must not decrease");
            }
        }
    }

    Value v_;
};

}  // namespace auctionlab
