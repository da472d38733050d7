#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "auctionlab/distributions.hpp"
#include "auctionlab/errors.hpp"

namespace auctionlab {

struct ObjectiveKnot {
    double x;
    double y;
    bool operator==(const ObjectiveKnot&) const = default;
};

// Valuation objective h on [0, 1]: maps a delivered fraction of capacity to
// value.  Shortfall-penalty mechanisms additionally require h to be
// nonnegative and nondecreasing; see nonnegative_nondecreasing().
class ObjectiveFn {
public:
    struct Identity {
        bool operator==(const Identity&) const = default;
    };
    struct CappedDemand {
        double cap;  // h(x) = min(x, cap)
        bool operator==(const CappedDemand&) const = default;
    };
    struct Monomial {
        int degree;  // h(x) = x^n
        bool operator==(const Monomial&) const = default;
    };
    struct PiecewiseLinear {
        std::vector<ObjectiveKnot> knots;
        bool operator==(const PiecewiseLinear&) const = default;
    };
    struct AffineClip {
        double intercept;  // h(x) = intercept + slope * x, domain clipped to [0, 1]
        double slope;
        bool operator==(const AffineClip&) const = default;
    };
    using Value =
        std::variant<Identity, CappedDemand, Monomial, PiecewiseLinear,
                     AffineClip>;

    static ObjectiveFn identity() { return ObjectiveFn(Identity{}); }

    static ObjectiveFn capped_demand(double cap) {
        if (!std::isfinite(cap) || cap < 0.0 || cap > 1.0) {
            throw ObjectiveDomainError("capped demand level must lie in [0, 1]");
        }
        return ObjectiveFn(CappedDemand{cap});
    }

    static ObjectiveFn monomial(int degree) {
        if (degree < 1) {
            throw ObjectiveDomainError("monomial degree must be >= 1");
        }
        return ObjectiveFn(Monomial{degree});
    }

    static ObjectiveFn piecewise_linear(std::vector<ObjectiveKnot> knots) {
        if (knots.size() < 2) {
            throw ObjectiveDomainError("piecewise objective needs >= 2 knots");
        }
        for (const auto& k : knots) {
            if (!(std::isfinite(k.x) && std::isfinite(k.y))) {
                throw ObjectiveDomainError("objective knot not finite");
            }
        }
        if (knots.front().x != 0.0 || knots.back().x != 1.0) {
            throw ObjectiveDomainError("objective knots must span [0, 1]");
        }
        for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
            if (!(knots[k + 1].x > knots[k].x)) {
                throw ObjectiveDomainError(
                    "objective knot x must strictly increase");
            }
        }
        return ObjectiveFn(PiecewiseLinear{std::move(knots)});
    }

    static ObjectiveFn affine_clip(double intercept, double slope) {
        if (!(std::isfinite(intercept) && std::isfinite(slope))) {
            throw ObjectiveDomainError("affine objective needs finite params");
        }
        return ObjectiveFn(AffineClip{intercept, slope});
    }

    const Value& value() const { return v_; }
    bool operator==(const ObjectiveFn&) const = default;

    const char* kind_name() const {
        switch (v_.index()) {
            case 0: return "identity";
            case 1: return "capped_demand";
            case 2: return "monomial";
            case 3: return "piecewise_linear";
            default: return "affine_clip";
        }
    }

    double eval(double x) const {
        if (!(x >= 0.0 && x <= 1.0)) {
            throw DomainError("objective evaluated outside [0, 1]");
        }
        if (std::get_if<Identity>(&v_)) return x;
        if (const auto* c = std::get_if<CappedDemand>(&v_)) {
            return std::min(x, c->cap);
        }
        if (const auto* m = std::get_if<Monomial>(&v_)) {
            double r = 1.0;
            for (int i = 0; i < m->degree; ++i) r *= x;
            return r;
        }
        if (const auto* a = std::get_if<AffineClip>(&v_)) {
            return a->intercept + a->slope * x;
        }
        const auto& knots = std::get<PiecewiseLinear>(v_).knots;
        std::size_t k = 0;
        while (k + 2 < knots.size() && knots[k + 1].x <= x) ++k;
        const auto& a = knots[k];
        const auto& b = knots[k + 1];
        return a.y + (b.y - a.y) * (x - a.x) / (b.x - a.x);
    }

    // Value at full delivery, h(1); the anchor of penalty pricing.
    double at_full_capacity() const { return eval(1.0); }

    // True when h is admissible for shortfall-penalty mechanisms:
    // nonnegative and nondecreasing on [0, 1].  Decided from parameters,
    // not by sampling.
    bool nonnegative_nondecreasing() const {
        if (std::get_if<Identity>(&v_)) return true;
        if (std::get_if<CappedDemand>(&v_)) return true;
        if (std::get_if<Monomial>(&v_)) return true;
        if (const auto* a = std::get_if<AffineClip>(&v_)) {
            return a->intercept >= 0.0 && a->slope >= 0.0;
        }
        const auto& knots = std::get<PiecewiseLinear>(v_).knots;
        if (knots.front().y < 0.0) return false;
        for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
            if (knots[k + 1].y < knots[k].y) return false;
        }
        return true;
    }

    // Interior points where h is not differentiable.
    std::vector<double> kinks() const {
        if (const auto* c = std::get_if<CappedDemand>(&v_)) {
            if (c->cap > 0.0 && c->cap < 1.0) return {c->cap};
            return {};
        }
        if (const auto* p = std::get_if<PiecewiseLinear>(&v_)) {
            std::vector<double> xs;
            for (std::size_t k = 1; k + 1 < p->knots.size(); ++k) {
                xs.push_back(p->knots[k].x);
            }
            return xs;
        }
        return {};
    }

    // Piecewise-linear representation when one exists; lets expectations
    // against uniform and piecewise-CDF laws be computed exactly.
    std::optional<std::vector<ObjectiveKnot>> to_knots() const {
        if (std::get_if<Identity>(&v_)) {
            return std::vector<ObjectiveKnot>{{0.0, 0.0}, {1.0, 1.0}};
        }
        if (const auto* c = std::get_if<CappedDemand>(&v_)) {
            if (c->cap <= 0.0) {
                return std::vector<ObjectiveKnot>{{0.0, 0.0}, {1.0, 0.0}};
            }
            if (c->cap >= 1.0) {
                return std::vector<ObjectiveKnot>{{0.0, 0.0}, {1.0, 1.0}};
            }
            return std::vector<ObjectiveKnot>{
                {0.0, 0.0}, {c->cap, c->cap}, {1.0, c->cap}};
        }
        if (const auto* m = std::get_if<Monomial>(&v_)) {
            if (m->degree == 1) {
                return std::vector<ObjectiveKnot>{{0.0, 0.0}, {1.0, 1.0}};
            }
            return std::nullopt;
        }
        if (const auto* a = std::get_if<AffineClip>(&v_)) {
            return std::vector<ObjectiveKnot>{
                {0.0, a->intercept}, {1.0, a->intercept + a->slope}};
        }
        return std::get<PiecewiseLinear>(v_).knots;
    }

private:
    explicit ObjectiveFn(Value v) : v_(std::move(v)) {}
    Value v_;
};

namespace detail {

// Exact integral of the piecewise-linear function through `knots` times a
// constant density over [lo, hi].
inline double trapezoid_against(const std::vector<ObjectiveKnot>& knots,
                                const ObjectiveFn& h, double lo, double hi) {
    std::vector<double> xs{lo, hi};
    for (const auto& k : knots) {
        if (k.x > lo && k.x < hi) xs.push_back(k.x);
    }
    std::sort(xs.begin(), xs.end());
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        acc += 0.5 * (h.eval(xs[i]) + h.eval(xs[i + 1])) * (xs[i + 1] - xs[i]);
    }
    return acc;
}

}  // namespace detail

// E[h(X)] under the reported law d.  Exact for point masses, monomials and
// every piecewise-linear h against uniform or piecewise-CDF laws; otherwise
// adaptive quadrature with panels split at the kinks of h.
inline double expect(const GenDistribution& d, const ObjectiveFn& h,
                     double abs_tol = 1e-10) {
    if (const auto* p =
            std::get_if<GenDistribution::PointMass>(&d.value())) {
        return h.eval(p->c);
    }
    if (const auto* m = std::get_if<ObjectiveFn::Monomial>(&h.value())) {
        return d.moment(m->degree);
    }
    if (std::get_if<ObjectiveFn::Identity>(&h.value())) {
        return d.mean();
    }
    const auto knots = h.to_knots();
    if (knots) {
        if (const auto* u =
                std::get_if<GenDistribution::Uniform>(&d.value())) {
            return detail::trapezoid_against(*knots, h, u->lo, u->hi) /
                   (u->hi - u->lo);
        }
        if (const auto* pw =
                std::get_if<GenDistribution::PiecewiseCdf>(&d.value())) {
            double acc = 0.0;
            for (std::size_t k = 0; k + 1 < pw->knots.size(); ++k) {
                const auto& a = pw->knots[k];
                const auto& b = pw->knots[k + 1];
                if (b.x > a.x) {
                    const double density = (b.F - a.F) / (b.x - a.x);
                    if (density > 0.0) {
                        acc += density *
                               detail::trapezoid_against(*knots, h, a.x, b.x);
                    }
                } else if (b.F > a.F) {
                    acc += (b.F - a.F) * h.eval(a.x);
                }
            }
            return acc;
        }
    }
    return d.expect_of([&](double x) { return h.eval(x); }, h.kinks(),
                       abs_tol);
}

}  // namespace auctionlab
