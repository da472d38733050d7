#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <exception>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "auctionlab/distributions.hpp"
#include "auctionlab/errors.hpp"
#include "auctionlab/parallel.hpp"

namespace auctionlab {

// Demand law with support [0, z_max]: a unit-interval base law rescaled to
// natural units.  Scenario files give the natural-unit parameters.
class DemandLaw {
public:
    static DemandLaw scaled(GenDistribution base, double z_max) {
        if (!(std::isfinite(z_max)) || z_max <= 0.0) {
            throw InvalidDistribution("demand scale z_max must be > 0");
        }
        return DemandLaw(std::move(base), z_max);
    }

    const GenDistribution& base() const { return base_; }
    double z_max() const { return z_max_; }
    double mean() const { return z_max_ * base_.mean(); }

    double cdf(double z) const {
        if (z < 0.0) return 0.0;
        if (z >= z_max_) return 1.0;
        return base_.cdf(z / z_max_);
    }

    // generalized inverse in natural units; quantile(0) = 0
    double quantile(double u) const { return z_max_ * base_.inverse_cdf(u); }
    double quantile_upper(double u) const {
        return z_max_ * base_.inverse_cdf_upper(u);
    }

    double sample(Rng& rng) const { return z_max_ * base_.sample(rng); }

    bool operator==(const DemandLaw&) const = default;

private:
    DemandLaw(GenDistribution base, double z_max)
        : base_(std::move(base)), z_max_(z_max) {}
    GenDistribution base_;
    double z_max_;
};

// Expected spot-market payment of a generator committed to y against its
// output law: lambda * E[(y - X)^+] = lambda * int_0^y F(x) dx.
inline double gen_cost(const GenDistribution& d, double lambda, double y) {
    if (!(y >= 0.0 && y <= 1.0)) {
        throw DomainError("generator quantity must lie in [0, 1]");
    }
    return lambda * d.cdf_integral(y);
}

// d/dy of gen_cost: lambda * F(y)
inline double gen_cost_deriv(const GenDistribution& d, double lambda,
                             double y) {
    if (!(y >= 0.0 && y <= 1.0)) {
        throw DomainError("generator quantity must lie in [0, 1]");
    }
    return lambda * d.cdf(y);
}

// Expected spot-market cost of covering residual demand beyond the
// committed total y: lambda * E[(Z - y)^+].
inline double agg_cost(const DemandLaw& z, double lambda, double y) {
    if (!(y >= 0.0)) {
        throw DomainError("committed total must be nonnegative");
    }
    const double t0 = y / z.z_max();
    if (t0 >= 1.0) return 0.0;
    // E[(Z - y)^+] = z_max * [(1 - t0) - int_{t0}^1 F_base]
    const double tail =
        (1.0 - t0) - (z.base().cdf_integral(1.0) - z.base().cdf_integral(t0));
    return lambda * z.z_max() * tail;
}

// d/dy of agg_cost: lambda * (F_Z(y) - 1), nonpositive
inline double agg_cost_deriv(const DemandLaw& z, double lambda, double y) {
    if (!(y >= 0.0)) {
        throw DomainError("committed total must be nonnegative");
    }
    return lambda * (z.cdf(y) - 1.0);
}

struct AssignmentPlayer {
    int player_id;
    GenDistribution type;
    bool operator==(const AssignmentPlayer&) const = default;
};

struct AssignmentProblem {
    AssignmentProblem(std::vector<AssignmentPlayer> players_, DemandLaw demand_,
                      double spot_price_)
        : players(std::move(players_)),
          demand(std::move(demand_)),
          spot_price(spot_price_) {
        if (players.empty()) throw NotEnoughBidders("need at least 1 player");
        if (!(std::isfinite(spot_price)) || spot_price <= 0.0) {
            throw SpecError("spot price must be > 0");
        }
        std::vector<int> ids;
        for (const auto& p : players) ids.push_back(p.player_id);
        std::sort(ids.begin(), ids.end());
        if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
            throw SpecError("duplicate player id");
        }
    }

    std::vector<AssignmentPlayer> players;
    DemandLaw demand;
    double spot_price;
};

// Quantities in problem order; multiplier is the common marginal-cost level
// mu = lambda * [1 - F_Z(total)] >= 0 shared by all interior players.
struct Assignment {
    std::vector<double> y;
    double total;
    double multiplier;
};

namespace detail {

// Solves the welfare program min sum_i gen_cost(i, y_i) + agg_cost(total)
// over y_i in [0, 1], with masked players pinned to 0.  Bisection on the
// normalized level u = mu / lambda: each player's response set at level u
// is [icdf_i(u), icdf_upper_i(u)] and the aggregate wants total in
// [Q(1-u), Q_upper(1-u)]; both set endpoints are monotone in u, so the
// predicate "lowest supply exceeds highest target" brackets the critical
// level, and a flat-fill pass in ascending position order pins the
// remaining slack from flat CDF stretches.
inline Assignment solve_swo_masked(const AssignmentProblem& p,
                                   const std::vector<char>* active) {
    const std::size_t n = p.players.size();
    const auto is_active = [&](std::size_t i) {
        return !active || (*active)[i] != 0;
    };

    const auto supply_lo = [&](double u) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (is_active(i)) s += p.players[i].type.inverse_cdf(u);
        }
        return s;
    };
    const auto target_lo = [&](double u) { return p.demand.quantile(1.0 - u); };
    const auto target_hi = [&](double u) {
        return p.demand.quantile_upper(1.0 - u);
    };

    // Build the candidate solution at level u: responses at the low ends,
    // then a flat-fill pass raising quantities toward the aggregate target
    // inside each player's indifference range, lowest position first.
    // Returns nothing if supply cannot balance the target at this level.
    const auto attempt = [&](double u) -> std::optional<Assignment> {
        std::vector<double> y(n, 0.0);
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (is_active(i)) {
                y[i] = p.players[i].type.inverse_cdf(u);
                total += y[i];
            }
        }
        const double t_lo = target_lo(u);
        const double t_hi = std::max(t_lo, target_hi(u));
        const double want = std::clamp(total, t_lo, t_hi);
        if (want > total) {
            double need = want - total;
            for (std::size_t i = 0; i < n && need > 0.0; ++i) {
                if (!is_active(i)) continue;
                const double room =
                    p.players[i].type.inverse_cdf_upper(u) - y[i];
                const double take = std::min(room, need);
                if (take > 0.0) {
                    y[i] += take;
                    total += take;
                    need -= take;
                }
            }
        }
        if (std::abs(total - std::clamp(total, t_lo, t_hi)) > 1e-9) {
            return std::nullopt;
        }
        return Assignment{std::move(y), total, p.spot_price * u};
    };

    // The corner u = 0 first: any balanced candidate satisfies the
    // optimality conditions outright, and evaluating the corner exactly
    // sidesteps the 1 - u rounding floor the bisection would hit when the
    // true level is 0.
    if (auto a = attempt(0.0)) return *a;

    // monotone predicate: supply floor above the largest consistent target
    const auto excess = [&](double u) {
        return supply_lo(u) > target_hi(u);
    };

    double u_lo = 0.0, u_hi = 1.0;
    if (!excess(u_hi)) {
        u_lo = u_hi;  // demand outstrips every unit of capacity
    } else {
        for (int it = 0; it < 200 && u_hi - u_lo > 0.0; ++it) {
            const double mid = 0.5 * (u_lo + u_hi);
            if (mid <= u_lo || mid >= u_hi) break;
            (excess(mid) ? u_hi : u_lo) = mid;
        }
    }
    if (auto a = attempt(u_lo)) return *a;
    if (auto a = attempt(u_hi)) return *a;
    throw SolverError("welfare bisection failed to balance supply");
}

}  // namespace detail

// Efficient risk-aware assignment: the unique optimum of the convex
// program min sum_i gen_cost + agg_cost.
inline Assignment solve_swo(const AssignmentProblem& p) {
    return detail::solve_swo_masked(p, nullptr);
}

struct VcgCompleteResult {
    Assignment assignment;
    std::vector<double> payments;  // w_i, problem order
};

// Complete-parametrization mechanism: players report full output laws, the
// reported-cost welfare program is solved, and each player receives the
// positive externality his presence creates: the others' cost relief plus
// the aggregate's, measured against the leave-one-out solution.
inline VcgCompleteResult run_vcg_complete(const AssignmentProblem& reported) {
    const std::size_t n = reported.players.size();
    auto full = solve_swo(reported);
    const double lambda = reported.spot_price;

    double full_others_cost = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        full_others_cost +=
            gen_cost(reported.players[j].type, lambda, full.y[j]);
    }
    const double full_agg = agg_cost(reported.demand, lambda, full.total);

    std::vector<double> w(n, 0.0);
    std::vector<std::exception_ptr> errs(n);
    parallel_for(n, [&](std::size_t i) {
        try {
            std::vector<char> active(n, 1);
            active[i] = 0;
            auto drop = detail::solve_swo_masked(reported, &active);
            double others = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                others += gen_cost(reported.players[j].type, lambda,
                                   drop.y[j]) -
                          gen_cost(reported.players[j].type, lambda,
                                   full.y[j]);
            }
            w[i] = others + agg_cost(reported.demand, lambda, drop.total) -
                   full_agg;
        } catch (...) {
            errs[i] = std::current_exception();
        }
    });
    for (auto& e : errs) {
        if (e) std::rethrow_exception(e);
    }
    return VcgCompleteResult{std::move(full), std::move(w)};
}

// Two-dimensional bid: an ask price and a capacity offered at that price.
struct TwoDimBid {
    int player_id;
    double ask_price;     // >= 0
    double max_quantity;  // in [0, 1]

    bool operator==(const TwoDimBid&) const = default;
};

struct IvcgResult {
    Assignment assignment;
    std::vector<double> payments;  // w_i, bid order
};

namespace detail {

inline void validate_bids(std::span<const TwoDimBid> bids) {
    if (bids.empty()) throw NotEnoughBidders("need at least 1 bid");
    std::vector<int> ids;
    for (const auto& b : bids) {
        if (!(std::isfinite(b.ask_price)) || b.ask_price < 0.0) {
            throw InvalidCostReport("ask price must be >= 0");
        }
        if (!(b.max_quantity >= 0.0 && b.max_quantity <= 1.0)) {
            throw InvalidCostReport("offered quantity must lie in [0, 1]");
        }
        ids.push_back(b.player_id);
    }
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
        throw SpecError("duplicate player id");
    }
}

// Greedy exact solver for min sum_i beta_i y_i + agg_cost(total) with
// y_i <= cap_i: cheapest asks fill first, each up to the level where the
// aggregate's marginal saving stops strictly exceeding the ask.  Masked
// players have their cap treated as 0.
inline std::vector<double> ivcg_allocate(std::span<const TwoDimBid> bids,
                                         const DemandLaw& demand,
                                         double lambda,
                                         const std::vector<char>* active) {
    std::vector<std::size_t> order(bids.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (bids[a].ask_price != bids[b].ask_price) {
            return bids[a].ask_price < bids[b].ask_price;
        }
        return bids[a].player_id < bids[b].player_id;
    });

    std::vector<double> y(bids.size(), 0.0);
    double accum = 0.0;
    for (std::size_t pos : order) {
        if (active && (*active)[pos] == 0) continue;
        const double u = std::max(0.0, 1.0 - bids[pos].ask_price / lambda);
        // last total where carrying one more unit strictly beats the spot
        const double stop = demand.quantile(u);
        if (stop <= accum) continue;
        const double take = std::min(bids[pos].max_quantity, stop - accum);
        y[pos] = take;
        accum += take;
    }
    return y;
}

}  // namespace detail

// Incomplete-parametrization mechanism on two-dimensional bids: the linear
// reported costs make the welfare program a greedy fill, and payments are
// again the positive externality against the leave-one-out fill.
inline IvcgResult run_ivcg(std::span<const TwoDimBid> bids,
                           const DemandLaw& demand, double lambda) {
    detail::validate_bids(bids);
    if (!(std::isfinite(lambda)) || lambda <= 0.0) {
        throw SpecError("spot price must be > 0");
    }
    const std::size_t n = bids.size();
    auto y = detail::ivcg_allocate(bids, demand, lambda, nullptr);
    double total = 0.0;
    for (double v : y) total += v;
    const double full_agg = agg_cost(demand, lambda, total);

    std::vector<double> w(n, 0.0);
    std::vector<std::exception_ptr> errs(n);
    parallel_for(n, [&](std::size_t i) {
        try {
            std::vector<char> active(n, 1);
            active[i] = 0;
            auto drop = detail::ivcg_allocate(bids, demand, lambda, &active);
            double drop_total = 0.0, others = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                drop_total += drop[j];
                if (j != i) others += bids[j].ask_price * (drop[j] - y[j]);
            }
            w[i] = others + agg_cost(demand, lambda, drop_total) - full_agg;
        } catch (...) {
            errs[i] = std::current_exception();
        }
    });
    for (auto& e : errs) {
        if (e) std::rethrow_exception(e);
    }

    // mu at the realized total, for symmetry with the welfare solver
    const double mu = std::max(0.0, -agg_cost_deriv(demand, lambda, total));
    return IvcgResult{Assignment{std::move(y), total, mu}, std::move(w)};
}

// The equilibrium bid profile that makes the two-dimensional mechanism
// reproduce the efficient assignment: every player asks the common
// marginal-cost level and caps at his efficient quantity.
inline std::vector<TwoDimBid> efficient_bid_profile(
    const AssignmentProblem& p) {
    auto eff = solve_swo(p);
    std::vector<TwoDimBid> bids;
    bids.reserve(p.players.size());
    for (std::size_t i = 0; i < p.players.size(); ++i) {
        bids.push_back(
            {p.players[i].player_id, eff.multiplier, eff.y[i]});
    }
    return bids;
}

}  // namespace auctionlab
