#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "auctionlab/assignment.hpp"
#include "auctionlab/bundled_auction.hpp"
#include "auctionlab/distributions.hpp"
#include "auctionlab/errors.hpp"
#include "auctionlab/parallel.hpp"
#include "auctionlab/rng.hpp"
#include "auctionlab/single_auction.hpp"
#include "auctionlab/tso_auction.hpp"

// Numerical verification engines: deviation search over report grids with
// quadrature-exact expected payoffs, seeded Monte Carlo settlement for
// revenue consistency, moment audits, and a brute-force welfare oracle.
// Sampling noise would mask sub-1e-6 incentive violations, so only
// mc_revenue draws samples; every payoff here is integrated.

namespace auctionlab {

struct DeviationReport {
    int player_id;
    double truthful_payoff;
    std::vector<double> best_deviation;  // parameters of the best candidate
    double best_deviation_payoff;
    double gain;  // best_deviation_payoff - truthful_payoff
    std::string grid_spec;
};

struct McEstimate {
    double estimate;
    double std_error;
    std::int64_t trials;
};

struct MomentAuditResult {
    std::optional<int> first_differing_moment;
    int max_checked;
};

// Flattened parameter vector of a law, for deviation reports.
inline std::vector<double> law_params(const GenDistribution& d) {
    return std::visit(
        [](const auto& v) -> std::vector<double> {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, GenDistribution::Uniform>) {
                return {v.lo, v.hi};
            } else if constexpr (std::is_same_v<T, GenDistribution::Beta>) {
                return {v.alpha, v.beta};
            } else if constexpr (std::is_same_v<T,
                                                GenDistribution::PointMass>) {
                return {v.c};
            } else {
                std::vector<double> out;
                for (const auto& k : v.knots) {
                    out.push_back(k.x);
                    out.push_back(k.F);
                }
                return out;
            }
        },
        d.value());
}

inline std::vector<double> cost_params(const TsoCost& c) {
    if (const auto* a = std::get_if<TsoCost::Affine>(&c.value())) {
        return {a->gamma, a->kappa};
    }
    const auto& q = std::get<TsoCost::Quadratic>(c.value());
    return {q.gamma1, q.gamma2};
}

// ---- deviation candidate grids ------------------------------------------

// n point masses evenly spaced over [0, 1]
inline std::vector<GenDistribution> point_mass_grid(int n) {
    if (n < 2) throw SpecError("grid needs at least 2 points");
    std::vector<GenDistribution> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        out.push_back(
            GenDistribution::point_mass(static_cast<double>(k) / (n - 1)));
    }
    return out;
}

// all uniform laws with endpoints on an n-point axis, lo < hi
inline std::vector<GenDistribution> uniform_family_grid(int n) {
    if (n < 2) throw SpecError("grid needs at least 2 points");
    std::vector<GenDistribution> out;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            out.push_back(GenDistribution::uniform(
                static_cast<double>(i) / (n - 1),
                static_cast<double>(j) / (n - 1)));
        }
    }
    return out;
}

// n-by-n grid of beta laws with both shapes on [lo_param, hi_param]
inline std::vector<GenDistribution> beta_family_grid(int n,
                                                     double lo_param = 0.4,
                                                     double hi_param = 4.0) {
    if (n < 2) throw SpecError("grid needs at least 2 points");
    if (!(lo_param > 0.0 && hi_param > lo_param)) {
        throw SpecError("beta grid needs 0 < lo_param < hi_param");
    }
    std::vector<GenDistribution> out;
    out.reserve(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double a =
                lo_param + (hi_param - lo_param) * i / (n - 1);
            const double b =
                lo_param + (hi_param - lo_param) * j / (n - 1);
            out.push_back(GenDistribution::beta(a, b));
        }
    }
    return out;
}

// n-by-n grid of affine cost reports over [0, gamma_max] x [0, kappa_max]
inline std::vector<TsoCost> affine_cost_grid(int tso_id, int n,
                                             double gamma_max = 1.0,
                                             double kappa_max = 0.0) {
    if (n < 2) throw SpecError("grid needs at least 2 points");
    std::vector<TsoCost> out;
    for (int i = 0; i < n; ++i) {
        const double g = gamma_max * i / (n - 1);
        if (kappa_max <= 0.0) {
            out.push_back(TsoCost::affine(tso_id, g, 0.0));
            continue;
        }
        for (int j = 0; j < n; ++j) {
            out.push_back(
                TsoCost::affine(tso_id, g, kappa_max * j / (n - 1)));
        }
    }
    return out;
}

namespace detail {

// argmax with the first strict maximum winning, so candidate order (and
// nothing else) breaks ties; reductions stay deterministic under any
// thread count because payoffs land in caller-indexed slots first.
inline std::size_t first_argmax(std::span<const double> v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] > v[best]) best = i;
    }
    return best;
}

template <class Payoff, class Params>
DeviationReport make_report(int player_id, double truthful,
                            std::size_t n_candidates, Payoff&& payoff_of,
                            Params&& params_of, std::string grid_spec) {
    if (n_candidates == 0) throw SpecError("empty deviation grid");
    std::vector<double> payoffs(n_candidates, 0.0);
    std::vector<std::exception_ptr> errs(n_candidates);
    parallel_for(n_candidates, [&](std::size_t k) {
        try {
            payoffs[k] = payoff_of(k);
        } catch (const DegeneratePenaltyPrice&) {
            payoffs[k] = 0.0;  // unissuable contract: the deviation earns 0
        } catch (...) {
            errs[k] = std::current_exception();
        }
    });
    for (auto& e : errs) {
        if (e) std::rethrow_exception(e);
    }
    const std::size_t best = first_argmax(payoffs);
    return DeviationReport{player_id,
                           truthful,
                           params_of(best),
                           payoffs[best],
                           payoffs[best] - truthful,
                           std::move(grid_spec)};
}

// Expected settlement payoff of one player under a contract, integrating
// the realization over the player's true law.
inline double expected_single_payoff(const Contract& c, int player_id,
                                     const GenDistribution& true_law) {
    if (!detail::is_winner(c, player_id)) return 0.0;
    const double eh = expect(true_law, c.objective, 1e-10);
    if (c.mechanism == Mechanism::svcg) {
        return eh - c.reference_value;
    }
    return c.reference_value -
           *c.penalty_price * (c.reference_value - eh);
}

inline double expected_bundled_payoff(const BundledContract& c, int link,
                                      int player_id,
                                      const GenDistribution& true_law,
                                      double tol) {
    if (c.winners[static_cast<std::size_t>(link)] != player_id) return 0.0;
    const auto& award = c.awards[static_cast<std::size_t>(link)];
    const double cond = true_law.expect_of(
        [&](double x) { return contract_welfare_at(c, link, x, tol); },
        true_law.smoothness_breaks(), tol);
    if (c.mechanism == Mechanism::svcg) {
        return cond - award.marginal_welfare;
    }
    const double full = *award.full_capacity_welfare;
    return full - *award.penalty_price * (full - cond);
}

}  // namespace detail

// ---- deviation searches ---------------------------------------------------

// Single-resource rules: others hold their reports, the player sweeps the
// candidate laws, and each expected payoff is integrated over the true law.
inline DeviationReport deviation_gain_single(
    Mechanism mechanism, std::span<const Bid> truthful, const ObjectiveFn& h,
    int player_id, const GenDistribution& true_law,
    std::span<const GenDistribution> candidates, std::string grid_spec,
    int winner_count = 1) {
    const auto run = [&](std::span<const Bid> bids) {
        return mechanism == Mechanism::svcg
                   ? run_svcg(bids, h, winner_count)
                   : run_ssp(bids, h, winner_count);
    };
    std::size_t me = truthful.size();
    for (std::size_t i = 0; i < truthful.size(); ++i) {
        if (truthful[i].player_id == player_id) me = i;
    }
    if (me == truthful.size()) {
        throw SpecError("deviating player is not in the scenario");
    }
    const double truthful_payoff =
        detail::expected_single_payoff(run(truthful), player_id, true_law);
    std::vector<Bid> work(truthful.begin(), truthful.end());
    return detail::make_report(
        player_id, truthful_payoff, candidates.size(),
        [&](std::size_t k) {
            auto bids = work;
            bids[me].reported_type = candidates[k];
            return detail::expected_single_payoff(run(bids), player_id,
                                                  true_law);
        },
        [&](std::size_t k) { return law_params(candidates[k]); },
        std::move(grid_spec));
}

// Bundled rules: the player on one link sweeps candidate laws while every
// other slot stays truthful.
inline DeviationReport deviation_gain_bundled(
    Mechanism mechanism, const BundledScenario& truthful, int link,
    int player_id, const GenDistribution& true_law,
    std::span<const GenDistribution> candidates, std::string grid_spec,
    double tol = 1e-9) {
    if (link < 0 || static_cast<std::size_t>(link) >= truthful.links.size()) {
        throw SpecError("deviating link out of range");
    }
    std::size_t me = truthful.links[static_cast<std::size_t>(link)].size();
    const auto& home = truthful.links[static_cast<std::size_t>(link)];
    for (std::size_t i = 0; i < home.size(); ++i) {
        if (home[i].player_id == player_id) me = i;
    }
    if (me == home.size()) {
        throw SpecError("deviating player is not on the link");
    }
    const auto run = [&](const BundledScenario& s) {
        return mechanism == Mechanism::svcg ? run_bsvcg(s, tol)
                                            : run_bssp(s, tol);
    };
    const double truthful_payoff = detail::expected_bundled_payoff(
        run(truthful), link, player_id, true_law, tol);
    return detail::make_report(
        player_id, truthful_payoff, candidates.size(),
        [&](std::size_t k) {
            BundledScenario s = truthful;
            s.links[static_cast<std::size_t>(link)][me].reported_type =
                candidates[k];
            return detail::expected_bundled_payoff(run(s), link, player_id,
                                                   true_law, tol);
        },
        [&](std::size_t k) { return law_params(candidates[k]); },
        std::move(grid_spec));
}

// Two-class rule, generator side: sweeps the generator's reported law.
inline DeviationReport deviation_gain_tso_gen(
    std::span<const GenEntry> truthful_gens, std::span<const TsoCost> tsos,
    int gen_id, const GenDistribution& true_law,
    std::span<const GenDistribution> candidates, std::string grid_spec,
    const AccessMatrix* access = nullptr) {
    std::size_t me = truthful_gens.size();
    for (std::size_t i = 0; i < truthful_gens.size(); ++i) {
        if (truthful_gens[i].gen_id == gen_id) me = i;
    }
    if (me == truthful_gens.size()) {
        throw SpecError("deviating generator is not in the scenario");
    }
    const auto payoff = [&](std::span<const GenEntry> gens) {
        auto o = run_tsvcg(gens, tsos, access);
        if (o.winner_gen != gen_id) return 0.0;
        return true_law.mean() -
               o.winner_reported_cost.expected_under(true_law) -
               o.s_minus_gen;
    };
    const double truthful_payoff = payoff(truthful_gens);
    std::vector<GenEntry> work(truthful_gens.begin(), truthful_gens.end());
    return detail::make_report(
        gen_id, truthful_payoff, candidates.size(),
        [&](std::size_t k) {
            auto gens = work;
            gens[me].reported_type = candidates[k];
            return payoff(gens);
        },
        [&](std::size_t k) { return law_params(candidates[k]); },
        std::move(grid_spec));
}

// Two-class rule, operator side: sweeps the operator's cost report while
// paying the true carry cost at settlement.  Generators stay truthful, so
// their reported laws double as the realization laws.
inline DeviationReport deviation_gain_tso_tso(
    std::span<const GenEntry> truthful_gens,
    std::span<const TsoCost> truthful_tsos, int tso_id,
    const TsoCost& true_cost, std::span<const TsoCost> candidates,
    std::string grid_spec, const AccessMatrix* access = nullptr) {
    std::size_t me = truthful_tsos.size();
    for (std::size_t j = 0; j < truthful_tsos.size(); ++j) {
        if (truthful_tsos[j].tso_id() == tso_id) me = j;
    }
    if (me == truthful_tsos.size()) {
        throw SpecError("deviating operator is not in the scenario");
    }
    const auto payoff = [&](std::span<const TsoCost> tsos) {
        auto o = run_tsvcg(truthful_gens, tsos, access);
        if (o.winner_tso != tso_id) return 0.0;
        const GenDistribution* law = nullptr;
        for (const auto& g : truthful_gens) {
            if (g.gen_id == o.winner_gen) law = &g.reported_type;
        }
        return o.winner_gen_mean - o.s_minus_tso -
               true_cost.expected_under(*law);
    };
    const double truthful_payoff = payoff(truthful_tsos);
    std::vector<TsoCost> work(truthful_tsos.begin(), truthful_tsos.end());
    return detail::make_report(
        tso_id, truthful_payoff, candidates.size(),
        [&](std::size_t k) {
            auto tsos = work;
            if (candidates[k].tso_id() != tso_id) {
                throw SpecError("candidate cost carries a foreign id");
            }
            tsos[me] = candidates[k];
            return payoff(tsos);
        },
        [&](std::size_t k) { return cost_params(candidates[k]); },
        std::move(grid_spec));
}

// Complete-parametrization assignment: sweeps the player's reported law;
// payoff is the externality payment minus the true commitment cost.
inline DeviationReport deviation_gain_vcg_complete(
    const AssignmentProblem& truthful, int player_id,
    std::span<const GenDistribution> candidates, std::string grid_spec) {
    std::size_t me = truthful.players.size();
    for (std::size_t i = 0; i < truthful.players.size(); ++i) {
        if (truthful.players[i].player_id == player_id) me = i;
    }
    if (me == truthful.players.size()) {
        throw SpecError("deviating player is not in the scenario");
    }
    const GenDistribution true_law = truthful.players[me].type;
    const auto payoff = [&](const AssignmentProblem& p) {
        auto res = run_vcg_complete(p);
        return res.payments[me] -
               gen_cost(true_law, p.spot_price, res.assignment.y[me]);
    };
    const double truthful_payoff = payoff(truthful);
    return detail::make_report(
        player_id, truthful_payoff, candidates.size(),
        [&](std::size_t k) {
            auto players = truthful.players;
            players[me].type = candidates[k];
            return payoff(AssignmentProblem(std::move(players),
                                            truthful.demand,
                                            truthful.spot_price));
        },
        [&](std::size_t k) { return law_params(candidates[k]); },
        std::move(grid_spec));
}

// Two-dimensional-bid assignment: sweeps (ask price, quantity) pairs
// around a given bid profile.
inline DeviationReport deviation_gain_ivcg(
    const AssignmentProblem& truth, std::span<const TwoDimBid> profile,
    int player_id, std::span<const std::pair<double, double>> candidates,
    std::string grid_spec) {
    std::size_t me = profile.size();
    for (std::size_t i = 0; i < profile.size(); ++i) {
        if (profile[i].player_id == player_id) me = i;
    }
    if (me == profile.size()) {
        throw SpecError("deviating player is not in the profile");
    }
    std::size_t mine = truth.players.size();
    for (std::size_t i = 0; i < truth.players.size(); ++i) {
        if (truth.players[i].player_id == player_id) mine = i;
    }
    if (mine == truth.players.size()) {
        throw SpecError("deviating player has no true law in the problem");
    }
    const GenDistribution& true_law = truth.players[mine].type;
    const auto payoff = [&](std::span<const TwoDimBid> bids) {
        auto res = run_ivcg(bids, truth.demand, truth.spot_price);
        return res.payments[me] -
               gen_cost(true_law, truth.spot_price, res.assignment.y[me]);
    };
    const double truthful_payoff = payoff(profile);
    std::vector<TwoDimBid> work(profile.begin(), profile.end());
    return detail::make_report(
        player_id, truthful_payoff, candidates.size(),
        [&](std::size_t k) {
            auto bids = work;
            bids[me].ask_price = candidates[k].first;
            bids[me].max_quantity = candidates[k].second;
            return payoff(bids);
        },
        [&](std::size_t k) -> std::vector<double> {
            return {candidates[k].first, candidates[k].second};
        },
        std::move(grid_spec));
}

// ---- Monte Carlo settlement ------------------------------------------------

// Seeded Monte Carlo revenue estimate: per trial, winners' realizations
// are drawn from their reported laws, the contract settles, and the
// auctioneer books resale of the delivered capacity plus both payment
// legs.  Serial accumulation keeps the estimate bit-reproducible.
inline McEstimate mc_revenue(Mechanism mechanism, std::span<const Bid> bids,
                             const ObjectiveFn& h, double resale_price,
                             int winner_count, std::int64_t trials,
                             std::uint64_t seed) {
    if (trials < 1) throw SpecError("trials must be >= 1");
    const Contract c = mechanism == Mechanism::svcg
                           ? run_svcg(bids, h, winner_count)
                           : run_ssp(bids, h, winner_count);
    std::vector<const GenDistribution*> laws;
    for (int id : c.winners) {
        for (const auto& b : bids) {
            if (b.player_id == id) laws.push_back(&b.reported_type);
        }
    }
    double mean = 0.0, m2 = 0.0;
    for (std::int64_t t = 0; t < trials; ++t) {
        Rng rng = Rng::for_trial(seed, static_cast<std::uint64_t>(t));
        std::map<int, double> xs;
        for (std::size_t w = 0; w < laws.size(); ++w) {
            xs[c.winners[w]] = laws[w]->sample(rng);
        }
        auto rows = settle(c, xs);
        double revenue = 0.0;
        for (const auto& r : rows) {
            if (detail::is_winner(c, r.player_id)) {
                revenue += resale_price * r.realization - r.pre_payment +
                           r.post_payment;
            }
        }
        const double delta = revenue - mean;
        mean += delta / static_cast<double>(t + 1);
        m2 += delta * (revenue - mean);
    }
    const double se =
        trials > 1 ? std::sqrt(m2 / static_cast<double>(trials - 1) /
                               static_cast<double>(trials))
                   : 0.0;
    return McEstimate{mean, se, trials};
}

// ---- audits and oracles ----------------------------------------------------

// Smallest moment order on which two laws disagree beyond 1e-9; equal
// bounded-support moment sequences identify the law, so "none" certifies
// indistinguishability up to max_n.
inline MomentAuditResult moment_audit(const GenDistribution& a,
                                      const GenDistribution& b, int max_n) {
    if (max_n < 1) throw SpecError("moment audit needs max_n >= 1");
    for (int n = 1; n <= max_n; ++n) {
        if (std::abs(a.moment(n) - b.moment(n)) > 1e-9) {
            return MomentAuditResult{n, max_n};
        }
    }
    return MomentAuditResult{std::nullopt, max_n};
}

// Exhaustive welfare argmax over all selection tuples, ids ascending per
// link; ties resolve to the lexicographically smallest tuple.  Oracle for
// the bundled winner rule.
inline std::vector<int> brute_force_welfare_argmax(const BundledScenario& s,
                                                   double tol = 1e-8) {
    std::vector<std::vector<int>> ids(s.links.size());
    for (std::size_t l = 0; l < s.links.size(); ++l) {
        for (const auto& b : s.links[l]) ids[l].push_back(b.player_id);
        std::sort(ids[l].begin(), ids[l].end());
    }
    std::vector<int> cur(s.links.size()), best;
    double best_w = 0.0;
    const auto rec = [&](auto&& self, std::size_t l) -> void {
        if (l == s.links.size()) {
            const double w = welfare_A(s, cur, tol);
            if (best.empty() || w > best_w) {
                best = cur;
                best_w = w;
            }
            return;
        }
        for (int id : ids[l]) {
            cur[l] = id;
            self(self, l + 1);
        }
    };
    rec(rec, 0);
    return best;
}

}  // namespace auctionlab
