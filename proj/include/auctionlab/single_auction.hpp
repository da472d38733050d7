#pragma once

#include <algorithm>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "auctionlab/distributions.hpp"
#include "auctionlab/errors.hpp"
#include "auctionlab/objectives.hpp"

namespace auctionlab {

// Payment conventions, used consistently across all mechanisms here:
//   pre_payment  p: transfer from auctioneer to winner at contract time
//                   (negative means the winner pays the auctioneer),
//   post_payment q: charge from winner to auctioneer at settlement
//                   (negative means the auctioneer pays the winner),
//   payoff       U = p - q.
//
// Expectation-of-value mechanism (mechanism enum "svcg"): the winner pays
// the runner-up's expected objective value up front and is paid his
// realized objective value at delivery.
//
// Penalty mechanism ("ssp"): the winner is paid the full-capacity value
// h(1) up front and pays a shortfall penalty lambda * (h(1) - h(x)) at
// delivery, with lambda chosen so that truth-telling is optimal.

enum class Mechanism { svcg, ssp };

inline const char* mechanism_name(Mechanism m) {
    return m == Mechanism::svcg ? "svcg" : "ssp";
}

struct Bid {
    int player_id;
    GenDistribution reported_type;
    bool operator==(const Bid&) const = default;
};

struct ScoredBid {
    int player_id;
    double score;  // expected objective value of the reported law
};

struct WinnerSelection {
    std::vector<int> winners;      // M ids, best first
    int marginal_loser;            // (M+1)-th ranked id
    std::vector<ScoredBid> ranking;  // all bidders, best first
};

struct Contract {
    Mechanism mechanism;
    ObjectiveFn objective;
    std::vector<int> winners;
    int marginal_loser;
    double pre_payment;                   // per winner
    std::optional<double> penalty_price;  // lambda, penalty rule only
    // Cached at award time so settlement never re-integrates: the
    // marginal loser's expected objective (svcg) or h(1) (ssp).
    double reference_value;
    std::vector<int> participants;  // every bidder id, ascending
};

struct Settlement {
    int player_id;
    double realization;
    double pre_payment;
    double post_payment;
    double payoff;
};

namespace detail {

inline void check_unique_ids(std::span<const Bid> bids) {
    std::vector<int> ids;
    ids.reserve(bids.size());
    for (const auto& b : bids) {
        if (b.player_id < 0) throw SpecError("player ids must be >= 0");
        ids.push_back(b.player_id);
    }
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
        throw SpecError("duplicate player id in bid list");
    }
}

}  // namespace detail

// Ranks bidders by expected objective value of their reported law and
// returns the M winners plus the marginal loser (the (M+1)-th bidder,
// whose report prices the contract).  Ties break toward the lowest id.
inline WinnerSelection select_winners(std::span<const Bid> bids,
                                      const ObjectiveFn& h, int winner_count) {
    if (winner_count < 1) throw SpecError("winner count must be >= 1");
    detail::check_unique_ids(bids);
    if (bids.size() <= static_cast<std::size_t>(winner_count)) {
        throw NotEnoughBidders(
            "need at least " + std::to_string(winner_count + 1) +
            " bidders, got " + std::to_string(bids.size()));
    }
    WinnerSelection sel;
    sel.ranking.reserve(bids.size());
    for (const auto& b : bids) {
        sel.ranking.push_back({b.player_id, expect(b.reported_type, h)});
    }
    std::sort(sel.ranking.begin(), sel.ranking.end(),
              [](const ScoredBid& a, const ScoredBid& b) {
                  if (a.score != b.score) return a.score > b.score;
                  return a.player_id < b.player_id;
              });
    for (int m = 0; m < winner_count; ++m) {
        sel.winners.push_back(sel.ranking[static_cast<std::size_t>(m)]
                                  .player_id);
    }
    sel.marginal_loser =
        sel.ranking[static_cast<std::size_t>(winner_count)].player_id;
    return sel;
}

namespace detail {

inline std::vector<int> sorted_ids(std::span<const Bid> bids) {
    std::vector<int> ids;
    ids.reserve(bids.size());
    for (const auto& b : bids) ids.push_back(b.player_id);
    std::sort(ids.begin(), ids.end());
    return ids;
}

}  // namespace detail

// Expectation-of-value rule: every winner pays the marginal loser's
// expected objective value up front and will be paid h(x) at settlement.
inline Contract run_svcg(std::span<const Bid> bids, const ObjectiveFn& h,
                         int winner_count = 1) {
    auto sel = select_winners(bids, h, winner_count);
    const double loser_value =
        sel.ranking[static_cast<std::size_t>(winner_count)].score;
    Contract c{Mechanism::svcg,
               h,
               std::move(sel.winners),
               sel.marginal_loser,
               -loser_value,
               std::nullopt,
               loser_value,
               detail::sorted_ids(bids)};
    return c;
}

// Penalty rule: every winner is paid h(1) up front; the penalty price
// lambda = h(1) / (h(1) - marginal loser's expected value) is fixed at
// award time and is always >= 1 for admissible objectives.
inline Contract run_ssp(std::span<const Bid> bids, const ObjectiveFn& h,
                        int winner_count = 1) {
    if (!h.nonnegative_nondecreasing()) {
        throw ObjectiveNotAdmissible(
            "penalty mechanism needs a nonnegative nondecreasing objective");
    }
    auto sel = select_winners(bids, h, winner_count);
    const double loser_value =
        sel.ranking[static_cast<std::size_t>(winner_count)].score;
    const double full_value = h.at_full_capacity();
    const double denom = full_value - loser_value;
    if (!(denom > 0.0)) {
        throw DegeneratePenaltyPrice(
            "marginal loser's expected value reaches the full-capacity "
            "value; penalty price undefined");
    }
    Contract c{Mechanism::ssp,
               h,
               std::move(sel.winners),
               sel.marginal_loser,
               full_value,
               full_value / denom,
               full_value,
               detail::sorted_ids(bids)};
    return c;
}

namespace detail {

inline bool is_winner(const Contract& c, int id) {
    return std::find(c.winners.begin(), c.winners.end(), id) !=
           c.winners.end();
}

template <class PostPayment>
std::vector<Settlement> settle_common(
    const Contract& c, const std::map<int, double>& realizations,
    double price_scale, PostPayment&& post_of) {
    std::vector<Settlement> out;
    out.reserve(c.participants.size());
    for (int id : c.participants) {
        const auto it = realizations.find(id);
        const double x = it == realizations.end()
                             ? std::numeric_limits<double>::quiet_NaN()
                             : it->second;
        if (!is_winner(c, id)) {
            out.push_back({id, x, 0.0, 0.0, 0.0});
            continue;
        }
        if (it == realizations.end()) {
            throw MissingRealization("no realization for winner " +
                                     std::to_string(id));
        }
        const double q = post_of(x);
        const double p = c.pre_payment;
        out.push_back({id, x, price_scale * p, price_scale * q,
                       price_scale * (p - q)});
    }
    return out;
}

}  // namespace detail

// Settles an expectation-of-value contract: -q = h(x), U = h(x) minus the
// marginal loser's expected value.  Losers settle at zero.
inline std::vector<Settlement> settle_svcg(
    const Contract& c, const std::map<int, double>& realizations,
    double price_scale = 1.0) {
    if (c.mechanism != Mechanism::svcg) {
        throw SpecError("contract was not issued by the svcg rule");
    }
    return detail::settle_common(
        c, realizations, price_scale,
        [&](double x) { return -c.objective.eval(x); });
}

// Settles a penalty contract: q = lambda * (h(1) - h(x)), U = h(1) - q.
inline std::vector<Settlement> settle_ssp(
    const Contract& c, const std::map<int, double>& realizations,
    double price_scale = 1.0) {
    if (c.mechanism != Mechanism::ssp) {
        throw SpecError("contract was not issued by the ssp rule");
    }
    return detail::settle_common(
        c, realizations, price_scale, [&](double x) {
            return *c.penalty_price *
                   (c.reference_value - c.objective.eval(x));
        });
}

inline std::vector<Settlement> settle(
    const Contract& c, const std::map<int, double>& realizations,
    double price_scale = 1.0) {
    return c.mechanism == Mechanism::svcg
               ? settle_svcg(c, realizations, price_scale)
               : settle_ssp(c, realizations, price_scale);
}

// Auctioneer's expected revenue under truthful bids: the resource is
// resold at resale_price per unit of realized capacity, plus the two
// payment legs in expectation.  Closed form by quadrature; no sampling.
inline double expected_revenue(Mechanism mechanism, std::span<const Bid> bids,
                               const ObjectiveFn& h, double resale_price = 1.0,
                               int winner_count = 1) {
    std::map<int, const GenDistribution*> law_of;
    for (const auto& b : bids) law_of[b.player_id] = &b.reported_type;

    if (mechanism == Mechanism::svcg) {
        const auto c = run_svcg(bids, h, winner_count);
        double revenue = 0.0;
        for (int w : c.winners) {
            const auto& law = *law_of.at(w);
            revenue += resale_price * law.mean() + c.reference_value -
                       expect(law, h);
        }
        return revenue;
    }
    const auto c = run_ssp(bids, h, winner_count);
    double revenue = 0.0;
    for (int w : c.winners) {
        const auto& law = *law_of.at(w);
        revenue += resale_price * law.mean() - c.reference_value +
                   *c.penalty_price * (c.reference_value - expect(law, h));
    }
    return revenue;
}

}  // namespace auctionlab
