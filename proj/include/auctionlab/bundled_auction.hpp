#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "auctionlab/distributions.hpp"
#include "auctionlab/errors.hpp"
#include "auctionlab/parallel.hpp"
#include "auctionlab/rng.hpp"
#include "auctionlab/single_auction.hpp"

namespace auctionlab {

// Objective over a bundle of L delivered fractions.  MinOfAll is the
// capacity of a series route (the bottleneck), WeightedSum a portfolio
// value, ProductForm an all-or-nothing style multiplicative value.
class MultiObjectiveFn {
public:
    struct MinOfAll {
        bool operator==(const MinOfAll&) const = default;
    };
    struct WeightedSum {
        std::vector<double> weights;
        bool operator==(const WeightedSum&) const = default;
    };
    struct ProductForm {
        bool operator==(const ProductForm&) const = default;
    };
    using Value = std::variant<MinOfAll, WeightedSum, ProductForm>;

    static MultiObjectiveFn min_of_all() { return MultiObjectiveFn(MinOfAll{}); }
    static MultiObjectiveFn product_form() {
        return MultiObjectiveFn(ProductForm{});
    }
    static MultiObjectiveFn weighted_sum(std::vector<double> weights) {
        if (weights.empty()) {
            throw ObjectiveDomainError("weighted sum needs >= 1 weight");
        }
        for (double w : weights) {
            if (!std::isfinite(w)) {
                throw ObjectiveDomainError("weights must be finite");
            }
        }
        return MultiObjectiveFn(WeightedSum{std::move(weights)});
    }

    const Value& value() const { return v_; }
    bool operator==(const MultiObjectiveFn&) const = default;

    const char* kind_name() const {
        switch (v_.index()) {
            case 0: return "min";
            case 1: return "weighted_sum";
            default: return "product";
        }
    }

    // Weighted sums carry a fixed arity; the other kinds apply to any L.
    void check_arity(std::size_t l) const {
        if (const auto* w = std::get_if<WeightedSum>(&v_)) {
            if (w->weights.size() != l) {
                throw ArityError("objective expects " +
                                 std::to_string(w->weights.size()) +
                                 " slots, got " + std::to_string(l));
            }
        }
        if (l == 0) throw ArityError("objective needs >= 1 slot");
    }

    double eval(std::span<const double> xs) const {
        check_arity(xs.size());
        if (std::get_if<MinOfAll>(&v_)) {
            double m = xs[0];
            for (double x : xs) m = std::min(m, x);
            return m;
        }
        if (const auto* w = std::get_if<WeightedSum>(&v_)) {
            double s = 0.0;
            for (std::size_t i = 0; i < xs.size(); ++i) {
                s += w->weights[i] * xs[i];
            }
            return s;
        }
        double p = 1.0;
        for (double x : xs) p *= x;
        return p;
    }

    // Admissible for penalty pricing: nonnegative and nondecreasing in
    // every coordinate on the unit cube.
    bool nonnegative_nondecreasing() const {
        if (const auto* w = std::get_if<WeightedSum>(&v_)) {
            for (double x : w->weights) {
                if (x < 0.0) return false;
            }
        }
        return true;
    }

    bool separable() const {
        return std::holds_alternative<WeightedSum>(v_);
    }

private:
    explicit MultiObjectiveFn(Value v) : v_(std::move(v)) {}
    Value v_;
};

struct BundledBid {
    int player_id;
    GenDistribution reported_type;
    bool operator==(const BundledBid&) const = default;
};

// One resource auctioned per link; a selection picks one bidder per link
// and the objective values the delivered bundle jointly.
struct BundledScenario {
    std::vector<std::vector<BundledBid>> links;
    MultiObjectiveFn objective;
};

struct BundledAward {
    int link;  // 0-based
    int player_id;
    std::vector<int> marginal_tuple;  // best selection avoiding this winner
    double marginal_welfare;          // welfare at that tuple
    double pre_payment;
    std::optional<double> penalty_price;           // penalty rule only
    std::optional<double> full_capacity_welfare;   // welfare with this slot at 1
};

struct BundledContract {
    Mechanism mechanism;
    MultiObjectiveFn objective;
    std::vector<int> winners;  // player id per link
    double welfare;            // joint expected welfare of the winners
    std::vector<BundledAward> awards;
    std::vector<GenDistribution> winner_laws;  // reported law per link
    std::vector<std::pair<int, int>> participants;  // (link, id), ascending
};

struct BundledSettlement {
    int link;
    int player_id;
    double realization;
    double pre_payment;
    double post_payment;
    double payoff;
};

namespace detail {

inline void validate_bundled(const BundledScenario& s) {
    if (s.links.empty()) throw SpecError("scenario has no links");
    s.objective.check_arity(s.links.size());
    for (std::size_t l = 0; l < s.links.size(); ++l) {
        if (s.links[l].size() < 2) {
            throw NotEnoughBidders("link " + std::to_string(l) +
                                   " needs >= 2 bidders");
        }
        std::vector<int> ids;
        for (const auto& b : s.links[l]) {
            if (b.player_id < 0) throw SpecError("player ids must be >= 0");
            ids.push_back(b.player_id);
        }
        std::sort(ids.begin(), ids.end());
        if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
            throw SpecError("duplicate player id on link " +
                            std::to_string(l));
        }
    }
}

inline const GenDistribution* find_law(const BundledScenario& s,
                                       std::size_t link, int id) {
    for (const auto& b : s.links[link]) {
        if (b.player_id == id) return &b.reported_type;
    }
    throw SpecError("player " + std::to_string(id) + " not on link " +
                    std::to_string(link));
}

inline double radical_inverse(std::uint64_t i, std::uint64_t base) {
    double f = 1.0;
    double r = 0.0;
    while (i > 0) {
        f /= static_cast<double>(base);
        r += f * static_cast<double>(i % base);
        i /= base;
    }
    return r;
}

// Quasi-random estimate of E[h(X_1..X_L)]: shifted Halton points mapped
// through each law's inverse CDF.  The shift per block is seeded and
// fixed, so results are reproducible; the spread of block means gives the
// error estimate used to decide whether to escalate the point count.
inline double welfare_qmc(std::span<const GenDistribution* const> laws,
                          const MultiObjectiveFn& h, double tol) {
    static constexpr std::uint64_t primes[] = {2,  3,  5,  7,  11, 13,
                                               17, 19, 23, 29, 31, 37};
    const std::size_t dim = laws.size();
    if (dim > std::size(primes)) {
        throw ArityError("quasi-random welfare supports at most 12 links");
    }
    const int blocks = 8;
    std::uint64_t n_per_block = 4096;
    const std::uint64_t cap = 1ull << 20;
    std::vector<double> xs(dim);
    for (;;) {
        double mean_of_blocks = 0.0;
        double m2 = 0.0;
        for (int b = 0; b < blocks; ++b) {
            Rng shift_rng(0xb10c5eedULL + static_cast<std::uint64_t>(b));
            std::vector<double> shift(dim);
            for (auto& s : shift) s = shift_rng.uniform01();
            double acc = 0.0;
            const std::uint64_t lo =
                static_cast<std::uint64_t>(b) * n_per_block;
            for (std::uint64_t i = 0; i < n_per_block; ++i) {
                for (std::size_t d = 0; d < dim; ++d) {
                    double u =
                        radical_inverse(lo + i + 64, primes[d]) + shift[d];
                    u -= std::floor(u);
                    xs[d] = laws[d]->inverse_cdf(u);
                }
                acc += h.eval(xs);
            }
            const double bm = acc / static_cast<double>(n_per_block);
            const double delta = bm - mean_of_blocks;
            mean_of_blocks += delta / (b + 1);
            m2 += delta * (bm - mean_of_blocks);
        }
        const double se =
            std::sqrt(m2 / (blocks - 1.0) / static_cast<double>(blocks));
        if (3.0 * se <= tol ||
            n_per_block * static_cast<std::uint64_t>(blocks) >= cap) {
            return mean_of_blocks;
        }
        n_per_block *= 2;
    }
}

// Expected welfare of independent laws under h by iterated integration:
// coordinate k is integrated with panels split at the running minimum of
// the pinned coordinates (the only hard kink of min-type objectives) and
// at the remaining laws' own breakpoints.
inline double welfare_nested(std::span<const GenDistribution* const> laws,
                             const MultiObjectiveFn& h, double level_tol) {
    const std::size_t dim = laws.size();
    std::vector<double> pinned(dim);
    const bool min_kind =
        std::holds_alternative<MultiObjectiveFn::MinOfAll>(h.value());

    struct Walker {
        std::span<const GenDistribution* const> laws;
        const MultiObjectiveFn& h;
        std::vector<double>& pinned;
        bool min_kind;
        double tol;

        double level(std::size_t k) {
            if (k == laws.size()) return h.eval(pinned);
            std::vector<double> breaks;
            if (min_kind && k > 0) {
                double m = pinned[0];
                for (std::size_t j = 1; j < k; ++j) m = std::min(m, pinned[j]);
                breaks.push_back(m);
            }
            for (std::size_t j = k + 1; j < laws.size(); ++j) {
                for (double b : laws[j]->smoothness_breaks()) {
                    breaks.push_back(b);
                }
            }
            return laws[k]->expect_of(
                [&](double x) {
                    pinned[k] = x;
                    return level(k + 1);
                },
                breaks, tol);
        }
    };

    Walker w{laws, h, pinned, min_kind, level_tol};
    return w.level(0);
}

inline double welfare_over(std::span<const GenDistribution* const> laws,
                           const MultiObjectiveFn& h, double tol) {
    h.check_arity(laws.size());
    if (const auto* ws = std::get_if<MultiObjectiveFn::WeightedSum>(
            &h.value())) {
        double s = 0.0;
        for (std::size_t l = 0; l < laws.size(); ++l) {
            s += ws->weights[l] * laws[l]->mean();
        }
        return s;
    }
    if (std::holds_alternative<MultiObjectiveFn::ProductForm>(h.value())) {
        // Independent slots: the expectation factorizes.
        double p = 1.0;
        for (const auto* d : laws) p *= d->mean();
        return p;
    }
    // Point masses cost nothing in the nested walk, so only count the
    // slots that actually need a quadrature level.
    std::size_t active = 0;
    for (const auto* d : laws) {
        if (!std::holds_alternative<GenDistribution::PointMass>(d->value())) {
            ++active;
        }
    }
    if (active > 4) return welfare_qmc(laws, h, tol);
    const double level_tol =
        tol / (2.0 * static_cast<double>(std::max<std::size_t>(active, 1)));
    return welfare_nested(laws, h, level_tol);
}

}  // namespace detail

// Joint expected welfare A of one selection (one bidder per link), under
// the scenario's reported laws.  Default tolerance 1e-8.
inline double welfare_A(const BundledScenario& s,
                        std::span<const int> selection, double tol = 1e-8) {
    detail::validate_bundled(s);
    if (selection.size() != s.links.size()) {
        throw ArityError("selection must pick one bidder per link");
    }
    std::vector<const GenDistribution*> laws;
    laws.reserve(selection.size());
    for (std::size_t l = 0; l < selection.size(); ++l) {
        laws.push_back(detail::find_law(s, l, selection[l]));
    }
    return detail::welfare_over(laws, s.objective, tol);
}

// Welfare of a selection with coordinate `link` pinned to the realized
// value x (x = 1 gives the full-capacity welfare used by penalty pricing).
inline double welfare_A_partial(const BundledScenario& s,
                                std::span<const int> selection, int link,
                                double x, double tol = 1e-8) {
    detail::validate_bundled(s);
    if (selection.size() != s.links.size()) {
        throw ArityError("selection must pick one bidder per link");
    }
    if (link < 0 || static_cast<std::size_t>(link) >= s.links.size()) {
        throw ArityError("link index out of range");
    }
    if (!(x >= 0.0 && x <= 1.0)) {
        throw DomainError("pinned realization must lie in [0, 1]");
    }
    const GenDistribution pin = GenDistribution::point_mass(x);
    std::vector<const GenDistribution*> laws;
    laws.reserve(selection.size());
    for (std::size_t l = 0; l < selection.size(); ++l) {
        laws.push_back(static_cast<int>(l) == link
                           ? &pin
                           : detail::find_law(s, l, selection[l]));
    }
    return detail::welfare_over(laws, s.objective, tol);
}

namespace detail {

struct Enumeration {
    std::vector<std::vector<int>> ids;   // per link, ascending
    std::vector<std::vector<int>> tuples;  // all selections, lex order
    std::vector<double> welfare;           // aligned with tuples
};

inline Enumeration enumerate_welfare(const BundledScenario& s, double tol) {
    Enumeration e;
    e.ids.resize(s.links.size());
    for (std::size_t l = 0; l < s.links.size(); ++l) {
        for (const auto& b : s.links[l]) e.ids[l].push_back(b.player_id);
        std::sort(e.ids[l].begin(), e.ids[l].end());
    }
    std::vector<int> cur(s.links.size());
    const auto rec = [&](auto&& self, std::size_t l) -> void {
        if (l == s.links.size()) {
            e.tuples.push_back(cur);
            return;
        }
        for (int id : e.ids[l]) {
            cur[l] = id;
            self(self, l + 1);
        }
    };
    rec(rec, 0);
    e.welfare.resize(e.tuples.size());
    parallel_for(e.tuples.size(), [&](std::size_t i) {
        e.welfare[i] = welfare_A(s, e.tuples[i], tol);
    });
    return e;
}

// Lex order of tuples makes "first strict max" the lex-smallest argmax.
inline std::size_t argmax_index(const Enumeration& e) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < e.welfare.size(); ++i) {
        if (e.welfare[i] > e.welfare[best]) best = i;
    }
    return best;
}

inline std::vector<std::pair<int, int>> all_participants(
    const BundledScenario& s) {
    std::vector<std::pair<int, int>> out;
    for (std::size_t l = 0; l < s.links.size(); ++l) {
        for (const auto& b : s.links[l]) {
            out.emplace_back(static_cast<int>(l), b.player_id);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

inline BundledContract run_bundled(const BundledScenario& s,
                                   Mechanism mechanism, double tol) {
    validate_bundled(s);
    if (mechanism == Mechanism::ssp &&
        !s.objective.nonnegative_nondecreasing()) {
        throw ObjectiveNotAdmissible(
            "bundled penalty mechanism needs a nonnegative elementwise "
            "nondecreasing objective");
    }
    const Enumeration e = enumerate_welfare(s, tol);
    const std::size_t win = argmax_index(e);
    const std::vector<int>& winners = e.tuples[win];

    BundledContract c{mechanism,
                      s.objective,
                      winners,
                      e.welfare[win],
                      {},
                      {},
                      all_participants(s)};
    for (std::size_t l = 0; l < s.links.size(); ++l) {
        c.winner_laws.push_back(*find_law(s, l, winners[l]));
    }

    for (std::size_t l = 0; l < s.links.size(); ++l) {
        // Best selection that excludes this link's winner: the winner's
        // own marginal-loser tuple.  Other links' winners may move.
        std::size_t best = e.tuples.size();
        for (std::size_t i = 0; i < e.tuples.size(); ++i) {
            if (e.tuples[i][l] == winners[l]) continue;
            if (best == e.tuples.size() || e.welfare[i] > e.welfare[best]) {
                best = i;
            }
        }
        BundledAward award{static_cast<int>(l),
                           winners[l],
                           e.tuples[best],
                           e.welfare[best],
                           0.0,
                           std::nullopt,
                           std::nullopt};
        if (mechanism == Mechanism::svcg) {
            award.pre_payment = -award.marginal_welfare;
        } else {
            const double full = welfare_A_partial(
                s, winners, static_cast<int>(l), 1.0, tol);
            const double denom = full - award.marginal_welfare;
            if (!(denom > 0.0)) {
                throw DegeneratePenaltyPrice(
                    "full-capacity welfare does not exceed the marginal "
                    "tuple's welfare on link " + std::to_string(l));
            }
            award.full_capacity_welfare = full;
            award.penalty_price = full / denom;
            award.pre_payment = full;
        }
        c.awards.push_back(std::move(award));
    }
    return c;
}

}  // namespace detail

// Bundled expectation-of-value rule: the winner on link l pays the welfare
// the system could have had without him, and at settlement is paid the
// expected welfare conditional on his realized delivery.
inline BundledContract run_bsvcg(const BundledScenario& s,
                                 double tol = 1e-8) {
    return detail::run_bundled(s, Mechanism::svcg, tol);
}

// Bundled penalty rule: the winner on link l is paid the full-capacity
// welfare up front and penalized at lambda_l per unit of conditional
// welfare lost to his shortfall.
inline BundledContract run_bssp(const BundledScenario& s, double tol = 1e-8) {
    return detail::run_bundled(s, Mechanism::ssp, tol);
}

// Welfare conditional on link l's winner delivering x, under the reported
// laws frozen into the contract.
inline double contract_welfare_at(const BundledContract& c, int link,
                                  double x, double tol = 1e-8) {
    if (link < 0 || static_cast<std::size_t>(link) >= c.winner_laws.size()) {
        throw ArityError("link index out of range");
    }
    if (!(x >= 0.0 && x <= 1.0)) {
        throw DomainError("realization must lie in [0, 1]");
    }
    const GenDistribution pin = GenDistribution::point_mass(x);
    std::vector<const GenDistribution*> laws;
    for (std::size_t l = 0; l < c.winner_laws.size(); ++l) {
        laws.push_back(static_cast<int>(l) == link ? &pin
                                                   : &c.winner_laws[l]);
    }
    return detail::welfare_over(laws, c.objective, tol);
}

inline std::vector<BundledSettlement> settle_bundled(
    const BundledContract& c,
    const std::map<std::pair<int, int>, double>& realizations,
    double price_scale = 1.0) {
    std::vector<BundledSettlement> out;
    out.reserve(c.participants.size());
    for (const auto& [link, id] : c.participants) {
        const auto it = realizations.find({link, id});
        const double x = it == realizations.end()
                             ? std::numeric_limits<double>::quiet_NaN()
                             : it->second;
        if (c.winners[static_cast<std::size_t>(link)] != id) {
            out.push_back({link, id, x, 0.0, 0.0, 0.0});
            continue;
        }
        if (it == realizations.end()) {
            throw MissingRealization("no realization for winner " +
                                     std::to_string(id) + " on link " +
                                     std::to_string(link));
        }
        const auto& award = c.awards[static_cast<std::size_t>(link)];
        const double conditional = contract_welfare_at(c, link, x);
        double q = 0.0;
        if (c.mechanism == Mechanism::svcg) {
            q = -conditional;
        } else {
            q = *award.penalty_price *
                (*award.full_capacity_welfare - conditional);
        }
        const double p = award.pre_payment;
        out.push_back({link, id, x, price_scale * p, price_scale * q,
                       price_scale * (p - q)});
    }
    return out;
}

}  // namespace auctionlab
