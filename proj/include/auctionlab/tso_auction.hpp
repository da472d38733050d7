#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "auctionlab/distributions.hpp"
#include "auctionlab/errors.hpp"

namespace auctionlab {

// Parametric transmission cost report: nonnegative and nondecreasing on
// [0, 1].  Parametric forms keep reports exactly communicable.
class TsoCost {
public:
    struct Affine {
        double gamma;  // per-unit cost
        double kappa;  // fixed cost
        bool operator==(const Affine&) const = default;
    };
    struct Quadratic {
        double gamma1;
        double gamma2;  // c(x) = gamma1 x + gamma2 x^2
        bool operator==(const Quadratic&) const = default;
    };
    using Value = std::variant<Affine, Quadratic>;

    static TsoCost affine(int tso_id, double gamma, double kappa) {
        if (!(std::isfinite(gamma) && std::isfinite(kappa)) || gamma < 0.0 ||
            kappa < 0.0) {
            throw InvalidCostReport(
                "affine cost needs gamma >= 0 and kappa >= 0");
        }
        return TsoCost(tso_id, Affine{gamma, kappa});
    }

    static TsoCost quadratic_monotone(int tso_id, double gamma1,
                                      double gamma2) {
        if (!(std::isfinite(gamma1) && std::isfinite(gamma2)) ||
            gamma1 < 0.0 || gamma2 < 0.0) {
            throw InvalidCostReport(
                "quadratic cost needs gamma1 >= 0 and gamma2 >= 0");
        }
        return TsoCost(tso_id, Quadratic{gamma1, gamma2});
    }

    int tso_id() const { return id_; }
    const Value& value() const { return v_; }
    bool operator==(const TsoCost&) const = default;

    const char* kind_name() const {
        return std::holds_alternative<Affine>(v_) ? "affine" : "quadratic";
    }

    double eval(double x) const {
        if (!(x >= 0.0 && x <= 1.0)) {
            throw DomainError("transmission cost evaluated outside [0, 1]");
        }
        if (const auto* a = std::get_if<Affine>(&v_)) {
            return a->gamma * x + a->kappa;
        }
        const auto& q = std::get<Quadratic>(v_);
        return q.gamma1 * x + q.gamma2 * x * x;
    }

    // E[c(X)] under the given law; exact through the law's moments.
    double expected_under(const GenDistribution& d) const {
        if (const auto* a = std::get_if<Affine>(&v_)) {
            return a->gamma * d.mean() + a->kappa;
        }
        const auto& q = std::get<Quadratic>(v_);
        return q.gamma1 * d.mean() + q.gamma2 * d.moment(2);
    }

private:
    TsoCost(int id, Value v) : id_(id), v_(std::move(v)) {}
    int id_;
    Value v_;
};

struct GenEntry {
    int gen_id;
    GenDistribution reported_type;
    bool operator==(const GenEntry&) const = default;
};

// Expected net surplus of pairing one generator law with one transmission
// cost: E[X - c(X)].
inline double net_surplus(const GenDistribution& gen, const TsoCost& tso) {
    return gen.mean() - tso.expected_under(gen);
}

// Which generator/operator pairs are physically connected; row = generator
// position, column = operator position.  Absent matrix = fully connected.
using AccessMatrix = std::vector<std::vector<bool>>;

struct TsvcgOutcome {
    int winner_gen;
    int winner_tso;
    double surplus;      // winning expected net surplus (may be negative)
    double s_minus_gen;  // best surplus with the winning generator removed
    double s_minus_tso;  // best surplus with the winning operator removed
    double winner_gen_mean;           // mean of the winner's reported law
    double winner_cost_expectation;   // E[c_hat(X)] under the reported law
    TsoCost winner_reported_cost;     // as-reported cost, priced into U
    std::vector<int> gen_ids;
    std::vector<int> tso_ids;
};

struct TsvcgSettlement {
    double realization;
    double gen_payoff;
    double tso_payoff;
};

namespace detail {

inline void check_distinct(const std::vector<int>& ids, const char* what) {
    auto sorted = ids;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw SpecError(std::string("duplicate ") + what + " id");
    }
}

}  // namespace detail

// Selects the generator/operator pair maximizing expected net surplus and
// prices both sides by their externality: the best surplus attainable
// without the winning generator (s_minus_gen) and without the winning
// operator (s_minus_tso).  Ties break toward the lowest (gen, tso) ids.
// A leave-one-out maximum over an empty accessible set counts as 0 (no
// trade happens without the removed player).
inline TsvcgOutcome run_tsvcg(std::span<const GenEntry> gens,
                              std::span<const TsoCost> tsos,
                              const AccessMatrix* access = nullptr) {
    if (gens.size() < 2 || tsos.size() < 2) {
        throw NotEnoughBidders(
            "need >= 2 generators and >= 2 transmission operators");
    }
    if (access) {
        if (access->size() != gens.size()) {
            throw ArityError("access matrix needs one row per generator");
        }
        for (const auto& row : *access) {
            if (row.size() != tsos.size()) {
                throw ArityError(
                    "access matrix needs one column per operator");
            }
        }
    }
    std::vector<int> gen_ids, tso_ids;
    for (const auto& g : gens) gen_ids.push_back(g.gen_id);
    for (const auto& t : tsos) tso_ids.push_back(t.tso_id());
    detail::check_distinct(gen_ids, "generator");
    detail::check_distinct(tso_ids, "operator");

    const auto accessible = [&](std::size_t i, std::size_t j) {
        return !access || (*access)[i][j];
    };

    std::vector<std::vector<double>> surplus(
        gens.size(), std::vector<double>(tsos.size(), 0.0));
    for (std::size_t i = 0; i < gens.size(); ++i) {
        for (std::size_t j = 0; j < tsos.size(); ++j) {
            if (accessible(i, j)) {
                surplus[i][j] = net_surplus(gens[i].reported_type, tsos[j]);
            }
        }
    }

    // argmax over accessible pairs; iteration order implements the
    // lexicographic (gen, tso) tie-break for equal surplus.
    std::ptrdiff_t bi = -1, bj = -1;
    for (std::size_t i = 0; i < gens.size(); ++i) {
        for (std::size_t j = 0; j < tsos.size(); ++j) {
            if (!accessible(i, j)) continue;
            if (bi < 0 || surplus[i][j] >
                              surplus[static_cast<std::size_t>(bi)]
                                     [static_cast<std::size_t>(bj)]) {
                bi = static_cast<std::ptrdiff_t>(i);
                bj = static_cast<std::ptrdiff_t>(j);
            }
        }
    }
    if (bi < 0) throw NotEnoughBidders("no accessible generator/operator pair");

    const auto max_excluding = [&](std::ptrdiff_t skip_gen,
                                   std::ptrdiff_t skip_tso) {
        double best = 0.0;
        bool found = false;
        for (std::size_t i = 0; i < gens.size(); ++i) {
            if (static_cast<std::ptrdiff_t>(i) == skip_gen) continue;
            for (std::size_t j = 0; j < tsos.size(); ++j) {
                if (static_cast<std::ptrdiff_t>(j) == skip_tso) continue;
                if (!accessible(i, j)) continue;
                if (!found || surplus[i][j] > best) {
                    best = surplus[i][j];
                    found = true;
                }
            }
        }
        return found ? best : 0.0;
    };

    const auto ui = static_cast<std::size_t>(bi);
    const auto uj = static_cast<std::size_t>(bj);
    return TsvcgOutcome{
        gens[ui].gen_id,
        tsos[uj].tso_id(),
        surplus[ui][uj],
        max_excluding(bi, -1),
        max_excluding(-1, bj),
        gens[ui].reported_type.mean(),
        tsos[uj].expected_under(gens[ui].reported_type),
        tsos[uj],
        std::move(gen_ids),
        std::move(tso_ids)};
}

// Settles the winning pair against the realized generation x.
//
// The generator's payoff uses the operator's *reported* cost (it was
// priced into his contract); the operator's payoff subtracts his *true*
// cost of carrying x, passed via true_winner_cost when it differs from the
// report.  Non-winners settle at zero by definition.
inline TsvcgSettlement settle_tsvcg(const TsvcgOutcome& o, double x,
                                    const TsoCost* true_winner_cost = nullptr) {
    if (!(x >= 0.0 && x <= 1.0)) {
        throw DomainError("realization must lie in [0, 1]");
    }
    const TsoCost& true_cost =
        true_winner_cost ? *true_winner_cost : o.winner_reported_cost;
    const double u = x - o.winner_reported_cost.eval(x) - o.s_minus_gen;
    const double v = o.winner_gen_mean - o.s_minus_tso - true_cost.eval(x);
    return {x, u, v};
}

}  // namespace auctionlab
