// Risk-aware assignment: spot-exposure cost calculus, the convex welfare
// program, externality payments under complete reports, and the
// two-dimensional-bid mechanism with its efficient equilibrium profile.
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "auctionlab/assignment.hpp"
#include "auctionlab/errors.hpp"
#include "auctionlab/rng.hpp"
#include "oracles.hpp"

using namespace auctionlab;

namespace {

DemandLaw uniform_demand_02() {
    return DemandLaw::scaled(GenDistribution::uniform(0.0, 1.0), 2.0);
}

AssignmentProblem two_uniform_problem() {
    return AssignmentProblem({{1, GenDistribution::uniform(0.0, 1.0)},
                              {2, GenDistribution::uniform(0.0, 1.0)}},
                             uniform_demand_02(), 1.0);
}

double swo_objective(const AssignmentProblem& p,
                     const std::vector<double>& y) {
    double total = 0.0, cost = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        total += y[i];
        cost += gen_cost(p.players[i].type, p.spot_price, y[i]);
    }
    return cost + agg_cost(p.demand, p.spot_price, total);
}

}  // namespace

TEST_CASE("demand law rescales a unit-interval base") {
    auto z = uniform_demand_02();
    CHECK(z.z_max() == 2.0);
    CHECK(z.mean() == Catch::Approx(1.0));
    CHECK(z.cdf(-0.1) == 0.0);
    CHECK(z.cdf(1.0) == Catch::Approx(0.5));
    CHECK(z.cdf(2.0) == 1.0);
    CHECK(z.cdf(2.5) == 1.0);
    CHECK(z.quantile(0.0) == 0.0);
    CHECK(z.quantile(0.75) == Catch::Approx(1.5));
    CHECK(z.quantile_upper(0.75) == Catch::Approx(1.5));
    CHECK_THROWS_AS(
        DemandLaw::scaled(GenDistribution::uniform(0.0, 1.0), 0.0),
        InvalidDistribution);
    CHECK_THROWS_AS(
        DemandLaw::scaled(GenDistribution::uniform(0.0, 1.0), -2.0),
        InvalidDistribution);

    Rng a(11), b(11);
    CHECK(z.sample(a) == z.sample(b));
}

TEST_CASE("generator spot-exposure cost and derivative") {
    auto u = GenDistribution::uniform(0.0, 1.0);

    CHECK(gen_cost(u, 1.0, 0.5) == Catch::Approx(0.125));
    CHECK(gen_cost(u, 1.0, 0.0) == 0.0);
    CHECK(gen_cost(u, 3.0, 0.5) == Catch::Approx(0.375));
    CHECK(gen_cost_deriv(u, 2.0, 1.0) == Catch::Approx(2.0));  // lambda at cap
    CHECK(gen_cost_deriv(u, 1.0, 0.0) == Catch::Approx(0.0));
    CHECK_THROWS_AS(gen_cost(u, 1.0, 1.2), DomainError);
    CHECK_THROWS_AS(gen_cost_deriv(u, 1.0, -0.1), DomainError);

    for (const auto& law :
         {GenDistribution::uniform(0.1, 0.8), GenDistribution::beta(2.0, 3.0),
          GenDistribution::piecewise_linear_cdf(
              {{0.0, 0.0}, {0.25, 0.5}, {0.75, 0.5}, {1.0, 1.0}})}) {
        const double lambda = 1.7;
        const auto breaks = law.smoothness_breaks();
        // derivative identity and convexity on an interior grid
        for (int k = 1; k < 100; ++k) {
            const double y = k / 100.0;
            const double h = 1e-5;
            const double fd = (gen_cost(law, lambda, y + h) -
                               gen_cost(law, lambda, y - h)) /
                              (2.0 * h);
            // centered differences cannot resolve CDF kinks or atoms
            bool near_break = false;
            for (double b : breaks) {
                if (std::abs(y - b) <= 2.0 * h) near_break = true;
            }
            if (!near_break) {
                CHECK(gen_cost_deriv(law, lambda, y) ==
                      Catch::Approx(fd).margin(1e-7));
            }
            const double second = gen_cost(law, lambda, y + h) -
                                  2.0 * gen_cost(law, lambda, y) +
                                  gen_cost(law, lambda, y - h);
            CHECK(second >= -1e-9);
        }
    }
}

TEST_CASE("aggregator residual-demand cost and derivative") {
    auto z = uniform_demand_02();

    CHECK(agg_cost(z, 1.0, 1.0) == Catch::Approx(0.25));
    CHECK(agg_cost(z, 1.0, 0.5) == Catch::Approx(0.5625));
    CHECK(agg_cost(z, 1.0, 2.0) == 0.0);
    CHECK(agg_cost(z, 1.0, 5.0) == 0.0);  // beyond the support: covered
    CHECK(agg_cost(z, 1.0, 0.0) == Catch::Approx(1.0));  // full expected demand
    CHECK(agg_cost_deriv(z, 1.0, 1.0) == Catch::Approx(-0.5));
    CHECK(agg_cost_deriv(z, 1.0, 2.0) == Catch::Approx(0.0));
    CHECK_THROWS_AS(agg_cost(z, 1.0, -0.2), DomainError);

    auto skew = DemandLaw::scaled(GenDistribution::beta(2.0, 5.0), 3.0);
    for (int k = 1; k < 100; ++k) {
        const double y = 3.0 * k / 100.0;
        const double h = 1e-5;
        const double fd =
            (agg_cost(skew, 2.0, y + h) - agg_cost(skew, 2.0, y - h)) /
            (2.0 * h);
        CHECK(agg_cost_deriv(skew, 2.0, y) == Catch::Approx(fd).margin(1e-7));
        const double second = agg_cost(skew, 2.0, y + h) -
                              2.0 * agg_cost(skew, 2.0, y) +
                              agg_cost(skew, 2.0, y - h);
        CHECK(second >= -1e-9);
    }
}

TEST_CASE("welfare optimum on the symmetric uniform scenario") {
    auto sol = solve_swo(two_uniform_problem());
    REQUIRE(sol.y.size() == 2);
    CHECK(sol.y[0] == Catch::Approx(0.5).margin(1e-9));
    CHECK(sol.y[1] == Catch::Approx(0.5).margin(1e-9));
    CHECK(sol.total == Catch::Approx(1.0).margin(1e-9));
    CHECK(sol.multiplier == Catch::Approx(0.5).margin(1e-9));

    // interior KKT: marginal generator cost equals mu, aggregate marginal
    // saving equals mu
    auto p = two_uniform_problem();
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(gen_cost_deriv(p.players[i].type, p.spot_price, sol.y[i]) ==
              Catch::Approx(sol.multiplier).margin(1e-9));
    }
    CHECK(-agg_cost_deriv(p.demand, p.spot_price, sol.total) ==
          Catch::Approx(sol.multiplier).margin(1e-9));
}

TEST_CASE("welfare optimum for a single player and for zero demand") {
    AssignmentProblem solo({{1, GenDistribution::uniform(0.0, 1.0)}},
                           uniform_demand_02(), 1.0);
    auto s = solve_swo(solo);
    CHECK(s.y[0] == Catch::Approx(2.0 / 3.0).margin(1e-9));
    CHECK(s.multiplier == Catch::Approx(2.0 / 3.0).margin(1e-9));

    AssignmentProblem none(
        {{1, GenDistribution::uniform(0.0, 1.0)},
         {2, GenDistribution::beta(2.0, 2.0)}},
        DemandLaw::scaled(GenDistribution::point_mass(0.0), 2.0), 1.0);
    auto z = solve_swo(none);
    CHECK(z.y[0] == 0.0);
    CHECK(z.y[1] == 0.0);
    CHECK(z.total == 0.0);
}

TEST_CASE("welfare solver handles atoms and flat stretches") {
    SECTION("point-mass player against a low demand cap") {
        AssignmentProblem p(
            {{1, GenDistribution::point_mass(0.8)}},
            DemandLaw::scaled(GenDistribution::uniform(0.0, 1.0), 0.5), 1.0);
        auto s = solve_swo(p);
        CHECK(s.y[0] == Catch::Approx(0.5).margin(1e-9));
        CHECK(s.multiplier == Catch::Approx(0.0).margin(1e-9));
    }
    SECTION("atomic demand met exactly by costless capacity") {
        AssignmentProblem p(
            {{1, GenDistribution::point_mass(0.5)},
             {2, GenDistribution::point_mass(0.5)}},
            DemandLaw::scaled(GenDistribution::point_mass(0.3), 1.0), 1.0);
        auto s = solve_swo(p);
        CHECK(s.total == Catch::Approx(0.3).margin(1e-9));
        // ascending-position fill: the first player covers it all
        CHECK(s.y[0] == Catch::Approx(0.3).margin(1e-9));
        CHECK(s.y[1] == Catch::Approx(0.0).margin(1e-9));
    }
    SECTION("flat-CDF player splits the level set") {
        auto flat = GenDistribution::piecewise_linear_cdf(
            {{0.0, 0.0}, {0.25, 0.5}, {0.75, 0.5}, {1.0, 1.0}});
        AssignmentProblem p(
            {{1, flat}},
            DemandLaw::scaled(GenDistribution::point_mass(0.6), 1.0), 1.0);
        auto s = solve_swo(p);
        // mu = lambda/2 over the whole stretch [0.25, 0.75]; demand pins 0.6
        CHECK(s.y[0] == Catch::Approx(0.6).margin(1e-9));
        CHECK(s.multiplier == Catch::Approx(0.5).margin(1e-9));
    }
}

TEST_CASE("welfare optimum beats a brute-force grid") {
    std::vector<AssignmentProblem> problems;
    problems.push_back(two_uniform_problem());
    problems.push_back(AssignmentProblem(
        {{1, GenDistribution::beta(2.0, 1.0)},
         {2, GenDistribution::uniform(0.2, 0.9)}},
        DemandLaw::scaled(GenDistribution::beta(1.0, 2.0), 1.5), 2.0));
    problems.push_back(AssignmentProblem(
        {{1, GenDistribution::beta(0.5, 0.5)},
         {2, GenDistribution::uniform(0.0, 0.6)},
         {3, GenDistribution::beta(3.0, 2.0)}},
        uniform_demand_02(), 1.3));

    for (const auto& p : problems) {
        auto sol = solve_swo(p);
        const double at_sol = swo_objective(p, sol.y);
        const std::size_t n = p.players.size();
        std::vector<std::size_t> idx(n, 0);
        double best = std::numeric_limits<double>::infinity();
        while (true) {
            std::vector<double> y(n);
            for (std::size_t i = 0; i < n; ++i) y[i] = idx[i] / 20.0;
            best = std::min(best, swo_objective(p, y));
            std::size_t k = 0;
            while (k < n && ++idx[k] > 20) idx[k++] = 0;
            if (k == n) break;
        }
        CHECK(at_sol <= best + 1e-8);
    }
}

TEST_CASE("complete-report externality payments on the symmetric scenario") {
    auto res = run_vcg_complete(two_uniform_problem());
    REQUIRE(res.payments.size() == 2);
    // dropping one player moves the survivor to 2/3:
    // w = [c(2/3) - c(1/2)] + agg(2/3) - agg(1) = 7/72 + 7/36 = 7/24
    CHECK(res.payments[0] == Catch::Approx(7.0 / 24.0).margin(1e-9));
    CHECK(res.payments[1] == Catch::Approx(7.0 / 24.0).margin(1e-9));
    CHECK(res.assignment.y[0] == Catch::Approx(0.5).margin(1e-9));

    // truthful payoff: w - true commitment cost
    const double payoff =
        res.payments[0] -
        gen_cost(GenDistribution::uniform(0.0, 1.0), 1.0, res.assignment.y[0]);
    CHECK(payoff == Catch::Approx(7.0 / 24.0 - 0.125).margin(1e-9));
}

TEST_CASE("complete-report payments: solo and zero-demand corners") {
    AssignmentProblem solo({{1, GenDistribution::uniform(0.0, 1.0)}},
                           uniform_demand_02(), 1.0);
    auto res = run_vcg_complete(solo);
    // no other players: w1 = agg(0) - agg(y1)
    const double expect = agg_cost(solo.demand, 1.0, 0.0) -
                          agg_cost(solo.demand, 1.0, res.assignment.total);
    CHECK(res.payments[0] == Catch::Approx(expect).margin(1e-9));

    AssignmentProblem none(
        {{1, GenDistribution::uniform(0.0, 1.0)},
         {2, GenDistribution::uniform(0.0, 1.0)}},
        DemandLaw::scaled(GenDistribution::point_mass(0.0), 1.0), 1.0);
    auto zero = run_vcg_complete(none);
    CHECK(zero.payments[0] == Catch::Approx(0.0).margin(1e-12));
    CHECK(zero.payments[1] == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("complete-report truthfulness dominates a misreport grid") {
    const auto true_law = GenDistribution::uniform(0.0, 1.0);
    auto base = two_uniform_problem();
    auto truthful = run_vcg_complete(base);
    const double truthful_payoff =
        truthful.payments[0] -
        gen_cost(true_law, 1.0, truthful.assignment.y[0]);

    std::vector<GenDistribution> misreports;
    for (int k = 1; k <= 9; ++k) {
        misreports.push_back(GenDistribution::uniform(k / 10.0, 1.0));
        misreports.push_back(GenDistribution::uniform(0.0, k / 10.0));
        misreports.push_back(GenDistribution::beta(0.4 + 0.4 * k, 1.0));
    }
    misreports.push_back(GenDistribution::point_mass(0.3));
    misreports.push_back(GenDistribution::point_mass(0.9));

    for (const auto& lie : misreports) {
        AssignmentProblem p({{1, lie}, {2, true_law}}, uniform_demand_02(),
                            1.0);
        auto res = run_vcg_complete(p);
        const double payoff =
            res.payments[0] - gen_cost(true_law, 1.0, res.assignment.y[0]);
        CHECK(payoff <= truthful_payoff + 1e-9);
    }
}

TEST_CASE("two-dimensional-bid mechanism on the symmetric scenario") {
    std::vector<TwoDimBid> bids = {{1, 0.5, 0.5}, {2, 0.5, 0.5}};
    auto res = run_ivcg(bids, uniform_demand_02(), 1.0);
    REQUIRE(res.assignment.y.size() == 2);
    CHECK(res.assignment.y[0] == Catch::Approx(0.5).margin(1e-12));
    CHECK(res.assignment.y[1] == Catch::Approx(0.5).margin(1e-12));
    CHECK(res.assignment.total == Catch::Approx(1.0).margin(1e-12));
    // w1 = 0.5 * (0.5 - 0.5) + agg(0.5) - agg(1) = 0.5625 - 0.25
    CHECK(res.payments[0] == Catch::Approx(0.3125).margin(1e-9));
    CHECK(res.payments[1] == Catch::Approx(0.3125).margin(1e-9));

    const double payoff =
        res.payments[0] -
        gen_cost(GenDistribution::uniform(0.0, 1.0), 1.0, res.assignment.y[0]);
    CHECK(payoff == Catch::Approx(0.1875).margin(1e-9));
}

TEST_CASE("two-dimensional-bid corner rules") {
    auto z = uniform_demand_02();

    SECTION("ask at the spot price earns nothing") {
        std::vector<TwoDimBid> bids = {{1, 1.0, 1.0}, {2, 1.0, 0.4}};
        auto res = run_ivcg(bids, z, 1.0);
        CHECK(res.assignment.y[0] == 0.0);
        CHECK(res.assignment.y[1] == 0.0);
    }
    SECTION("free capacity fills before an at-price ask") {
        std::vector<TwoDimBid> bids = {{1, 0.0, 1.0}, {2, 1.0, 1.0}};
        auto res = run_ivcg(bids, z, 1.0);
        CHECK(res.assignment.y[0] == Catch::Approx(1.0));
        CHECK(res.assignment.y[1] == 0.0);
    }
    SECTION("equal asks fill by ascending id") {
        std::vector<TwoDimBid> bids = {{2, 0.5, 0.8}, {1, 0.5, 0.8}};
        auto res = run_ivcg(bids, z, 1.0);
        // stop level 1.0: id 1 (second in input order) fills first
        CHECK(res.assignment.y[1] == Catch::Approx(0.8));
        CHECK(res.assignment.y[0] == Catch::Approx(0.2));
    }
    SECTION("bid validation") {
        std::vector<TwoDimBid> bad1 = {{1, -0.1, 0.5}};
        CHECK_THROWS_AS(run_ivcg(bad1, z, 1.0), InvalidCostReport);
        std::vector<TwoDimBid> bad2 = {{1, 0.1, 1.5}};
        CHECK_THROWS_AS(run_ivcg(bad2, z, 1.0), InvalidCostReport);
        std::vector<TwoDimBid> dup = {{1, 0.1, 0.5}, {1, 0.2, 0.5}};
        CHECK_THROWS_AS(run_ivcg(dup, z, 1.0), SpecError);
        std::vector<TwoDimBid> ok = {{1, 0.1, 0.5}};
        CHECK_THROWS_AS(run_ivcg(ok, z, 0.0), SpecError);
    }
}

TEST_CASE("greedy fill matches a grid search of the reported program") {
    auto z = uniform_demand_02();
    std::vector<TwoDimBid> bids = {{1, 0.3, 0.6}, {2, 0.7, 0.9}};
    auto res = run_ivcg(bids, z, 1.0);

    double best = std::numeric_limits<double>::infinity();
    for (int a = 0; a <= 60; ++a) {
        for (int b = 0; b <= 90; ++b) {
            const double y1 = a / 100.0, y2 = b / 100.0;
            best = std::min(best, 0.3 * y1 + 0.7 * y2 +
                                      agg_cost(z, 1.0, y1 + y2));
        }
    }
    const double at_sol = 0.3 * res.assignment.y[0] +
                          0.7 * res.assignment.y[1] +
                          agg_cost(z, 1.0, res.assignment.total);
    CHECK(at_sol <= best + 1e-8);
}

TEST_CASE("efficient bid profile reproduces the welfare assignment") {
    auto p = two_uniform_problem();
    auto bids = efficient_bid_profile(p);
    REQUIRE(bids.size() == 2);
    CHECK(bids[0].ask_price == Catch::Approx(0.5).margin(1e-9));
    CHECK(bids[0].max_quantity == Catch::Approx(0.5).margin(1e-9));
    CHECK(bids[1].ask_price == Catch::Approx(0.5).margin(1e-9));
    CHECK(bids[1].max_quantity == Catch::Approx(0.5).margin(1e-9));

    auto eff = solve_swo(p);
    auto res = run_ivcg(bids, p.demand, p.spot_price);
    for (std::size_t i = 0; i < bids.size(); ++i) {
        CHECK(res.assignment.y[i] == Catch::Approx(eff.y[i]).margin(1e-9));
    }

    AssignmentProblem solo({{1, GenDistribution::uniform(0.0, 1.0)}},
                           uniform_demand_02(), 1.0);
    auto solo_bids = efficient_bid_profile(solo);
    CHECK(solo_bids[0].ask_price == Catch::Approx(2.0 / 3.0).margin(1e-9));
    CHECK(solo_bids[0].max_quantity == Catch::Approx(2.0 / 3.0).margin(1e-9));

    AssignmentProblem none(
        {{1, GenDistribution::uniform(0.0, 1.0)}},
        DemandLaw::scaled(GenDistribution::point_mass(0.0), 1.0), 1.0);
    auto degenerate = efficient_bid_profile(none);
    CHECK(degenerate[0].ask_price == Catch::Approx(0.0).margin(1e-12));
    CHECK(degenerate[0].max_quantity == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("no profitable deviation from the efficient profile, spot check") {
    auto p = AssignmentProblem({{1, GenDistribution::beta(2.0, 1.0)},
                                {2, GenDistribution::uniform(0.0, 1.0)}},
                               uniform_demand_02(), 1.0);
    auto bids = efficient_bid_profile(p);
    auto at_eq = run_ivcg(bids, p.demand, p.spot_price);
    const double eq_payoff =
        at_eq.payments[0] -
        gen_cost(p.players[0].type, p.spot_price, at_eq.assignment.y[0]);

    for (int a = 0; a <= 19; ++a) {
        for (int b = 0; b <= 19; ++b) {
            auto dev = bids;
            dev[0].ask_price = a / 19.0 * p.spot_price;
            dev[0].max_quantity = b / 19.0;
            auto res = run_ivcg(dev, p.demand, p.spot_price);
            const double payoff =
                res.payments[0] - gen_cost(p.players[0].type, p.spot_price,
                                           res.assignment.y[0]);
            CHECK(payoff <= eq_payoff + 1e-7);
        }
    }
}

TEST_CASE("payments stay nonnegative and solutions stay feasible at random") {
    Rng rng(0xa551517ULL);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 1 + static_cast<int>(rng.raw() % 4);
        std::vector<AssignmentPlayer> players;
        for (int i = 0; i < n; ++i) {
            const double a = rng.uniform01(), b = rng.uniform01();
            if (rng.raw() % 2 == 0) {
                players.push_back({i + 1, GenDistribution::beta(
                                              0.5 + 3.0 * a, 0.5 + 3.0 * b)});
            } else {
                players.push_back(
                    {i + 1, GenDistribution::uniform(0.5 * std::min(a, b),
                                                     0.5 + 0.5 * std::max(
                                                                     a, b))});
            }
        }
        const double lambda = 0.5 + 2.0 * rng.uniform01();
        const double zmax = 0.5 + 2.5 * rng.uniform01();
        AssignmentProblem p(
            players,
            DemandLaw::scaled(GenDistribution::beta(0.5 + 2.0 * rng.uniform01(),
                                                    0.5 + 2.0 * rng.uniform01()),
                              zmax),
            lambda);

        auto sol = solve_swo(p);
        double total = 0.0;
        for (double y : sol.y) {
            CHECK(y >= -1e-12);
            CHECK(y <= 1.0 + 1e-12);
            total += y;
        }
        CHECK(sol.total == Catch::Approx(total).margin(1e-10));
        CHECK(sol.multiplier >= -1e-12);
        CHECK(sol.multiplier <= lambda + 1e-12);

        auto vcg = run_vcg_complete(p);
        for (double w : vcg.payments) CHECK(w >= -1e-9);

        auto bids = efficient_bid_profile(p);
        auto ivcg = run_ivcg(bids, p.demand, p.spot_price);
        for (double w : ivcg.payments) CHECK(w >= -1e-9);
    }
}

TEST_CASE("problem validation") {
    CHECK_THROWS_AS(
        AssignmentProblem({}, uniform_demand_02(), 1.0), NotEnoughBidders);
    CHECK_THROWS_AS(
        AssignmentProblem({{1, GenDistribution::uniform(0.0, 1.0)}},
                          uniform_demand_02(), 0.0),
        SpecError);
    CHECK_THROWS_AS(
        AssignmentProblem({{1, GenDistribution::uniform(0.0, 1.0)},
                           {1, GenDistribution::beta(2.0, 2.0)}},
                          uniform_demand_02(), 1.0),
        SpecError);
}
