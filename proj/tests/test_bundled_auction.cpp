#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "auctionlab/bundled_auction.hpp"
#include "oracles.hpp"

using namespace auctionlab;

namespace {

// Link 0: {1: Beta(2,1), 2: Uniform}; link 1: {1: Uniform, 2: Uniform}.
BundledScenario route_scenario(MultiObjectiveFn h) {
    return BundledScenario{
        {{{1, GenDistribution::beta(2.0, 1.0)},
          {2, GenDistribution::uniform(0.0, 1.0)}},
         {{1, GenDistribution::uniform(0.0, 1.0)},
          {2, GenDistribution::uniform(0.0, 1.0)}}},
        std::move(h)};
}

}  // namespace

TEST_CASE("joint welfare of independent laws") {
    const auto s = route_scenario(MultiObjectiveFn::min_of_all());
    const std::vector<int> uu{2, 1};
    const std::vector<int> bu{1, 1};

    SECTION("bottleneck welfare closed forms") {
        // E[min(U, U)] = int_0^1 (1 - t)^2 dt = 1/3.
        CHECK(welfare_A(s, uu) == Catch::Approx(1.0 / 3.0).margin(1e-7));
        // E[min(Beta(2,1), U)] = int_0^1 (1 - t^2)(1 - t) dt = 5/12.
        CHECK(welfare_A(s, bu) == Catch::Approx(5.0 / 12.0).margin(1e-7));
    }
    SECTION("single-link scenarios reduce to plain expectations") {
        for (const auto& h :
             {MultiObjectiveFn::min_of_all(), MultiObjectiveFn::product_form(),
              MultiObjectiveFn::weighted_sum({1.0})}) {
            const BundledScenario one{
                {{{1, GenDistribution::beta(2.0, 1.0)},
                  {2, GenDistribution::uniform(0.0, 1.0)}}},
                h};
            const std::vector<int> pick{1};
            CHECK(welfare_A(one, pick) ==
                  Catch::Approx(2.0 / 3.0).margin(1e-8));
        }
    }
    SECTION("weighted sum and product factorize exactly") {
        const auto ws = route_scenario(MultiObjectiveFn::weighted_sum(
            {0.3, 0.7}));
        CHECK(welfare_A(ws, bu) ==
              Catch::Approx(0.3 * 2.0 / 3.0 + 0.7 * 0.5).margin(1e-12));
        const auto pf = route_scenario(MultiObjectiveFn::product_form());
        CHECK(welfare_A(pf, bu) ==
              Catch::Approx(2.0 / 3.0 * 0.5).margin(1e-12));
    }
    SECTION("validation") {
        CHECK_THROWS_AS(welfare_A(s, std::vector<int>{1}), ArityError);
        CHECK_THROWS_AS(welfare_A(s, std::vector<int>{1, 9}), SpecError);
        BundledScenario thin{{{{1, GenDistribution::uniform(0.0, 1.0)}}},
                             MultiObjectiveFn::min_of_all()};
        const std::vector<int> pick{1};
        CHECK_THROWS_AS(welfare_A(thin, pick), NotEnoughBidders);
        auto bad_arity = route_scenario(
            MultiObjectiveFn::weighted_sum({0.5, 0.25, 0.25}));
        CHECK_THROWS_AS(welfare_A(bad_arity, bu), ArityError);
    }
}

TEST_CASE("pinned welfare") {
    const auto s = route_scenario(MultiObjectiveFn::min_of_all());
    const std::vector<int> uu{2, 1};

    SECTION("closed form against a pinned coordinate") {
        for (double t : oracle::linspace(0.0, 1.0, 11)) {
            // E[min(t, U)] = t - t^2/2.
            CHECK(welfare_A_partial(s, uu, 0, t) ==
                  Catch::Approx(t - 0.5 * t * t).margin(1e-8));
        }
        CHECK(welfare_A_partial(s, uu, 0, 1.0) ==
              Catch::Approx(0.5).margin(1e-8));
        CHECK(welfare_A_partial(s, uu, 0, 0.0) == 0.0);
    }
    SECTION("averaging the pinned welfare recovers the joint welfare") {
        const std::vector<int> bu{1, 1};
        const auto& beta_law = GenDistribution::beta(2.0, 1.0);
        const double averaged = beta_law.expect_of(
            [&](double x) { return welfare_A_partial(s, bu, 0, x, 1e-9); },
            {}, 1e-9);
        CHECK(averaged == Catch::Approx(welfare_A(s, bu)).margin(2e-7));
    }
    SECTION("domain checks") {
        CHECK_THROWS_AS(welfare_A_partial(s, uu, 0, 1.5), DomainError);
        CHECK_THROWS_AS(welfare_A_partial(s, uu, 5, 0.5), ArityError);
    }
}

TEST_CASE("bundled expectation-of-value mechanism") {
    const auto s = route_scenario(MultiObjectiveFn::min_of_all());
    const auto c = run_bsvcg(s);

    CHECK(c.winners == std::vector<int>{1, 1});
    CHECK(c.welfare == Catch::Approx(5.0 / 12.0).margin(1e-7));

    // Link-0 winner: best tuple avoiding him is (2, 1) at welfare 1/3.
    CHECK(c.awards[0].marginal_tuple == std::vector<int>{2, 1});
    CHECK(c.awards[0].marginal_welfare ==
          Catch::Approx(1.0 / 3.0).margin(1e-7));
    CHECK(c.awards[0].pre_payment == Catch::Approx(-1.0 / 3.0).margin(1e-7));

    // Link-1 winner: best tuple avoiding him keeps the beta bidder.
    CHECK(c.awards[1].marginal_tuple == std::vector<int>{1, 2});
    CHECK(c.awards[1].pre_payment ==
          Catch::Approx(-5.0 / 12.0).margin(1e-7));

    SECTION("settlement pays conditional welfare") {
        const auto st = settle_bundled(
            c, {{{0, 1}, 0.8}, {{0, 2}, 0.3}, {{1, 1}, 0.6}, {{1, 2}, 0.2}});
        REQUIRE(st.size() == 4);
        // Participants ascend by (link, id); (0,1) is the link-0 winner.
        CHECK(st[0].link == 0);
        CHECK(st[0].player_id == 1);
        CHECK(st[0].payoff ==
              Catch::Approx(0.8 - 0.32 - 1.0 / 3.0).margin(1e-6));
        // (0,2) lost link 0.
        CHECK(st[1].payoff == 0.0);
        CHECK(st[1].pre_payment == 0.0);
        // (1,1) won link 1: payoff E[min(B, 0.6)] - 5/12.
        const double cond = GenDistribution::beta(2.0, 1.0).expect_of(
            [](double x) { return std::min(x, 0.6); }, std::vector<double>{0.6},
            1e-11);
        CHECK(st[2].payoff == Catch::Approx(cond - 5.0 / 12.0).margin(1e-6));
    }
    SECTION("missing winner realization") {
        CHECK_THROWS_AS(settle_bundled(c, {{{0, 1}, 0.8}}),
                        MissingRealization);
    }
}

TEST_CASE("bundled penalty mechanism") {
    const auto s = route_scenario(MultiObjectiveFn::min_of_all());
    const auto c = run_bssp(s);

    CHECK(c.winners == std::vector<int>{1, 1});
    // Link 0: p = welfare with slot 0 at full capacity = E[min(1,U)] = 1/2;
    // lambda = (1/2) / (1/2 - 1/3) = 3.
    CHECK(c.awards[0].pre_payment == Catch::Approx(0.5).margin(1e-7));
    REQUIRE(c.awards[0].penalty_price.has_value());
    CHECK(*c.awards[0].penalty_price == Catch::Approx(3.0).margin(1e-5));
    // Link 1: full-capacity welfare E[min(B,1)] = 2/3, marginal 5/12.
    CHECK(*c.awards[1].penalty_price ==
          Catch::Approx((2.0 / 3.0) / (2.0 / 3.0 - 5.0 / 12.0)).margin(1e-5));

    SECTION("every penalty price is >= 1") {
        for (const auto& a : c.awards) {
            CHECK(*a.penalty_price >= 1.0 - 1e-9);
        }
    }
    SECTION("full delivery keeps the full pre payment") {
        const auto st = settle_bundled(
            c, {{{0, 1}, 1.0}, {{0, 2}, 0.3}, {{1, 1}, 0.6}, {{1, 2}, 0.2}});
        CHECK(st[0].payoff ==
              Catch::Approx(*c.awards[0].full_capacity_welfare).margin(1e-6));
        CHECK(st[0].post_payment == Catch::Approx(0.0).margin(1e-6));
    }
    SECTION("zero delivery under the bottleneck objective") {
        const auto st = settle_bundled(
            c, {{{0, 1}, 0.0}, {{0, 2}, 0.3}, {{1, 1}, 0.6}, {{1, 2}, 0.2}});
        const double full = *c.awards[0].full_capacity_welfare;
        const double lambda = *c.awards[0].penalty_price;
        CHECK(st[0].payoff == Catch::Approx(full * (1.0 - lambda)).margin(1e-6));
    }
    SECTION("degenerate penalty price") {
        BundledScenario deg{{{{1, GenDistribution::point_mass(1.0)},
                              {2, GenDistribution::point_mass(1.0)}},
                             {{1, GenDistribution::point_mass(1.0)},
                              {2, GenDistribution::point_mass(1.0)}}},
                            MultiObjectiveFn::min_of_all()};
        CHECK_THROWS_AS(run_bssp(deg), DegeneratePenaltyPrice);
    }
}

TEST_CASE("separable objectives keep other links' winners in marginal tuples") {
    const auto ws = route_scenario(MultiObjectiveFn::weighted_sum({0.3, 0.7}));
    const auto c = run_bsvcg(ws);
    REQUIRE(c.winners == std::vector<int>{1, 1});
    for (std::size_t l = 0; l < c.awards.size(); ++l) {
        for (std::size_t r = 0; r < c.winners.size(); ++r) {
            if (r == l) continue;
            CHECK(c.awards[l].marginal_tuple[r] == c.winners[r]);
        }
    }
}

TEST_CASE("quasi-random welfare handles many links") {
    // E[min of 5 independent U(0,1)] = 1/6.
    std::vector<std::vector<BundledBid>> links;
    for (int l = 0; l < 5; ++l) {
        links.push_back({{1, GenDistribution::uniform(0.0, 1.0)},
                         {2, GenDistribution::uniform(0.0, 1.0)}});
    }
    const BundledScenario s{links, MultiObjectiveFn::min_of_all()};
    const std::vector<int> pick{1, 1, 1, 1, 1};
    const double v = welfare_A(s, pick, 1e-6);
    CHECK(v == Catch::Approx(1.0 / 6.0).margin(1e-4));
    // Deterministic: same call, same value.
    CHECK(welfare_A(s, pick, 1e-6) == v);
}

TEST_CASE("bundled objectives validate and classify") {
    CHECK_THROWS_AS(MultiObjectiveFn::weighted_sum({}),
                    auctionlab::ObjectiveDomainError);
    CHECK(MultiObjectiveFn::min_of_all().nonnegative_nondecreasing());
    CHECK(MultiObjectiveFn::product_form().nonnegative_nondecreasing());
    CHECK(MultiObjectiveFn::weighted_sum({0.2, 0.8})
              .nonnegative_nondecreasing());
    CHECK_FALSE(MultiObjectiveFn::weighted_sum({0.2, -0.8})
                    .nonnegative_nondecreasing());
    CHECK(MultiObjectiveFn::weighted_sum({0.2, 0.8}).separable());
    CHECK_FALSE(MultiObjectiveFn::min_of_all().separable());
    const std::vector<double> xs{0.4, 0.9};
    CHECK(MultiObjectiveFn::min_of_all().eval(xs) == 0.4);
    CHECK(MultiObjectiveFn::product_form().eval(xs) == Catch::Approx(0.36));
    CHECK(MultiObjectiveFn::weighted_sum({0.5, 0.5}).eval(xs) ==
          Catch::Approx(0.65));
}
