#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "auctionlab/objectives.hpp"
#include "oracles.hpp"

using auctionlab::GenDistribution;
using auctionlab::ObjectiveFn;

namespace {

std::vector<ObjectiveFn> objective_zoo() {
    return {ObjectiveFn::identity(),
            ObjectiveFn::capped_demand(0.5),
            ObjectiveFn::capped_demand(1.0),
            ObjectiveFn::monomial(2),
            ObjectiveFn::monomial(5),
            ObjectiveFn::affine_clip(0.25, 0.5),
            ObjectiveFn::piecewise_linear(
                {{0.0, 0.0}, {0.3, 0.6}, {0.7, 0.8}, {1.0, 1.0}})};
}

std::vector<GenDistribution> law_zoo() {
    return {GenDistribution::uniform(0.0, 1.0),
            GenDistribution::uniform(0.2, 0.7),
            GenDistribution::beta(2.0, 1.0),
            GenDistribution::beta(3.5, 2.0),
            GenDistribution::point_mass(0.62),
            GenDistribution::piecewise_linear_cdf(
                {{0.0, 0.0}, {0.25, 0.5}, {0.75, 0.5}, {1.0, 1.0}}),
            GenDistribution::piecewise_linear_cdf(
                {{0.0, 0.0}, {0.5, 0.5}, {0.5, 1.0}, {1.0, 1.0}})};
}

}  // namespace

TEST_CASE("objective constructors validate") {
    CHECK_THROWS_AS(ObjectiveFn::capped_demand(-0.1),
                    auctionlab::ObjectiveDomainError);
    CHECK_THROWS_AS(ObjectiveFn::capped_demand(1.1),
                    auctionlab::ObjectiveDomainError);
    CHECK_THROWS_AS(ObjectiveFn::monomial(0),
                    auctionlab::ObjectiveDomainError);
    CHECK_THROWS_AS(ObjectiveFn::piecewise_linear({{0.0, 0.0}}),
                    auctionlab::ObjectiveDomainError);
    CHECK_THROWS_AS(
        ObjectiveFn::piecewise_linear({{0.1, 0.0}, {1.0, 1.0}}),
        auctionlab::ObjectiveDomainError);
    CHECK_THROWS_AS(
        ObjectiveFn::piecewise_linear({{0.0, 0.0}, {0.5, 0.5}, {0.5, 0.7},
                                       {1.0, 1.0}}),
        auctionlab::ObjectiveDomainError);
}

TEST_CASE("objective evaluation and domain") {
    const auto h = ObjectiveFn::capped_demand(0.5);
    CHECK(h.eval(0.2) == 0.2);
    CHECK(h.eval(0.9) == 0.5);
    CHECK(h.at_full_capacity() == 0.5);
    CHECK_THROWS_AS(h.eval(-0.01), auctionlab::DomainError);
    CHECK_THROWS_AS(h.eval(1.01), auctionlab::DomainError);

    const auto pw = ObjectiveFn::piecewise_linear(
        {{0.0, 0.0}, {0.3, 0.6}, {0.7, 0.8}, {1.0, 1.0}});
    CHECK(pw.eval(0.0) == 0.0);
    CHECK(pw.eval(0.3) == Catch::Approx(0.6));
    CHECK(pw.eval(0.5) == Catch::Approx(0.7));
    CHECK(pw.eval(1.0) == 1.0);

    CHECK(ObjectiveFn::monomial(5).eval(0.5) == Catch::Approx(0.03125));
    CHECK(ObjectiveFn::affine_clip(0.25, 0.5).eval(0.5) ==
          Catch::Approx(0.5));
}

TEST_CASE("penalty admissibility is decided from parameters") {
    CHECK(ObjectiveFn::identity().nonnegative_nondecreasing());
    CHECK(ObjectiveFn::capped_demand(0.5).nonnegative_nondecreasing());
    CHECK(ObjectiveFn::monomial(3).nonnegative_nondecreasing());
    CHECK(ObjectiveFn::affine_clip(0.25, 0.5).nonnegative_nondecreasing());
    // Negative at zero.
    CHECK_FALSE(
        ObjectiveFn::affine_clip(-0.5, 2.0).nonnegative_nondecreasing());
    // Decreasing.
    CHECK_FALSE(
        ObjectiveFn::affine_clip(1.0, -0.5).nonnegative_nondecreasing());
    CHECK_FALSE(ObjectiveFn::piecewise_linear(
                    {{0.0, 0.0}, {0.5, 0.8}, {1.0, 0.4}})
                    .nonnegative_nondecreasing());
}

TEST_CASE("objective kinks are reported") {
    CHECK(ObjectiveFn::capped_demand(0.5).kinks() ==
          std::vector<double>{0.5});
    CHECK(ObjectiveFn::capped_demand(1.0).kinks().empty());
    CHECK(ObjectiveFn::identity().kinks().empty());
    CHECK(ObjectiveFn::piecewise_linear(
              {{0.0, 0.0}, {0.3, 0.6}, {0.7, 0.8}, {1.0, 1.0}})
              .kinks() == std::vector<double>{0.3, 0.7});
}

TEST_CASE("expected objective values: frozen cases") {
    CHECK(expect(GenDistribution::uniform(0.0, 1.0),
                 ObjectiveFn::capped_demand(0.5)) ==
          Catch::Approx(0.375).margin(1e-12));
    CHECK(expect(GenDistribution::beta(2.0, 1.0), ObjectiveFn::monomial(2)) ==
          Catch::Approx(0.5).margin(1e-12));
    CHECK(expect(GenDistribution::point_mass(0.62),
                 ObjectiveFn::capped_demand(0.5)) == 0.5);
    CHECK(expect(GenDistribution::uniform(0.2, 0.7),
                 ObjectiveFn::identity()) == Catch::Approx(0.45));
    // Bimodal piecewise law against the capped objective, by hand:
    // lower lobe contributes int_0^{0.25} 2x dx = 0.0625, upper lobe is
    // capped at 0.5 with mass 0.5.
    CHECK(expect(GenDistribution::piecewise_linear_cdf(
                     {{0.0, 0.0}, {0.25, 0.5}, {0.75, 0.5}, {1.0, 1.0}}),
                 ObjectiveFn::capped_demand(0.5)) ==
          Catch::Approx(0.3125).margin(1e-12));
}

TEST_CASE("expectation is linear and respects bounds") {
    for (const auto& d : law_zoo()) {
        const double m = d.mean();
        // Affine objective: E[a + b X] = a + b E[X].
        CHECK(expect(d, ObjectiveFn::affine_clip(0.25, 0.5)) ==
              Catch::Approx(0.25 + 0.5 * m).margin(1e-10));
        for (const auto& h : objective_zoo()) {
            const double v = expect(d, h);
            // h maps [0,1] into [min h, max h]; every zoo member is
            // bounded by [0, 1] except the affine one by [0, 0.75].
            CHECK(v >= -1e-12);
            CHECK(v <= 1.0 + 1e-12);
        }
    }
}

TEST_CASE("exact expectation branches agree with raw quadrature") {
    for (const auto& d : law_zoo()) {
        for (const auto& h : objective_zoo()) {
            const double fast = expect(d, h);
            const double slow = d.expect_of(
                [&](double x) { return h.eval(x); }, h.kinks(), 1e-11);
            CHECK(fast == Catch::Approx(slow).margin(1e-9));
        }
    }
}
