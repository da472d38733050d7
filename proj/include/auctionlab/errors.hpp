#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace auctionlab {

// Base class for every domain error raised by the library.  `name()` is a
// stable machine-readable identifier (printed by the CLI and asserted in
// tests); `what()` carries free-form context for humans.
class AuctionError : public std::runtime_error {
public:
    AuctionError(std::string name, const std::string& message)
        : std::runtime_error(message), name_(std::move(name)) {}

    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

#define AUCTIONLAB_ERROR(ClassName)                                   \
    class ClassName : public AuctionError {                           \
    public:                                                           \
        explicit ClassName(const std::string& message)                \
            : AuctionError(#ClassName, message) {}                    \
    }

// Malformed or out-of-range distribution parameters.
AUCTIONLAB_ERROR(InvalidDistribution);
// Probability argument outside [0, 1].
AUCTIONLAB_ERROR(InvalidProbability);
// Point argument outside the unit interval the model lives on.
AUCTIONLAB_ERROR(DomainError);
// Objective malformed or evaluated where it is undefined.
AUCTIONLAB_ERROR(ObjectiveDomainError);
// Mechanism needs strictly more bidders than were supplied.
AUCTIONLAB_ERROR(NotEnoughBidders);
// Shortfall-penalty mechanisms need a nonnegative nondecreasing objective.
AUCTIONLAB_ERROR(ObjectiveNotAdmissible);
// Penalty price is undefined: full-capacity value equals the runner-up's
// expected value, so the penalty multiplier would divide by zero.
AUCTIONLAB_ERROR(DegeneratePenaltyPrice);
// A settlement was asked for a winner whose realization is absent.
AUCTIONLAB_ERROR(MissingRealization);
// A vector argument does not match the declared number of slots.
AUCTIONLAB_ERROR(ArityError);
// An iterative solver failed to converge within its step budget.
AUCTIONLAB_ERROR(SolverError);
// A submitted cost report or two-part bid fails validation.
AUCTIONLAB_ERROR(InvalidCostReport);
// Inputs are structurally inconsistent with the requested operation.
AUCTIONLAB_ERROR(SpecError);
// A scenario file could not be read or decoded.
AUCTIONLAB_ERROR(ParseError);

#undef AUCTIONLAB_ERROR

}  // namespace auctionlab
