#pragma once

#include <stdexcept>

namespace lumen {

// Base class for all domain errors raised by the library.
// The CLI maps these to exit code 1 (usage errors exit with 2).
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DuplicateTriplet final : Error { using Error::Error; };
struct TripletOrderViolation final : Error { using Error::Error; };
struct NonPositiveRate final : Error { using Error::Error; };
struct StateOutOfRange final : Error { using Error::Error; };
struct GridOutOfRange final : Error { using Error::Error; };
struct EventBudgetExceeded final : Error { using Error::Error; };
struct BlowUp final : Error { using Error::Error; };
struct NoConvergence final : Error { using Error::Error; };
struct NonPhysicalRoot final : Error { using Error::Error; };
struct AmbiguousDominantChannel final : Error { using Error::Error; };
struct InsufficientHits final : Error { using Error::Error; };
struct AllCensored final : Error { using Error::Error; };
struct ParseError final : Error { using Error::Error; };

} // namespace lumen
