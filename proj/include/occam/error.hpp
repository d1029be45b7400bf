#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace occam {

enum class ErrorKind {
    InvalidPoolSize,
    InvalidSize,
    InvalidPrior,
    InvalidParameter,
    OutOfRange,
    NonInvertible,
    Dimension,
    TooLarge,
    MissingGroundTruth,
    Domain,
    InvalidCorrelation,
    InvalidDensity,
    Parse,
    Validation,
    Duplicate,
    EmptyPool,
    InputNotFound,
    Io,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::InvalidPoolSize: return "invalid-pool-size";
    case ErrorKind::InvalidSize: return "invalid-size";
    case ErrorKind::InvalidPrior: return "invalid-prior";
    case ErrorKind::InvalidParameter: return "invalid-parameter";
    case ErrorKind::OutOfRange: return "out-of-range";
    case ErrorKind::NonInvertible: return "non-invertible";
    case ErrorKind::Dimension: return "dimension";
    case ErrorKind::TooLarge: return "too-large";
    case ErrorKind::MissingGroundTruth: return "missing-ground-truth";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::InvalidCorrelation: return "invalid-correlation";
    case ErrorKind::InvalidDensity: return "invalid-density";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::Duplicate: return "duplicate";
    case ErrorKind::EmptyPool: return "empty-pool";
    case ErrorKind::InputNotFound: return "input-not-found";
    case ErrorKind::Io: return "io";
    }
    return "unknown";
}

/// Every failure raised by the library carries a machine-readable kind.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind)
    {
    }

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

#define OCCAM_REQUIRE(cond, kind, msg)                    \
    do {                                                  \
        if (!(cond)) throw ::occam::Error((kind), (msg)); \
    } while (0)

} // namespace occam
