#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace demandcast {

enum class ErrorCode {
    InvalidArgument,
    InvalidConfig,
    Input,
    MalformedRow,
    EmptyInput,
    TooManyMalformed,
    DuplicateDate,
    LeadingGap,
    EmptyPartition,
    ZeroPeriod,
    LagExceedsSeries,
    CalendarGap,
    DegenerateTarget,
    SchemaMismatch,
    NoSplits,
    SingularDesign,
    MissingActuals,
    NonPositiveData,
    SingularBasis,
    IterationCapReached,
    ZeroVariance,
    FingerprintMismatch,
    MissingForecasts,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries a machine-readable code.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace demandcast
