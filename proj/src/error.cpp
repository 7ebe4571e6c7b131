#include "demandcast/error.hpp"

namespace demandcast {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::Input: return "Input";
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::TooManyMalformed: return "TooManyMalformed";
    case ErrorCode::DuplicateDate: return "DuplicateDate";
    case ErrorCode::LeadingGap: return "LeadingGap";
    case ErrorCode::EmptyPartition: return "EmptyPartition";
    case ErrorCode::ZeroPeriod: return "ZeroPeriod";
    case ErrorCode::LagExceedsSeries: return "LagExceedsSeries";
    case ErrorCode::CalendarGap: return "CalendarGap";
    case ErrorCode::DegenerateTarget: return "DegenerateTarget";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::NoSplits: return "NoSplits";
    case ErrorCode::SingularDesign: return "SingularDesign";
    case ErrorCode::MissingActuals: return "MissingActuals";
    case ErrorCode::NonPositiveData: return "NonPositiveData";
    case ErrorCode::SingularBasis: return "SingularBasis";
    case ErrorCode::IterationCapReached: return "IterationCapReached";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::FingerprintMismatch: return "FingerprintMismatch";
    case ErrorCode::MissingForecasts: return "MissingForecasts";
    }
    return "Unknown";
}

} // namespace demandcast
