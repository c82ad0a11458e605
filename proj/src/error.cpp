#include "cdtkit/error.hpp"

namespace cdtkit {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::kAllZero: return "AllZero";
    case Errc::kNonFinite: return "NonFinite";
    case Errc::kOutOfRange: return "OutOfRange";
    case Errc::kOutOfDomain: return "OutOfDomain";
    case Errc::kNonMonotone: return "NonMonotone";
    case Errc::kNonPositiveScale: return "NonPositiveScale";
    case Errc::kRangeMismatch: return "RangeMismatch";
    case Errc::kReferenceMismatch: return "ReferenceMismatch";
    case Errc::kSingularScatter: return "SingularScatter";
    case Errc::kBadRank: return "BadRank";
    case Errc::kNotConverged: return "NotConverged";
    case Errc::kDimensionMismatch: return "DimensionMismatch";
    case Errc::kTooFewSamples: return "TooFewSamples";
    case Errc::kDomainEscape: return "DomainEscape";
    case Errc::kEmptyInput: return "EmptyInput";
    case Errc::kParseError: return "ParseError";
    case Errc::kLabelMissing: return "LabelMissing";
    case Errc::kInvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace cdtkit
