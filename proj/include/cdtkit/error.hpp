#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cdtkit {

enum class Errc {
  kAllZero,
  kNonFinite,
  kOutOfRange,
  kOutOfDomain,
  kNonMonotone,
  kNonPositiveScale,
  kRangeMismatch,
  kReferenceMismatch,
  kSingularScatter,
  kBadRank,
  kNotConverged,
  kDimensionMismatch,
  kTooFewSamples,
  kDomainEscape,
  kEmptyInput,
  kParseError,
  kLabelMissing,
  kInvalidArgument,
};

std::string_view to_string(Errc code);

/// Every failure raised by the library carries one of the codes above so that
/// callers (the CLI in particular) can map them onto exit codes.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace cdtkit
