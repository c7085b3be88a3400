#pragma once

#include <stdexcept>
#include <string>

namespace tsirelson {

// Base class for every error raised by the library. Callers that only care
// about "something went wrong" catch this; the subclasses name the contract
// that was violated.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define TSIRELSON_DEFINE_ERROR(Name)      \
  class Name : public Error {             \
   public:                                \
    using Error::Error;                   \
  };

TSIRELSON_DEFINE_ERROR(InvalidArgument)
TSIRELSON_DEFINE_ERROR(IncompatiblePair)
TSIRELSON_DEFINE_ERROR(NotSupportedOnCyclicGrid)
TSIRELSON_DEFINE_ERROR(IndexOutOfDomain)
TSIRELSON_DEFINE_ERROR(SubgroupViolation)
TSIRELSON_DEFINE_ERROR(NoConstructiveCentering)
TSIRELSON_DEFINE_ERROR(NotC2)
TSIRELSON_DEFINE_ERROR(NotC3)
TSIRELSON_DEFINE_ERROR(TooFewSamples)
TSIRELSON_DEFINE_ERROR(ShapeMismatch)
TSIRELSON_DEFINE_ERROR(ParseError)
TSIRELSON_DEFINE_ERROR(ValidationError)
TSIRELSON_DEFINE_ERROR(IoError)

#undef TSIRELSON_DEFINE_ERROR

}  // namespace tsirelson
