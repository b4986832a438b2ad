#pragma once

#include <stdexcept>
#include <string>

namespace porcelain {

// Base for every error the toolkit raises on bad input or data. The CLI maps
// these to exit code 1; anything else escaping is a bug.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define PORCELAIN_DEFINE_ERROR(Name)      \
  class Name : public Error {             \
   public:                                \
    using Error::Error;                   \
  }

PORCELAIN_DEFINE_ERROR(MissingFile);
PORCELAIN_DEFINE_ERROR(MalformedHeader);
PORCELAIN_DEFINE_ERROR(FormatError);
PORCELAIN_DEFINE_ERROR(DomainError);
PORCELAIN_DEFINE_ERROR(AllZero);
PORCELAIN_DEFINE_ERROR(ShapeMismatch);
PORCELAIN_DEFINE_ERROR(MissingTask);
PORCELAIN_DEFINE_ERROR(InfeasibleSpec);
PORCELAIN_DEFINE_ERROR(OverlapError);
PORCELAIN_DEFINE_ERROR(MissingLexiconEntry);
PORCELAIN_DEFINE_ERROR(EmptyPlan);
PORCELAIN_DEFINE_ERROR(NonFiniteInput);
PORCELAIN_DEFINE_ERROR(DimensionMismatch);
PORCELAIN_DEFINE_ERROR(NumericalFailure);
PORCELAIN_DEFINE_ERROR(RangeError);
PORCELAIN_DEFINE_ERROR(ZeroSupport);
PORCELAIN_DEFINE_ERROR(EmptyInput);

#undef PORCELAIN_DEFINE_ERROR

}  // namespace porcelain
