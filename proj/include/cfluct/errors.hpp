#pragma once

#include <stdexcept>
#include <string>

namespace cfluct {

// Base of every error raised by the library. Each subclass names one
// contract violation so callers (and the CLI) can map it to a report entry.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define CFLUCT_DEFINE_ERROR(Name)             \
  class Name : public Error {                 \
   public:                                    \
    explicit Name(const std::string& what)    \
        : Error(std::string(#Name ": ") + what) {} \
  }

CFLUCT_DEFINE_ERROR(DuplicateLabel);
CFLUCT_DEFINE_ERROR(UnknownLabel);
CFLUCT_DEFINE_ERROR(BadPermutation);
CFLUCT_DEFINE_ERROR(DimError);
CFLUCT_DEFINE_ERROR(PartyError);
CFLUCT_DEFINE_ERROR(NumericalError);
CFLUCT_DEFINE_ERROR(BranchRelationError);
CFLUCT_DEFINE_ERROR(ConstraintViolation);
CFLUCT_DEFINE_ERROR(SectorError);
CFLUCT_DEFINE_ERROR(NormError);
CFLUCT_DEFINE_ERROR(DomainError);
CFLUCT_DEFINE_ERROR(InversionError);
CFLUCT_DEFINE_ERROR(ModelClassError);
// Malformed input files or arguments (as opposed to well-formed but invalid models).
CFLUCT_DEFINE_ERROR(ParseError);

#undef CFLUCT_DEFINE_ERROR

}  // namespace cfluct
