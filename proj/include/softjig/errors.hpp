#pragma once

#include <stdexcept>
#include <string>

namespace softjig {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define SOFTJIG_DEFINE_ERROR(Name)            \
  class Name : public Error {                 \
   public:                                    \
    explicit Name(const std::string& what)    \
        : Error(std::string(#Name ": ") + what) {} \
  }

SOFTJIG_DEFINE_ERROR(DegenerateInput);
SOFTJIG_DEFINE_ERROR(DimensionMismatch);
SOFTJIG_DEFINE_ERROR(CapExceeded);
SOFTJIG_DEFINE_ERROR(InfeasibleOrientation);
SOFTJIG_DEFINE_ERROR(InvalidArgument);
SOFTJIG_DEFINE_ERROR(PenetrationTooDeep);
SOFTJIG_DEFINE_ERROR(NoContacts);
SOFTJIG_DEFINE_ERROR(NoStablePose);
SOFTJIG_DEFINE_ERROR(NoConsensus);
SOFTJIG_DEFINE_ERROR(Diverged);
SOFTJIG_DEFINE_ERROR(IoError);
SOFTJIG_DEFINE_ERROR(ConfigError);

#undef SOFTJIG_DEFINE_ERROR

}  // namespace softjig
