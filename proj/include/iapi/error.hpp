#pragma once

#include <stdexcept>
#include <string>

namespace iapi {

/// Base class for every error raised by the library. `kind()` is a stable
/// machine-readable tag (used in JSON reports and CLI messages).
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define IAPI_DEFINE_ERROR(Name)                                    \
  class Name : public Error {                                      \
   public:                                                         \
    explicit Name(const std::string& message) : Error(#Name, message) {} \
  }

IAPI_DEFINE_ERROR(DimensionMismatch);
IAPI_DEFINE_ERROR(ModelError);
IAPI_DEFINE_ERROR(RankDeficient);
IAPI_DEFINE_ERROR(NonFiniteState);
IAPI_DEFINE_ERROR(TailNotNegligible);
IAPI_DEFINE_ERROR(NoBracket);
IAPI_DEFINE_ERROR(EmptyGrid);
IAPI_DEFINE_ERROR(RayEscapedParent);
IAPI_DEFINE_ERROR(NonPositiveMinimum);
IAPI_DEFINE_ERROR(RegionCollapsed);
IAPI_DEFINE_ERROR(ContainmentViolated);
IAPI_DEFINE_ERROR(UnsupportedDimension);
IAPI_DEFINE_ERROR(AdmissibilityCheckFailed);
IAPI_DEFINE_ERROR(ConfigError);
IAPI_DEFINE_ERROR(HistoryError);

#undef IAPI_DEFINE_ERROR

}  // namespace iapi
