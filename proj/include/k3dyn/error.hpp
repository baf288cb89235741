#pragma once

#include <stdexcept>
#include <string>

namespace k3dyn {

// Base of every error the library throws. Each concrete failure mode gets its
// own type so callers can catch exactly what they can recover from.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define K3DYN_DEFINE_ERROR(Name)                                   \
  class Name : public Error {                                      \
   public:                                                         \
    explicit Name(const std::string& what) : Error(#Name ": " + what) {} \
  }

// minkowski
K3DYN_DEFINE_ERROR(DimensionError);
K3DYN_DEFINE_ERROR(ConfigError);
K3DYN_DEFINE_ERROR(NotOnHyperboloid);
K3DYN_DEFINE_ERROR(FormViolation);
K3DYN_DEFINE_ERROR(SignatureError);
K3DYN_DEFINE_ERROR(OverflowError);

// wehler
K3DYN_DEFINE_ERROR(InvalidSurface);
K3DYN_DEFINE_ERROR(NumericError);
K3DYN_DEFINE_ERROR(DegenerateFiber);
K3DYN_DEFINE_ERROR(IndeterminateRoot);
K3DYN_DEFINE_ERROR(ChartSingular);

// pentagon
K3DYN_DEFINE_ERROR(InvalidLengths);
K3DYN_DEFINE_ERROR(NoClosure);
K3DYN_DEFINE_ERROR(DegenerateChart);
K3DYN_DEFINE_ERROR(UndefinedAxis);
K3DYN_DEFINE_ERROR(IndeterminacyPoint);

// randwalk
K3DYN_DEFINE_ERROR(Unsupported);
K3DYN_DEFINE_ERROR(SamplerError);

// cli
K3DYN_DEFINE_ERROR(EmptyResults);

#undef K3DYN_DEFINE_ERROR

}  // namespace k3dyn
