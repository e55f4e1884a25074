#pragma once

#include <stdexcept>
#include <string>

namespace phogsvm {

/// Base of every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Faults in caller-supplied data or arguments. The CLI maps these to exit 1.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Environment faults (unreadable or unwritable files). The CLI maps these to exit 2.
class RuntimeFault : public Error {
 public:
  using Error::Error;
};

#define PHOGSVM_DEFINE_ERROR(Name, Base) \
  class Name : public Base {             \
   public:                               \
    using Base::Base;                    \
  };

PHOGSVM_DEFINE_ERROR(InvalidArgument, ValidationError)
PHOGSVM_DEFINE_ERROR(FormatError, ValidationError)
PHOGSVM_DEFINE_ERROR(KernelTooLarge, ValidationError)
PHOGSVM_DEFINE_ERROR(DimensionMismatch, ValidationError)
PHOGSVM_DEFINE_ERROR(ImageTooSmall, ValidationError)
PHOGSVM_DEFINE_ERROR(SingleClassError, ValidationError)
PHOGSVM_DEFINE_ERROR(NonFiniteFeature, ValidationError)
PHOGSVM_DEFINE_ERROR(SchemaError, ValidationError)
PHOGSVM_DEFINE_ERROR(ManifestError, ValidationError)
PHOGSVM_DEFINE_ERROR(ClassTooSmall, ValidationError)
PHOGSVM_DEFINE_ERROR(LengthMismatch, ValidationError)
PHOGSVM_DEFINE_ERROR(EmptyInput, ValidationError)
PHOGSVM_DEFINE_ERROR(IoError, RuntimeFault)

#undef PHOGSVM_DEFINE_ERROR

}  // namespace phogsvm
