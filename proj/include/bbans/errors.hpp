#pragma once

#include <stdexcept>
#include <string>

namespace bbans {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define BBANS_DEFINE_ERROR(Name)      \
  class Name : public Error {         \
   public:                            \
    using Error::Error;               \
  };

// ANS coder
BBANS_DEFINE_ERROR(ZeroFrequencySymbol)
BBANS_DEFINE_ERROR(StateUnderflow)
BBANS_DEFINE_ERROR(MalformedPayload)
BBANS_DEFINE_ERROR(InvalidDistribution)

// Codecs and latent grid
BBANS_DEFINE_ERROR(NumericalRange)
BBANS_DEFINE_ERROR(IndexOutOfRange)

// Model files
BBANS_DEFINE_ERROR(ShapeMismatch)
BBANS_DEFINE_ERROR(UnknownLikelihoodFamily)
BBANS_DEFINE_ERROR(CorruptManifest)

// Chain and container
BBANS_DEFINE_ERROR(DomainError)
BBANS_DEFINE_ERROR(HashMismatch)

// Dataset ingestion
BBANS_DEFINE_ERROR(BadMagic)
BBANS_DEFINE_ERROR(DimensionMismatch)

#undef BBANS_DEFINE_ERROR

}  // namespace bbans
