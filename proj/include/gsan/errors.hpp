#pragma once

#include <stdexcept>
#include <string>

namespace gsan {

// Base for everything the library throws. Each subclass names one failure
// category so callers (and the CLI) can react to it.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define GSAN_DEFINE_ERROR(Name)          \
  class Name : public Error {            \
   public:                               \
    using Error::Error;                  \
  };

GSAN_DEFINE_ERROR(InvalidArgument)
GSAN_DEFINE_ERROR(EditConflict)
GSAN_DEFINE_ERROR(DimensionError)
GSAN_DEFINE_ERROR(ConsistencyError)
GSAN_DEFINE_ERROR(NonFinite)
GSAN_DEFINE_ERROR(EmptySubset)
GSAN_DEFINE_ERROR(OutOfRange)
GSAN_DEFINE_ERROR(EmptyFocus)
GSAN_DEFINE_ERROR(InvalidTemperature)
GSAN_DEFINE_ERROR(SingularCovariance)
GSAN_DEFINE_ERROR(MissingFeatures)
GSAN_DEFINE_ERROR(BundleMismatch)
GSAN_DEFINE_ERROR(InsufficientAdversarialEdges)
GSAN_DEFINE_ERROR(EmptyAttackSet)

#undef GSAN_DEFINE_ERROR

// Malformed input file; carries the offending file and (1-based) line.
class FormatError : public Error {
 public:
  FormatError(const std::string& file, std::size_t line, const std::string& what)
      : Error(file + ":" + std::to_string(line) + ": " + what), file_(file), line_(line) {}

  const std::string& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

// Invalid experiment spec; `path` is the JSON pointer of the bad field.
class SpecError : public Error {
 public:
  SpecError(const std::string& path, const std::string& what)
      : Error(path + ": " + what), path_(path) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace gsan
