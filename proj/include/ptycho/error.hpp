#ifndef PTYCHO_ERROR_HPP
#define PTYCHO_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ptycho
{

/// Base class for every error raised by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// A precondition on shapes, sizes or parameters was violated.
class InvalidArgument : public Error
{
public:
  using Error::Error;
};

/// Input contained NaN or Inf.
class NonFiniteError : public Error
{
public:
  using Error::Error;
};

/// A patch footprint does not fit inside its field.
class OutOfBounds : public Error
{
public:
  OutOfBounds(const std::string& what, std::ptrdiff_t scanIndex = -1)
    : Error(what), mScanIndex(scanIndex)
  {}

  /// Offending scan position, or -1 when not tied to a scan.
  std::ptrdiff_t scanIndex() const { return mScanIndex; }

private:
  std::ptrdiff_t mScanIndex;
};

/// Numerical degeneracy, e.g. a zero-intensity pattern in a ratio.
class DegenerateData : public Error
{
public:
  using Error::Error;
};

// I/O errors
class IoError : public Error
{
public:
  using Error::Error;
};

class MissingFile : public IoError
{
public:
  using IoError::IoError;
};

class SizeMismatch : public IoError
{
public:
  SizeMismatch(const std::string& what, std::size_t expected, std::size_t actual)
    : IoError(what + " (expected " + std::to_string(expected) + " bytes, got " +
              std::to_string(actual) + ")"),
      mExpected(expected), mActual(actual)
  {}

  std::size_t expected() const { return mExpected; }
  std::size_t actual() const { return mActual; }

private:
  std::size_t mExpected, mActual;
};

class VersionMismatch : public IoError
{
public:
  using IoError::IoError;
};

class FormatError : public IoError
{
public:
  using IoError::IoError;
};

class KindMismatch : public IoError
{
public:
  using IoError::IoError;
};

} // namespace ptycho

#endif
