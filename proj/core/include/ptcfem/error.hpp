#ifndef PTCFEM_ERROR_HPP
#define PTCFEM_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ptcfem {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed mesh input or a refinement that cannot be closed.
class MeshError : public Error {
public:
  using Error::Error;
};

/// Sizes of operands do not agree.
class DimensionError : public Error {
public:
  using Error::Error;
};

/// The direct solver met a zero (or negligible) pivot.
class SingularMatrixError : public Error {
public:
  SingularMatrixError(const std::string& what, std::ptrdiff_t pivot)
      : Error(what), pivot_(pivot) {}

  /// Elimination step at which the pivot vanished, -1 if unknown.
  std::ptrdiff_t pivot() const noexcept { return pivot_; }

private:
  std::ptrdiff_t pivot_;
};

/// A coefficient evaluated to a non-finite value during assembly.
class InvalidStateError : public Error {
public:
  InvalidStateError(const std::string& what, std::ptrdiff_t element)
      : Error(what), element_(element) {}

  std::ptrdiff_t element() const noexcept { return element_; }

private:
  std::ptrdiff_t element_;
};

/// The requested quantity needs data the problem does not provide.
class UnsupportedOperationError : public Error {
public:
  using Error::Error;
};

/// Invalid run configuration. `field()` names the offending key.
class ConfigError : public Error {
public:
  ConfigError(const std::string& field, const std::string& what)
      : Error(field + ": " + what), field_(field) {}

  const std::string& field() const noexcept { return field_; }

private:
  std::string field_;
};

} // namespace ptcfem

#endif // PTCFEM_ERROR_HPP
