#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace deepkrein {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad shapes, malformed configs and violated preconditions. The CLI maps
// these to exit code 2.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Radius violations, non-finite values, near-singular systems and divergence.
// The CLI maps these to exit code 3.
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what, std::optional<int> layer = std::nullopt)
      : Error(layer ? what + " (layer " + std::to_string(*layer) + ")" : what), layer_(layer) {}

  // Keeps `what` verbatim and only attaches the layer.
  static DomainError preformatted(const std::string& what, std::optional<int> layer) {
    DomainError e(what);
    e.layer_ = layer;
    return e;
  }

  std::optional<int> layer() const { return layer_; }

 private:
  std::optional<int> layer_;
};

}  // namespace deepkrein
