#pragma once

#include <stdexcept>
#include <string>

namespace scanstat {

/// Invalid distribution or transform parameter.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Field, window or lattice sizes that do not fit together.
class GeometryError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Lattice index outside its admissible range.
class IndexError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Argument outside the domain of a numerical routine (e.g. alpha > 0.1).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A denominator of the extreme-value constants is not strictly positive.
class ValidityError : public std::domain_error {
 public:
  ValidityError(const std::string& expression, const std::string& what)
      : std::domain_error(what), expression_(expression) {}

  const std::string& expression() const noexcept { return expression_; }

 private:
  std::string expression_;
};

/// The hypothesis q1 >= 1 - alpha of the extreme-value bound does not hold.
class HypothesisError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Probabilities that violate the ordering implied by nested events.
class OrderingError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Two tables that should share thresholds do not.
class AlignmentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed table text.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Run configuration rejected during validation; carries the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace scanstat
