#pragma once

#include <stdexcept>
#include <string>

namespace stimem {

// Invalid physical parameters or violated preconditions of a constructor.
class ModelError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Anything that goes wrong inside a numerical routine: integrator drift,
// truncated spectral windows, degenerate normalizations.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// The mode window does not capture the wave packet.
class ConsistencyError : public NumericalError {
public:
  ConsistencyError(const std::string& what, double captured_mass)
      : NumericalError(what), captured_mass_(captured_mass) {}
  double captured_mass() const noexcept { return captured_mass_; }

private:
  double captured_mass_;
};

class IntegratorError : public NumericalError {
public:
  IntegratorError(const std::string& what, double suggested_dt)
      : NumericalError(what), suggested_dt_(suggested_dt) {}
  double suggested_dt() const noexcept { return suggested_dt_; }

private:
  double suggested_dt_;
};

// Scenario configuration problems; `key` is the dotted key path.
class ConfigError : public std::runtime_error {
public:
  ConfigError(const std::string& key, const std::string& message)
      : std::runtime_error(key.empty() ? message : key + ": " + message), key_(key) {}
  const std::string& key() const noexcept { return key_; }

private:
  std::string key_;
};

}  // namespace stimem
