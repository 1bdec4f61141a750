#pragma once

#include <stdexcept>
#include <string>

namespace stgf {

/// Raised on inconsistent vector, matrix or trajectory sizes.
class DimensionError : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

/// Non-finite plant state or controller failure during a closed-loop run.
class SimulationError : public std::runtime_error
{
public:
  SimulationError(const std::string& what, long step) : std::runtime_error(what), step_(step) {}
  long step() const { return step_; }

private:
  long step_;
};

/// Bad or unknown configuration key. `key()` names the offending entry.
class ConfigError : public std::runtime_error
{
public:
  ConfigError(const std::string& what, std::string key) : std::runtime_error(what), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

private:
  std::string key_;
};

}  // namespace stgf
