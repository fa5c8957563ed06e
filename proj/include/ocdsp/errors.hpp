#ifndef OCDSP_ERRORS_HPP
#define OCDSP_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <utility>

namespace ocdsp {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "error"; }
};

/// Inputs with incompatible lengths or sizes.
class ShapeError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "shape"; }
};

/// Inputs outside the mathematical domain of an operation (zero power, ...).
class DomainError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "domain"; }
};

/// Invalid parameters. Carries the config location when known.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(what) {}
  ConfigError(std::string section, std::string key, const std::string& what)
      : Error(section + "." + key + ": " + what),
        section_(std::move(section)),
        key_(std::move(key)) {}

  const char* kind() const noexcept override { return "config"; }
  const std::string& section() const noexcept { return section_; }
  const std::string& key() const noexcept { return key_; }

 private:
  std::string section_;
  std::string key_;
};

class UsageError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "usage"; }
};

}  // namespace ocdsp

#endif  // OCDSP_ERRORS_HPP
