#pragma once

#include <stdexcept>
#include <string>

namespace odecert {

/// A verification step found the certified condition violated (or the data
/// needed to build a certificate contradicts it).
class CertificateFailure : public std::runtime_error {
 public:
  explicit CertificateFailure(const std::string& msg) : std::runtime_error(msg) {}
};

/// A stochastic iterate or an integrated flow left the parameter domain.
class DomainExit : public std::runtime_error {
 public:
  DomainExit(const std::string& msg, long iteration)
      : std::runtime_error(msg), iteration(iteration) {}
  long iteration;
};

/// Bad experiment configuration (unknown key, missing field, bad value).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace odecert
