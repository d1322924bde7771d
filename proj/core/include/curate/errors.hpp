#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace curate {

// Precondition violated by an argument (zero dimension, empty pixel set, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Invalid configuration; maps to CLI exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input data (malformed manifest line, duplicate ids, budget overrun); exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// External scorer / VQA backend failure; exit code 3.
class ClientError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Timeouts, refused connections, 5xx. Worth another attempt.
class RetryableError : public ClientError {
 public:
  using ClientError::ClientError;
};

// The backend answered, but not with something we can use.
class ProtocolError : public ClientError {
 public:
  using ClientError::ClientError;
};

class DuplicateIdError : public DataError {
 public:
  explicit DuplicateIdError(std::vector<std::string> ids);
  const std::vector<std::string>& ids() const noexcept { return ids_; }

 private:
  std::vector<std::string> ids_;
};

}  // namespace curate
