#pragma once

// Aesthetic scorer sources. Inference runs elsewhere; these are the client
// side of the sidecar file and the HTTP contract
//   POST {"id": ..., "uri": ...}  ->  {"aesthetic": s}

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <future>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <thread>
#include <string>
#include <string_view>
#include <unordered_map>

#include "curate/errors.hpp"

namespace curate {

struct RetryPolicy {
  int retries = 2;  // attempts = retries + 1
  std::chrono::milliseconds backoff{50};  // doubled after each failure
};

// Calls `attempt` until it succeeds, retrying only RetryableError.
// The last RetryableError is rethrown once attempts run out.
template <class Fn>
auto with_retries(const RetryPolicy& policy, Fn&& attempt) -> decltype(attempt()) {
  auto delay = policy.backoff;
  for (int i = 0;; ++i) {
    try {
      return attempt();
    } catch (const RetryableError&) {
      if (i >= policy.retries) throw;
      std::this_thread::sleep_for(delay);
      delay *= 2;
    }
  }
}

class AestheticSource {
 public:
  virtual ~AestheticSource() = default;
  // Throws RetryableError, ProtocolError, or DataError for unknown ids.
  virtual double fetch(const std::string& id, const std::string& uri) = 0;
};

// Lines of {"id": ..., "aesthetic": s}.
class SidecarAestheticSource final : public AestheticSource {
 public:
  explicit SidecarAestheticSource(std::istream& in);
  explicit SidecarAestheticSource(const std::filesystem::path& path);

  double fetch(const std::string& id, const std::string& uri) override;
  bool contains(const std::string& id) const { return scores_.contains(id); }
  std::size_t size() const noexcept { return scores_.size(); }

 private:
  static std::unordered_map<std::string, double> parse(std::istream& in);
  std::unordered_map<std::string, double> scores_;
};

class ConstantAestheticSource final : public AestheticSource {
 public:
  explicit ConstantAestheticSource(double value) : value_(value) {}
  double fetch(const std::string&, const std::string&) override { return value_; }

 private:
  double value_;
};

struct HttpClientOptions {
  std::chrono::milliseconds timeout{5000};
  RetryPolicy retry;
  std::size_t max_in_flight = 8;
};

// endpoint like "http://host:port/path".
class HttpAestheticClient final : public AestheticSource {
 public:
  explicit HttpAestheticClient(std::string endpoint, HttpClientOptions options = {});
  ~HttpAestheticClient() override;

  double fetch(const std::string& id, const std::string& uri) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Thread-safe memo keyed by record id. Concurrent fetches of one id share a
// single upstream call. Failures are not cached.
class CachedAestheticSource final : public AestheticSource {
 public:
  explicit CachedAestheticSource(std::shared_ptr<AestheticSource> upstream);

  double fetch(const std::string& id, const std::string& uri) override;
  std::size_t upstream_calls() const;

 private:
  std::shared_ptr<AestheticSource> upstream_;
  mutable std::mutex mutex_;
  std::unordered_map<std::string, std::shared_future<double>> entries_;
  std::size_t upstream_calls_ = 0;
};

// Parses "http://host:port/path" into its pieces. Throws ConfigError.
struct Endpoint {
  std::string scheme_host_port;  // "http://host:port"
  std::string path;              // "/path", defaults to "/"
};
Endpoint parse_endpoint(std::string_view url);

}  // namespace curate
