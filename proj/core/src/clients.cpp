#include "curate/clients.hpp"

#include <fstream>
#include <istream>
#include <limits>
#include <semaphore>

#include "httplib.h"
#include "json.hpp"

namespace curate {

using nlohmann::json;

Endpoint parse_endpoint(std::string_view url) {
  constexpr std::string_view kScheme = "http://";
  if (url.substr(0, kScheme.size()) != kScheme) {
    throw ConfigError("endpoint '" + std::string(url) + "' must start with http://");
  }
  const std::size_t slash = url.find('/', kScheme.size());
  Endpoint ep;
  ep.scheme_host_port = std::string(url.substr(0, slash));
  ep.path = slash == std::string_view::npos ? "/" : std::string(url.substr(slash));
  if (ep.scheme_host_port.size() == kScheme.size()) throw ConfigError("endpoint '" + std::string(url) + "' has no host");
  return ep;
}

SidecarAestheticSource::SidecarAestheticSource(std::istream& in) : scores_(parse(in)) {}

std::unordered_map<std::string, double> SidecarAestheticSource::parse(std::istream& in) {
  std::unordered_map<std::string, double> scores;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      const auto id = j.at("id").get<std::string>();
      const json& v = j.at("aesthetic");
      if (!v.is_number()) throw DataError("aesthetic must be a number");
      if (!scores.emplace(id, v.get<double>()).second) throw DataError("duplicate id '" + id + "'");
    } catch (const json::exception& e) {
      throw DataError("aesthetic sidecar line " + std::to_string(n) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError("aesthetic sidecar line " + std::to_string(n) + ": " + e.what());
    }
  }
  return scores;
}

SidecarAestheticSource::SidecarAestheticSource(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  scores_ = parse(in);
}

double SidecarAestheticSource::fetch(const std::string& id, const std::string&) {
  auto it = scores_.find(id);
  if (it == scores_.end()) throw DataError("no aesthetic score for id '" + id + "'");
  return it->second;
}

struct HttpAestheticClient::Impl {
  Endpoint endpoint;
  HttpClientOptions options;
  std::counting_semaphore<std::numeric_limits<std::int32_t>::max()> slots;

  Impl(Endpoint ep, HttpClientOptions opts)
      : endpoint(std::move(ep)), options(opts), slots(static_cast<std::ptrdiff_t>(std::max<std::size_t>(1, opts.max_in_flight))) {}

  double once(const std::string& id, const std::string& uri) {
    httplib::Client client(endpoint.scheme_host_port);
    const auto t = options.timeout;
    client.set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(t).count(),
                                  static_cast<time_t>((t.count() % 1000) * 1000));
    client.set_read_timeout(std::chrono::duration_cast<std::chrono::seconds>(t).count(),
                            static_cast<time_t>((t.count() % 1000) * 1000));
    const std::string body = json{{"id", id}, {"uri", uri}}.dump();
    auto res = client.Post(endpoint.path, body, "application/json");
    if (!res) {
      throw RetryableError("aesthetic scorer " + endpoint.scheme_host_port + " unreachable: " +
                           httplib::to_string(res.error()));
    }
    if (res->status >= 500 || res->status == 429) {
      throw RetryableError("aesthetic scorer returned HTTP " + std::to_string(res->status));
    }
    if (res->status != 200) throw ProtocolError("aesthetic scorer returned HTTP " + std::to_string(res->status));
    try {
      const json j = json::parse(res->body);
      const json& v = j.at("aesthetic");
      if (!v.is_number()) throw ProtocolError("aesthetic scorer: 'aesthetic' is not a number");
      return v.get<double>();
    } catch (const json::exception& e) {
      throw ProtocolError(std::string("aesthetic scorer: malformed response: ") + e.what());
    }
  }
};

HttpAestheticClient::HttpAestheticClient(std::string endpoint, HttpClientOptions options)
    : impl_(std::make_unique<Impl>(parse_endpoint(endpoint), options)) {}

HttpAestheticClient::~HttpAestheticClient() = default;

double HttpAestheticClient::fetch(const std::string& id, const std::string& uri) {
  return with_retries(impl_->options.retry, [&] {
    impl_->slots.acquire();
    struct Release {
      Impl* impl;
      ~Release() { impl->slots.release(); }
    } release{impl_.get()};
    return impl_->once(id, uri);
  });
}

CachedAestheticSource::CachedAestheticSource(std::shared_ptr<AestheticSource> upstream)
    : upstream_(std::move(upstream)) {}

double CachedAestheticSource::fetch(const std::string& id, const std::string& uri) {
  std::promise<double> promise;
  std::shared_future<double> result;
  bool owner = false;
  {
    std::lock_guard lock(mutex_);
    auto it = entries_.find(id);
    if (it != entries_.end()) {
      result = it->second;
    } else {
      result = promise.get_future().share();
      entries_.emplace(id, result);
      ++upstream_calls_;
      owner = true;
    }
  }
  if (owner) {
    try {
      promise.set_value(upstream_->fetch(id, uri));
    } catch (...) {
      promise.set_exception(std::current_exception());
      std::lock_guard lock(mutex_);
      entries_.erase(id);
    }
  }
  return result.get();
}

std::size_t CachedAestheticSource::upstream_calls() const {
  std::lock_guard lock(mutex_);
  return upstream_calls_;
}

}  // namespace curate
