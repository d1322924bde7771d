#include "curate/vqa.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <istream>
#include <mutex>
#include <numeric>
#include <thread>

#include "curate/exact_sum.hpp"
#include "httplib.h"
#include "json.hpp"

namespace curate {

using nlohmann::json;

std::string build_query(std::string_view caption) {
  const bool blank = std::all_of(caption.begin(), caption.end(),
                                 [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; });
  if (blank) throw DomainError("VQA query needs a non-empty caption");
  std::string q = "Is the figure showing: ";
  q.append(caption);
  q.push_back('?');
  return q;
}

struct HttpVqaClient::Impl {
  Endpoint endpoint;
  std::chrono::milliseconds timeout;
};

HttpVqaClient::HttpVqaClient(std::string endpoint, std::chrono::milliseconds timeout)
    : impl_(std::make_unique<Impl>(Impl{parse_endpoint(endpoint), timeout})) {}

HttpVqaClient::~HttpVqaClient() = default;

double HttpVqaClient::p_yes(const VqaRequest& request) {
  httplib::Client client(impl_->endpoint.scheme_host_port);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(impl_->timeout).count();
  const auto usecs = static_cast<time_t>((impl_->timeout.count() % 1000) * 1000);
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  const std::string body = json{{"id", request.id}, {"uri", request.uri}, {"question", request.question}}.dump();
  auto res = client.Post(impl_->endpoint.path, body, "application/json");
  if (!res) {
    throw RetryableError("VQA backend " + impl_->endpoint.scheme_host_port + " unreachable: " +
                         httplib::to_string(res.error()));
  }
  if (res->status >= 500 || res->status == 429) throw RetryableError("VQA backend returned HTTP " + std::to_string(res->status));
  if (res->status != 200) throw ProtocolError("VQA backend returned HTTP " + std::to_string(res->status));
  try {
    const json j = json::parse(res->body);
    const json& p = j.at("p_yes");
    if (!p.is_number()) throw ProtocolError("VQA backend: 'p_yes' is not a number");
    return p.get<double>();
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("VQA backend: malformed response: ") + e.what());
  }
}

std::unique_ptr<VqaClient> make_vqa_client(std::string_view spec) {
  constexpr std::string_view kStub = "stub:";
  if (spec.substr(0, kStub.size()) == kStub) {
    const std::string value(spec.substr(kStub.size()));
    try {
      std::size_t used = 0;
      const double p = std::stod(value, &used);
      if (used != value.size() || !(p >= 0.0 && p <= 1.0)) throw std::invalid_argument(value);
      return std::make_unique<ConstantVqaClient>(p);
    } catch (const std::logic_error&) {
      throw ConfigError("bad stub client '" + std::string(spec) + "'; expected stub:<p> with p in [0, 1]");
    }
  }
  return std::make_unique<HttpVqaClient>(std::string(spec));
}

std::vector<VqaPair> read_pairs(std::istream& in) {
  std::vector<VqaPair> pairs;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      VqaPair p;
      p.id = j.at("id").get<std::string>();
      p.uri = j.value("uri", std::string{});
      if (j.contains("caption")) {
        p.caption = j.at("caption").get<std::string>();
      } else {
        p.caption = j.at("caption_raw").get<std::string>();
      }
      pairs.push_back(std::move(p));
    } catch (const json::exception& e) {
      throw DataError("pairs line " + std::to_string(n) + ": " + e.what());
    }
  }
  return pairs;
}

std::vector<double> AlignmentReport::probabilities() const {
  std::vector<double> out;
  for (const auto& row : rows) {
    if (row.p_yes) out.push_back(*row.p_yes);
  }
  return out;
}

std::string AlignmentReport::to_json() const {
  nlohmann::ordered_json j;
  j["model"] = model;
  j["mean"] = mean;
  j["pairs"] = rows.size();
  j["gaps"] = gaps;
  nlohmann::ordered_json out_rows = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json row;
    row["id"] = r.pair.id;
    row["uri"] = r.pair.uri;
    if (r.p_yes) {
      row["p_yes"] = *r.p_yes;
    } else {
      row["error"] = r.error;
    }
    out_rows.push_back(std::move(row));
  }
  j["rows"] = std::move(out_rows);
  return j.dump(2) + "\n";
}

IncompleteReportError::IncompleteReportError(AlignmentReport report)
    : ClientError(std::to_string(report.gaps) + " of " + std::to_string(report.rows.size()) +
                  " pairs failed after retries; enable gap exclusion to report a mean over the rest"),
      report_(std::move(report)) {}

AlignmentReport score_pairs(VqaClient& client, std::span<const VqaPair> pairs, const ScoreOptions& options) {
  if (pairs.empty()) throw DomainError("score_pairs needs at least one pair");

  std::vector<VqaRequest> requests;
  requests.reserve(pairs.size());
  for (const auto& p : pairs) requests.push_back({p.id, p.uri, build_query(p.caption)});

  AlignmentReport report;
  report.model = options.model;
  report.rows.resize(pairs.size());

  std::atomic<std::size_t> next{0};
  std::mutex fatal_mutex;
  std::size_t fatal_index = pairs.size();
  std::exception_ptr fatal;

  auto work = [&] {
    for (std::size_t i = next++; i < pairs.size(); i = next++) {
      PairScore& row = report.rows[i];
      row.pair = pairs[i];
      try {
        const double p = with_retries(options.retry, [&] { return client.p_yes(requests[i]); });
        if (!(p >= 0.0 && p <= 1.0)) {
          throw ProtocolError("pair '" + pairs[i].id + "': p_yes " + std::to_string(p) + " outside [0, 1]");
        }
        row.p_yes = p;
      } catch (const RetryableError& e) {
        row.error = e.what();
      } catch (...) {
        std::lock_guard lock(fatal_mutex);
        if (i < fatal_index) {
          fatal_index = i;
          fatal = std::current_exception();
        }
      }
    }
  };

  const std::size_t threads = std::clamp<std::size_t>(options.concurrency, 1, pairs.size());
  if (threads == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work);
  }
  if (fatal) std::rethrow_exception(fatal);

  ExactSum sum;
  std::size_t scored = 0;
  for (const auto& row : report.rows) {
    if (row.p_yes) {
      sum.add(*row.p_yes);
      ++scored;
    } else {
      ++report.gaps;
    }
  }
  if (scored == 0) throw ClientError("all " + std::to_string(pairs.size()) + " VQA requests failed");
  report.mean = sum.value() / static_cast<double>(scored);
  if (report.gaps > 0 && !options.exclude_gaps) throw IncompleteReportError(std::move(report));
  return report;
}

std::vector<std::size_t> rank_reports(std::span<const AlignmentReport> reports) {
  std::vector<std::size_t> order(reports.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return reports[a].mean > reports[b].mean; });
  return order;
}

}  // namespace curate
