#pragma once

// Text-image alignment via yes/no visual question answering.
//
// Each (image, caption) pair becomes "Is the figure showing: <caption>?";
// a pluggable backend returns P("yes"), and the report is the mean over
// the test set. Wire contract for HTTP backends:
//   POST {"id": ..., "uri": ..., "question": ...}  ->  {"p_yes": p}

#include <chrono>
#include <cstddef>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "curate/clients.hpp"

namespace curate {

// Throws DomainError when the caption is blank.
std::string build_query(std::string_view caption);

struct VqaRequest {
  std::string id;
  std::string uri;
  std::string question;
};

class VqaClient {
 public:
  virtual ~VqaClient() = default;
  // Probability of the answer "yes". Throws RetryableError or ProtocolError.
  virtual double p_yes(const VqaRequest& request) = 0;
};

class ConstantVqaClient final : public VqaClient {
 public:
  explicit ConstantVqaClient(double p) : p_(p) {}
  double p_yes(const VqaRequest&) override { return p_; }

 private:
  double p_;
};

class HttpVqaClient final : public VqaClient {
 public:
  explicit HttpVqaClient(std::string endpoint, std::chrono::milliseconds timeout = std::chrono::seconds(30));
  ~HttpVqaClient() override;

  double p_yes(const VqaRequest& request) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// "stub:<p>" or an http(s) URL. Throws ConfigError.
std::unique_ptr<VqaClient> make_vqa_client(std::string_view spec);

struct VqaPair {
  std::string id;
  std::string uri;
  std::string caption;
};

// Lines of {"id", "uri", "caption"}; manifest records (caption_raw) also work.
std::vector<VqaPair> read_pairs(std::istream& in);

struct PairScore {
  VqaPair pair;
  std::optional<double> p_yes;  // nullopt marks a gap
  std::string error;            // why the gap happened
};

struct AlignmentReport {
  std::string model;
  std::vector<PairScore> rows;  // order-aligned with the input pairs
  double mean = 0.0;
  std::size_t gaps = 0;

  std::vector<double> probabilities() const;
  std::string to_json() const;
};

struct ScoreOptions {
  std::string model = "model";
  RetryPolicy retry;
  std::size_t concurrency = 4;
  bool exclude_gaps = false;  // otherwise any gap is an error
};

// Thrown when gaps remain and exclude_gaps is off. Carries the partial report.
class IncompleteReportError : public ClientError {
 public:
  explicit IncompleteReportError(AlignmentReport report);
  const AlignmentReport& report() const noexcept { return report_; }

 private:
  AlignmentReport report_;
};

// Probabilities outside [0, 1] are ProtocolErrors (thrown, never clamped).
// Empty input is a DomainError; all pairs failing is a ClientError.
AlignmentReport score_pairs(VqaClient& client, std::span<const VqaPair> pairs, const ScoreOptions& options = {});

// Report indices ordered by descending mean; ties keep input order.
std::vector<std::size_t> rank_reports(std::span<const AlignmentReport> reports);

}  // namespace curate
