#include <gtest/gtest.h>

#include <algorithm>
#include <atomic>
#include <sstream>
#include <thread>

#include "curate/errors.hpp"
#include "curate/vqa.hpp"
#include "httplib.h"
#include "json.hpp"

using namespace curate;

namespace {

std::vector<VqaPair> pairs(std::size_t n) {
  std::vector<VqaPair> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back({"p" + std::to_string(i), "u", "caption " + std::to_string(i)});
  return out;
}

// Returns a fixed probability per pair id.
class TableClient : public VqaClient {
 public:
  explicit TableClient(std::map<std::string, double> table) : table_(std::move(table)) {}
  double p_yes(const VqaRequest& r) override {
    ++calls;
    auto it = table_.find(r.id);
    if (it == table_.end()) throw RetryableError("no answer for " + r.id);
    return it->second;
  }
  std::atomic<int> calls{0};

 private:
  std::map<std::string, double> table_;
};

ScoreOptions quick() {
  ScoreOptions o;
  o.retry.backoff = std::chrono::milliseconds(0);
  return o;
}

}  // namespace

TEST(BuildQuery, Template) {
  EXPECT_EQ(build_query("a red ball"), "Is the figure showing: a red ball?");
  EXPECT_EQ(build_query("A cat."), "Is the figure showing: A cat.?");
  EXPECT_THROW(build_query(""), DomainError);
  EXPECT_THROW(build_query("   "), DomainError);
}

TEST(ScorePairs, ConstantStub) {
  ConstantVqaClient client(0.75);
  const auto rep = score_pairs(client, pairs(10), quick());
  EXPECT_EQ(rep.mean, 0.75);
  EXPECT_EQ(rep.rows.size(), 10u);
  EXPECT_EQ(rep.gaps, 0u);
}

TEST(ScorePairs, HandMean) {
  TableClient client({{"p0", 0.8}, {"p1", 0.6}});
  EXPECT_DOUBLE_EQ(score_pairs(client, pairs(2), quick()).mean, 0.7);
}

TEST(ScorePairs, EmptyAndOutOfRange) {
  ConstantVqaClient client(0.5);
  EXPECT_THROW(score_pairs(client, {}, quick()), DomainError);
  ConstantVqaClient bad(1.2);
  EXPECT_THROW(score_pairs(bad, pairs(3), quick()), ProtocolError);
}

TEST(ScorePairs, GapsNeedTheFlag) {
  TableClient client({{"p0", 0.9}, {"p2", 0.5}});
  try {
    score_pairs(client, pairs(3), quick());
    FAIL();
  } catch (const IncompleteReportError& e) {
    EXPECT_EQ(e.report().gaps, 1u);
    EXPECT_FALSE(e.report().rows[1].p_yes);
  }
  EXPECT_EQ(client.calls, 2 + 3);  // p1 tried 1 + 2 retries
  auto opts = quick();
  opts.exclude_gaps = true;
  const auto rep = score_pairs(client, pairs(3), opts);
  EXPECT_EQ(rep.gaps, 1u);
  EXPECT_DOUBLE_EQ(rep.mean, 0.7);
}

TEST(ScorePairs, AllFailedIsAnError) {
  TableClient client({});
  auto opts = quick();
  opts.exclude_gaps = true;
  EXPECT_THROW(score_pairs(client, pairs(4), opts), ClientError);
}

TEST(ScorePairs, MeanPermutationInvariantAndConcurrencyFree) {
  std::map<std::string, double> table;
  auto ps = pairs(200);
  for (std::size_t i = 0; i < ps.size(); ++i) table[ps[i].id] = static_cast<double>((i * 37) % 101) / 100.0;
  TableClient client(table);
  auto opts = quick();
  opts.concurrency = 1;
  const double serial = score_pairs(client, ps, opts).mean;
  std::reverse(ps.begin(), ps.end());
  opts.concurrency = 8;
  const auto rep = score_pairs(client, ps, opts);
  EXPECT_EQ(rep.mean, serial);
  EXPECT_EQ(rep.rows.front().pair.id, "p199");
}

TEST(RankReports, DescendingWithStableTies) {
  ConstantVqaClient a(0.83), b(0.80);
  const auto ra = score_pairs(a, pairs(5), quick());
  const auto rb = score_pairs(b, pairs(5), quick());
  std::vector<AlignmentReport> reports{rb, ra, rb};
  EXPECT_EQ(rank_reports(reports), (std::vector<std::size_t>{1, 0, 2}));
}

TEST(MakeClient, Specs) {
  EXPECT_EQ(make_vqa_client("stub:0.25")->p_yes({}), 0.25);
  EXPECT_THROW(make_vqa_client("stub:x"), ConfigError);
  EXPECT_THROW(make_vqa_client("stub:2"), ConfigError);
  EXPECT_THROW(make_vqa_client("nonsense"), ConfigError);
}

TEST(ReadPairs, CaptionOrManifest) {
  std::istringstream in(
      "{\"id\":\"a\",\"uri\":\"u\",\"caption\":\"x\"}\n{\"id\":\"b\",\"uri\":\"v\",\"caption_raw\":\"y\"}\n");
  const auto ps = read_pairs(in);
  ASSERT_EQ(ps.size(), 2u);
  EXPECT_EQ(ps[1].caption, "y");
}

TEST(HttpVqa, WireContract) {
  httplib::Server server;
  std::string question;
  server.Post("/vqa", [&](const httplib::Request& req, httplib::Response& res) {
    const auto j = nlohmann::json::parse(req.body);
    question = j.at("question").get<std::string>();
    res.set_content(nlohmann::json{{"p_yes", 0.6}}.dump(), "application/json");
  });
  server.Post("/bad", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"answer": "yes"})", "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  const std::string base = "http://127.0.0.1:" + std::to_string(port);
  {
    HttpVqaClient client(base + "/vqa", std::chrono::seconds(2));
    EXPECT_EQ(client.p_yes({"a", "u", "Is the figure showing: x?"}), 0.6);
    EXPECT_EQ(question, "Is the figure showing: x?");
    HttpVqaClient bad(base + "/bad", std::chrono::seconds(2));
    EXPECT_THROW(bad.p_yes({"a", "u", "q"}), ProtocolError);
  }
  server.stop();
  t.join();
}

TEST(AlignmentReport, JsonHasRowsAndMean) {
  ConstantVqaClient c(0.5);
  auto opts = quick();
  opts.model = "m1";
  const auto j = nlohmann::json::parse(score_pairs(c, pairs(2), opts).to_json());
  EXPECT_EQ(j.at("model"), "m1");
  EXPECT_EQ(j.at("mean"), 0.5);
  EXPECT_EQ(j.at("rows").size(), 2u);
}
