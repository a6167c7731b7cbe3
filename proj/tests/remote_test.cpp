#include <gtest/gtest.h>

#include <atomic>
#include <thread>

#include "fixtures.hpp"
#include "httplib.h"
#include "json.hpp"
#include "lexfuse/embedding.hpp"
#include "lexfuse/keywords.hpp"
#include "lexfuse/pipeline.hpp"

namespace lexfuse {
namespace {

using fixtures::expect_error;
using nlohmann::json;

// Loopback stand-in for the three model services. The embedding route
// answers with the reference embedder so results can be compared exactly.
class FakeServices : public ::testing::Test {
 protected:
  void SetUp() override {
    server_.Post("/embed", [this](const httplib::Request& req, httplib::Response& res) {
      ++embed_requests_;
      const auto body = json::parse(req.body);
      json vectors = json::array();
      for (const auto& t : body["texts"]) {
        const auto v = reference_.embed_text(t.get<std::string>());
        vectors.push_back(std::vector<double>(v.values().begin(), v.values().end()));
      }
      res.set_content(json{{"vectors", vectors}, {"dim", reported_dim_}}.dump(), "application/json");
    });
    server_.Post("/keywords", [](const httplib::Request& req, httplib::Response& res) {
      const auto body = json::parse(req.body);
      const std::string q = body["query"];
      json kws = q == "nothing" ? json::array() : json::array({"debt", " ", "debt", "statute", "court"});
      res.set_content(json{{"keywords", kws}}.dump(), "application/json");
    });
    server_.Post("/llm", [](const httplib::Request& req, httplib::Response& res) {
      const auto body = json::parse(req.body);
      res.set_content(json{{"text", "echo " + std::to_string(body["prompt"].get<std::string>().size())}}.dump(),
                      "application/json");
    });
    server_.Post("/broken", [](const httplib::Request&, httplib::Response& res) {
      res.status = 500;
      res.set_content("oops", "text/plain");
    });
    server_.Post("/garbage", [](const httplib::Request&, httplib::Response& res) {
      res.set_content("{not json", "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    ASSERT_GT(port_, 0);
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  void TearDown() override {
    server_.stop();
    thread_.join();
  }

  std::string url(const std::string& path) const { return "http://127.0.0.1:" + std::to_string(port_) + path; }

  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  ReferenceEmbedder reference_{16, 5};
  std::size_t reported_dim_ = 16;
  std::atomic<int> embed_requests_{0};
};

TEST_F(FakeServices, RemoteEmbedderMatchesReference) {
  RemoteEmbedder e(url("/embed"), 16, 5);
  EXPECT_EQ(e.embed_text("tenant deposit"), reference_.embed_text("tenant deposit"));
  std::vector<std::string> texts;
  for (int i = 0; i < 300; ++i) texts.push_back("text " + std::to_string(i));
  embed_requests_ = 0;
  const auto out = e.embed_batch(texts);
  EXPECT_EQ(embed_requests_.load(), 2);  // split at kMaxBatch
  ASSERT_EQ(out.size(), texts.size());
  EXPECT_EQ(out[299], reference_.embed_text("text 299"));
}

TEST_F(FakeServices, RemoteEmbedderDimMismatchIsProtocolError) {
  RemoteEmbedder wrong_dim(url("/embed"), 8, 5);
  expect_error([&] { wrong_dim.embed_text("x"); }, ErrorKind::kProtocol, "dim");
  reported_dim_ = 8;
  RemoteEmbedder lying(url("/embed"), 8, 5);
  expect_error([&] { lying.embed_text("x"); }, ErrorKind::kProtocol, "wrong dim");
}

TEST_F(FakeServices, HttpFailuresAreClassified) {
  RemoteEmbedder broken(url("/broken"), 16, 5);
  expect_error([&] { broken.embed_text("x"); }, ErrorKind::kProtocol, "HTTP 500");
  RemoteEmbedder garbage(url("/garbage"), 16, 5);
  expect_error([&] { garbage.embed_text("x"); }, ErrorKind::kProtocol, "invalid JSON");
  expect_error([&] { broken.embed_text(" "); }, ErrorKind::kInvalidInput, "empty");
}

TEST_F(FakeServices, RemoteExtractorCleansReply) {
  ExtractorConfig c;
  c.kind = ExtractorKind::kRemote;
  c.endpoint = url("/keywords");
  c.max_keywords = 2;
  RemoteExtractor x(c);
  const auto ks = x.extract("what about debt");
  EXPECT_EQ(ks.keywords, (std::vector<std::string>{"debt", "statute"}));
  EXPECT_FALSE(ks.fell_back_to_query);
  const auto fallback = x.extract("nothing");
  EXPECT_EQ(fallback.keywords, std::vector<std::string>{"nothing"});
  EXPECT_TRUE(fallback.fell_back_to_query);
}

TEST_F(FakeServices, RemoteBackendReturnsText) {
  pipeline::RemoteBackend llm(url("/llm"), 5);
  EXPECT_EQ(llm.complete("abc"), "echo 3");
  pipeline::RemoteBackend garbage(url("/garbage"), 5);
  expect_error([&] { garbage.complete("abc"); }, ErrorKind::kProtocol, "invalid JSON");
}

TEST(Remote, UnreachableServerIsRetryable) {
  // Port 9 on loopback is closed in the test sandbox.
  RemoteEmbedder e("http://127.0.0.1:9/embed", 4, 1);
  expect_error([&] { e.embed_text("x"); }, ErrorKind::kRetryable, "failed");
}

TEST(Remote, EndpointMustBeHttp) {
  expect_error([] { RemoteEmbedder("https://example.com/embed", 4, 1); }, ErrorKind::kConfig, "http://");
  expect_error([] { pipeline::RemoteBackend("http://", 1); }, ErrorKind::kConfig, "no host");
}

}  // namespace
}  // namespace lexfuse
