#include <gtest/gtest.h>

#include <atomic>
#include <cstdlib>
#include <mutex>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "alrn/error.hpp"
#include "alrn/http_backend.hpp"
#include "test_support.hpp"

namespace {

using alrn::HttpBackend;
using alrn::HttpBackendConfig;

// Local server whose reply is chosen per test.
class LocalServer {
 public:
  LocalServer() {
    server_.Post("/v1/complete", [this](const httplib::Request& req, httplib::Response& res) {
      std::lock_guard lock(mutex_);
      ++requests_;
      last_body_ = req.body;
      last_auth_ = req.get_header_value("Authorization");
      res.status = status_;
      res.set_content(body_, "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~LocalServer() {
    server_.stop();
    thread_.join();
  }

  void reply(int status, std::string body) {
    std::lock_guard lock(mutex_);
    status_ = status;
    body_ = std::move(body);
  }
  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1/complete"; }
  std::string last_body() {
    std::lock_guard lock(mutex_);
    return last_body_;
  }
  std::string last_auth() {
    std::lock_guard lock(mutex_);
    return last_auth_;
  }
  int requests() {
    std::lock_guard lock(mutex_);
    return requests_;
  }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::mutex mutex_;
  int status_ = 200;
  std::string body_ = R"({"text": "positive"})";
  std::string last_body_;
  std::string last_auth_;
  int requests_ = 0;
};

HttpBackendConfig config_for(const LocalServer& s, const char* token_env = "ALRN_TEST_UNSET_TOKEN") {
  HttpBackendConfig c;
  c.endpoint = s.endpoint();
  c.model = "tiny";
  c.token_env = token_env;
  c.timeout_seconds = 5;
  return c;
}

TEST(HttpBackend, PostsPromptAndReturnsText) {
  LocalServer server;
  server.reply(200, R"({"text": "Negative."})");
  HttpBackend backend(config_for(server));
  EXPECT_EQ(backend.label("the course was bad"), "Negative.");
  const auto sent = nlohmann::json::parse(server.last_body());
  EXPECT_EQ(sent["model"], "tiny");
  EXPECT_EQ(sent["prompt"], alrn::label_prompt("the course was bad"));
  EXPECT_EQ(server.last_auth(), "");
}

TEST(HttpBackend, SendsBearerTokenFromEnvironment) {
  LocalServer server;
  ::setenv("ALRN_TEST_TOKEN", "s3cret", 1);
  HttpBackend backend(config_for(server, "ALRN_TEST_TOKEN"));
  backend.generate(alrn::SentimentLabel::positive, 2);
  ::unsetenv("ALRN_TEST_TOKEN");
  EXPECT_EQ(server.last_auth(), "Bearer s3cret");
  EXPECT_EQ(nlohmann::json::parse(server.last_body())["prompt"],
            alrn::generate_prompt(alrn::SentimentLabel::positive, 2));
}

TEST(HttpBackend, CredentialRejectionIsFatal) {
  LocalServer server;
  for (int status : {401, 403}) {
    server.reply(status, "{}");
    HttpBackend backend(config_for(server));
    EXPECT_THROW(backend.label("x"), alrn::BackendFatalError) << status;
  }
}

TEST(HttpBackend, ServerErrorsAndBadBodiesAreRetryable) {
  LocalServer server;
  HttpBackend backend(config_for(server));
  for (auto [status, body] : std::vector<std::pair<int, std::string>>{
           {500, R"({"text": "positive"})"}, {200, "not json"}, {200, R"({"answer": "positive"})"}, {200, "[1]"}}) {
    server.reply(status, body);
    try {
      backend.label("x");
      ADD_FAILURE() << body;
    } catch (const alrn::BackendFatalError&) {
      ADD_FAILURE() << "fatal for " << status << " " << body;
    } catch (const alrn::BackendError&) {
    }
  }
}

TEST(HttpBackend, UnreachableEndpointIsRetryable) {
  LocalServer server;
  HttpBackendConfig c = config_for(server);
  c.endpoint = "http://127.0.0.1:1/v1/complete";
  c.timeout_seconds = 1;
  HttpBackend backend(c);
  EXPECT_THROW(
      {
        try {
          backend.label("x");
        } catch (const alrn::BackendFatalError&) {
          FAIL();
        }
      },
      alrn::BackendError);
}

TEST(HttpBackend, MalformedEndpointsAreFatal) {
  for (const char* url : {"127.0.0.1:8080/x", "ftp://host/x", "http:///x"}) {
    HttpBackendConfig c;
    c.endpoint = url;
    EXPECT_THROW(HttpBackend{c}, alrn::BackendFatalError) << url;
  }
  HttpBackendConfig c;
  c.endpoint = "http://127.0.0.1:9/x";
  c.timeout_seconds = 0;
  EXPECT_THROW(HttpBackend{c}, alrn::ConfigError);
}

TEST(HttpBackend, LabelingLoopRetriesThenRejects) {
  LocalServer server;
  server.reply(500, "{}");
  HttpBackend backend(config_for(server));
  const std::vector<alrn::CleanComment> comments{alrn::testing::comment("c1", "great course"),
                                                 alrn::testing::comment("c2", "bad course")};
  alrn::LabelerPolicy policy;
  policy.max_attempts = 2;
  policy.max_in_flight = 2;
  const auto run = alrn::llm_label(comments, backend, policy);
  EXPECT_TRUE(run.dataset.empty());
  ASSERT_EQ(run.rejects.size(), 2u);
  EXPECT_EQ(run.rejects[0].attempts, 2);
  EXPECT_EQ(server.requests(), 4);

  server.reply(401, "{}");
  EXPECT_THROW(alrn::llm_label(comments, backend, policy), alrn::BackendFatalError);

  server.reply(200, R"({"text": "positive"})");
  const auto ok = alrn::llm_label(comments, backend, policy);
  ASSERT_EQ(ok.dataset.size(), 2u);
  EXPECT_EQ(ok.dataset.examples[1].label, alrn::SentimentLabel::positive);
  EXPECT_EQ(ok.dataset.examples[1].source, alrn::LabelSource::llm);
}

}  // namespace
