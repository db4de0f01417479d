// Copyright 2026 The taskreso Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <httplib.h>

#include <atomic>
#include <thread>

#include "taskreso/errors.hpp"
#include "taskreso/inference.hpp"
#include "test_support.hpp"

using namespace taskreso;
using nlohmann::json;

namespace {

// Local stub server on an ephemeral port; the handler is set per test.
class StubServer {
 public:
  explicit StubServer(httplib::Server::Handler handler) {
    server_.Post("/v1/distributions", handler);
    server_.Post("/api/v1/distributions", std::move(handler));
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~StubServer() {
    server_.stop();
    thread_.join();
  }
  std::string url(const std::string& prefix = "") const {
    return "http://127.0.0.1:" + std::to_string(port_) + prefix;
  }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

const char* kFixed = R"({"distributions": [{"probs": [0.6, 0.3], "tail_mass": 0.1}]})";

HttpBackendOptions fast(const std::string& url) {
  HttpBackendOptions o;
  o.endpoint = url;
  o.timeout = std::chrono::duration<double>(2.0);
  o.backoff_base = std::chrono::duration<double>(0.01);
  return o;
}

}  // namespace

TEST_CASE("echoes a fixed distribution and sends the documented request") {
  json seen;
  StubServer server([&](const httplib::Request& req, httplib::Response& res) {
    seen = json::parse(req.body);
    res.set_content(kFixed, "application/json");
  });
  const HttpBackend http(fast(server.url()));
  const Image img = testsupport::noise_image(3, 2, 1);
  const auto d = http.infer({"s-1", &img, "what is it?", 448, 5});
  REQUIRE(d.size() == 1);
  CHECK(d[0].probs == std::vector<double>{0.6, 0.3});
  CHECK(d[0].tail_mass == 0.1);
  CHECK(seen["sample_id"] == "s-1");
  CHECK(seen["prompt"] == "what is it?");
  CHECK(seen["resolution"] == 448);
  CHECK(seen["image_b64"] == base64_encode(encode_png(img)));
}

TEST_CASE("endpoint path prefix is honored") {
  StubServer server([](const httplib::Request&, httplib::Response& res) {
    res.set_content(kFixed, "application/json");
  });
  const HttpBackend http(fast(server.url("/api/")));
  CHECK(http.infer({"s", nullptr, "", 336, 0}).size() == 1);
}

TEST_CASE("retries 5xx until success") {
  std::atomic<int> calls{0};
  StubServer server([&](const httplib::Request&, httplib::Response& res) {
    if (++calls <= 2) {
      res.status = 500;
      return;
    }
    res.set_content(kFixed, "application/json");
  });
  auto o = fast(server.url());
  o.retries = 3;
  const HttpBackend http(o);
  CHECK(http.infer({"s", nullptr, "", 336, 0}).size() == 1);
  CHECK(calls == 3);
}

TEST_CASE("exhausted retries raise BackendError") {
  std::atomic<int> calls{0};
  StubServer server([&](const httplib::Request&, httplib::Response& res) {
    ++calls;
    res.status = 503;
  });
  auto o = fast(server.url());
  o.retries = 2;
  const HttpBackend http(o);
  CHECK_THROWS_AS(http.infer({"s", nullptr, "", 336, 0}), BackendError);
  CHECK(calls == 3);
}

TEST_CASE("client errors are not retried") {
  std::atomic<int> calls{0};
  StubServer server([&](const httplib::Request&, httplib::Response& res) {
    ++calls;
    res.status = 400;
  });
  const HttpBackend http(fast(server.url()));
  CHECK_THROWS_AS(http.infer({"s", nullptr, "", 336, 0}), BackendError);
  CHECK(calls == 1);
}

TEST_CASE("malformed responses raise SchemaError of backend class") {
  for (const char* body : {R"({"distributions": [{"probs": [-0.1, 1.1], "tail_mass": 0}]})",
                           R"({"other": 1})", "not json", R"({"distributions": []})"}) {
    StubServer server([&](const httplib::Request&, httplib::Response& res) {
      res.set_content(body, "application/json");
    });
    const HttpBackend http(fast(server.url()));
    try {
      http.infer({"s", nullptr, "", 336, 0});
      FAIL("expected SchemaError for " << body);
    } catch (const SchemaError& e) {
      CHECK(e.error_class() == ErrorClass::kBackend);
    }
  }
}

TEST_CASE("never exceeds max_inflight") {
  std::atomic<int> now{0}, peak{0}, total{0};
  StubServer server([&](const httplib::Request&, httplib::Response& res) {
    const int n = ++now;
    int p = peak.load();
    while (n > p && !peak.compare_exchange_weak(p, n)) {
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(30));
    --now;
    ++total;
    res.set_content(kFixed, "application/json");
  });
  auto o = fast(server.url());
  o.max_inflight = 2;
  const HttpBackend http(o);
  std::vector<std::thread> clients;
  for (int t = 0; t < 8; ++t)
    clients.emplace_back([&, t] { http.infer({"s" + std::to_string(t), nullptr, "", 336, 0}); });
  for (auto& c : clients) c.join();
  CHECK(total == 8);
  CHECK(peak.load() <= 2);
  CHECK(peak.load() >= 1);
}

TEST_CASE("unreachable endpoint") {
  // Port 1 (tcpmux) is not served on test machines; connect is refused.
  auto o = fast("http://127.0.0.1:1");
  o.retries = 1;
  const HttpBackend http(o);
  CHECK_THROWS_AS(http.infer({"s", nullptr, "", 336, 0}), BackendError);
}

TEST_CASE("endpoint validation") {
  CHECK_THROWS_AS(HttpBackend(fast("ftp://x")), InvalidArg);
  CHECK_THROWS_AS(HttpBackend(fast("not a url")), InvalidArg);
  auto o = fast("http://localhost:1");
  o.max_inflight = 0;
  CHECK_THROWS_AS(HttpBackend{o}, InvalidArg);
}

TEST_CASE("timeouts count as retryable failures") {
  std::atomic<int> calls{0};
  StubServer server([&](const httplib::Request&, httplib::Response& res) {
    if (++calls == 1) std::this_thread::sleep_for(std::chrono::milliseconds(400));
    res.set_content(kFixed, "application/json");
  });
  auto o = fast(server.url());
  o.timeout = std::chrono::duration<double>(0.1);
  o.retries = 1;
  const HttpBackend http(o);
  CHECK(http.infer({"s", nullptr, "", 336, 0}).size() == 1);
  CHECK(calls == 2);
}
