#include <chrono>
#include <sstream>
#include <thread>

#include <gtest/gtest.h>
#include <httplib.h>

#include "imp/design_json.h"
#include "imp/map_io.h"
#include "imp/studio/http_server.h"
#include "test_support.h"

namespace imp::studio {
namespace {

using namespace std::chrono_literals;
using nlohmann::json;
using imp::testing::load_fixture_design;
using imp::testing::TempDir;

class PacedPredictor final : public Predictor {
 public:
  explicit PacedPredictor(std::chrono::milliseconds delay) : inner_(config()), delay_(delay) {}
  ImportanceMap predict(const VectorDesign& d) const override {
    std::this_thread::sleep_for(delay_);
    return inner_.predict(d);
  }
  static PredictorConfig config() {
    PredictorConfig c;
    c.map_w = c.map_h = 48;
    return c;
  }

 private:
  ReferencePredictor inner_;
  std::chrono::milliseconds delay_;
};

struct SseEvent {
  std::string id;
  std::string event;
  std::string data;
};

std::vector<SseEvent> parse_sse(const std::string& body) {
  std::vector<SseEvent> out;
  std::istringstream in(body);
  std::string line;
  SseEvent cur;
  bool any = false;
  while (std::getline(in, line)) {
    if (line.empty()) {
      if (any) out.push_back(cur);
      cur = {};
      any = false;
    } else if (line[0] == ':') {
      continue;
    } else if (line.rfind("id: ", 0) == 0) {
      cur.id = line.substr(4), any = true;
    } else if (line.rfind("event: ", 0) == 0) {
      cur.event = line.substr(7), any = true;
    } else if (line.rfind("data: ", 0) == 0) {
      cur.data = line.substr(6), any = true;
    }
  }
  return out;
}

class HttpServerTest : public ::testing::Test {
 protected:
  void start(std::chrono::milliseconds delay = 0ms) {
    ServiceConfig cfg;
    cfg.data_dir = dir_.str();
    cfg.ga_defaults.population = 10;
    cfg.ga_defaults.elite = 3;
    cfg.ga_defaults.offspring = 7;
    cfg.ga_defaults.epochs = 5;
    service_ = std::make_unique<Service>(cfg, std::make_shared<PacedPredictor>(delay),
                                         TemplateLibrary::load_directory(IMP_TEMPLATE_DIR));
    server_ = std::make_unique<HttpServer>(*service_);
    port_ = server_->start("127.0.0.1", 0);
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
    client_->set_read_timeout(60, 0);
  }
  void SetUp() override { start(); }
  void TearDown() override {
    client_.reset();
    if (server_) server_->stop();
    server_.reset();
    service_.reset();
  }
  void restart(std::chrono::milliseconds delay) {
    TearDown();
    start(delay);
  }

  std::string create(const std::string& fixture) {
    auto res = client_->Post("/designs", canonical_json(load_fixture_design(fixture)), "application/json");
    EXPECT_TRUE(res);
    EXPECT_EQ(res->status, 201);
    return json::parse(res->body)["id"];
  }

  std::string stream(const std::string& job, const httplib::Headers& headers = {}) {
    std::string body;
    auto res = client_->Get("/jobs/" + job + "/events", headers, [&](const char* data, std::size_t n) {
      body.append(data, n);
      return true;
    });
    EXPECT_TRUE(res);
    EXPECT_EQ(res->status, 200);
    EXPECT_EQ(res->get_header_value("Content-Type"), "text/event-stream");
    return body;
  }

  TempDir dir_;
  std::unique_ptr<Service> service_;
  std::unique_ptr<HttpServer> server_;
  std::unique_ptr<httplib::Client> client_;
  int port_ = 0;
};

TEST_F(HttpServerTest, CreateThenGetReturnsCanonicalJson) {
  const std::string id = create("poster");
  auto res = client_->Get("/designs/" + id);
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(res->body, canonical_json(load_fixture_design("poster")));
  EXPECT_FALSE(res->get_header_value("X-Created-Ms").empty());

  auto put = client_->Put("/designs/" + id, canonical_json(load_fixture_design("ad")), "application/json");
  ASSERT_TRUE(put);
  EXPECT_EQ(put->status, 200);
  EXPECT_EQ(client_->Get("/designs/" + id)->body, canonical_json(load_fixture_design("ad")));
}

TEST_F(HttpServerTest, ErrorStatuses) {
  auto missing = client_->Get("/designs/d-nope");
  ASSERT_TRUE(missing);
  EXPECT_EQ(missing->status, 404);
  EXPECT_EQ(json::parse(missing->body)["error"], "NotFound");
  EXPECT_EQ(client_->Get("/jobs/j-nope")->status, 404);
  EXPECT_EQ(client_->Get("/jobs/j-nope/events")->status, 404);
  EXPECT_EQ(client_->Delete("/jobs/j-nope")->status, 404);
  EXPECT_EQ(client_->Post("/designs/d-nope/predict", "", "application/json")->status, 404);

  EXPECT_EQ(client_->Post("/designs", "{not json", "application/json")->status, 400);
  EXPECT_EQ(client_->Post("/designs", R"({"canvas": {"w": 10}})", "application/json")->status, 400);
  json extra = json::parse(canonical_json(load_fixture_design("ad")));
  extra["colour"] = "red";
  EXPECT_EQ(client_->Post("/designs", extra.dump(), "application/json")->status, 400);
  EXPECT_EQ(client_->Post("/designs?lenient=1", extra.dump(), "application/json")->status, 201);

  const std::string mobile = create("mobile");
  auto reflow = client_->Post("/designs/" + mobile + "/reflow", R"({"width": 1600, "height": 900})",
                              "application/json");
  ASSERT_TRUE(reflow);
  EXPECT_EQ(reflow->status, 422);
  EXPECT_EQ(json::parse(reflow->body)["error"], "NoTemplateForCount");
  EXPECT_EQ(client_->Post("/designs/" + mobile + "/reflow", R"({"width": 1600})", "application/json")->status, 400);
  EXPECT_EQ(client_->Post("/designs/" + mobile + "/optimize", R"({"targets": {"header": 3}})",
                          "application/json")->status, 400);
}

TEST_F(HttpServerTest, ConflictWhileJobActive) {
  restart(15ms);
  const std::string id = create("ad");
  auto sub = client_->Post("/designs/" + id + "/optimize", R"({"config": {"epochs": 60}})", "application/json");
  ASSERT_TRUE(sub);
  ASSERT_EQ(sub->status, 202);
  const std::string job = json::parse(sub->body)["job_id"];
  EXPECT_EQ(client_->Put("/designs/" + id, canonical_json(load_fixture_design("ad")), "application/json")->status,
            409);
  EXPECT_EQ(client_->Post("/designs/" + id + "/optimize", "{}", "application/json")->status, 409);
  auto del = client_->Delete("/jobs/" + job);
  ASSERT_TRUE(del);
  EXPECT_EQ(del->status, 200);
  EXPECT_EQ(service_->wait_job(job, 30s).state, JobState::kCancelled);
  EXPECT_EQ(client_->Put("/designs/" + id, canonical_json(load_fixture_design("ad")), "application/json")->status,
            200);
}

TEST_F(HttpServerTest, PredictReportsScoresAndCache) {
  const std::string id = create("poster");
  auto first = client_->Post("/designs/" + id + "/predict", "", "application/json");
  ASSERT_TRUE(first);
  ASSERT_EQ(first->status, 200);
  const json a = json::parse(first->body);
  EXPECT_FALSE(a["cached"].get<bool>());
  EXPECT_EQ(a["scores"].size(), 5u);
  EXPECT_EQ(a["scores"][0]["id"], "title");
  EXPECT_EQ(a["hash"].get<std::string>().size(), 16u);
  const json b = json::parse(client_->Post("/designs/" + id + "/predict", "", "application/json")->body);
  EXPECT_TRUE(b["cached"].get<bool>());
  EXPECT_EQ(b["map"], a["map"]);
  const ImportanceMap map = map_from_json(a["map"]);
  EXPECT_EQ(map, PacedPredictor(0ms).predict(load_fixture_design("poster")));

  auto png = client_->Get("/designs/" + id + "/map.png");
  ASSERT_TRUE(png);
  EXPECT_EQ(png->status, 200);
  EXPECT_EQ(png->get_header_value("Content-Type"), "image/png");
  EXPECT_EQ(decode_png(std::vector<std::uint8_t>(png->body.begin(), png->body.end())).pixels,
            to_grayscale(map).pixels);
}

TEST_F(HttpServerTest, OptimizeWithCurrentTargetsReachesZero) {
  const std::string id = create("webpage");
  const json pred = json::parse(client_->Post("/designs/" + id + "/predict", "", "application/json")->body);
  json targets = json::object();
  for (const auto& s : pred["scores"]) targets[s["id"].get<std::string>()] = s["score"];
  auto sub = client_->Post("/designs/" + id + "/optimize", json{{"targets", targets}}.dump(), "application/json");
  ASSERT_EQ(sub->status, 202);
  const std::string job = json::parse(sub->body)["job_id"];
  service_->wait_job(job, 60s);
  const json rec = json::parse(client_->Get("/jobs/" + job)->body);
  EXPECT_EQ(rec["state"], "done");
  EXPECT_EQ(rec["result"]["total"].get<double>(), 0.0);
  EXPECT_EQ(rec["snapshots"].size(), 5u);
  EXPECT_FALSE(json::parse(client_->Get("/jobs/" + job + "?snapshots=0")->body).contains("snapshots"));
}

TEST_F(HttpServerTest, EventStreamIsOrderedAndResumable) {
  restart(2ms);
  const std::string id = create("poster");
  auto sub = client_->Post("/designs/" + id + "/optimize", R"({"config": {"epochs": 8}})", "application/json");
  ASSERT_EQ(sub->status, 202);
  const std::string job = json::parse(sub->body)["job_id"];

  const std::vector<SseEvent> events = parse_sse(stream(job));
  ASSERT_EQ(events.size(), 9u);
  for (int i = 0; i < 8; ++i) {
    EXPECT_EQ(events[i].event, "epoch");
    EXPECT_EQ(events[i].id, std::to_string(i));
    const json data = json::parse(events[i].data);
    EXPECT_EQ(data["epoch"], i);
    EXPECT_TRUE(data.contains("design"));
    if (i > 0) {
      EXPECT_LE(data["fitness"]["total"].get<double>(),
                json::parse(events[i - 1].data)["fitness"]["total"].get<double>());
    }
  }
  EXPECT_EQ(events.back().event, "end");
  EXPECT_EQ(json::parse(events.back().data)["state"], "done");

  const std::vector<SseEvent> resumed = parse_sse(stream(job, {{"Last-Event-ID", "5"}}));
  ASSERT_EQ(resumed.size(), 3u);
  EXPECT_EQ(resumed[0].id, "6");
  EXPECT_EQ(resumed[1].id, "7");
  EXPECT_EQ(resumed[0].data, events[6].data);
  EXPECT_EQ(resumed[2].event, "end");
}

TEST_F(HttpServerTest, CancelMidStream) {
  restart(15ms);
  const std::string id = create("ad");
  auto sub = client_->Post("/designs/" + id + "/optimize", R"({"config": {"epochs": 40}})", "application/json");
  const std::string job = json::parse(sub->body)["job_id"];
  httplib::Client canceller("127.0.0.1", port_);
  std::string body;
  bool cancelled = false;
  client_->Get("/jobs/" + job + "/events", [&](const char* data, std::size_t n) {
    body.append(data, n);
    if (!cancelled && body.find("event: epoch") != std::string::npos) {
      cancelled = true;
      EXPECT_EQ(canceller.Delete("/jobs/" + job)->status, 200);
    }
    return true;
  });
  const std::vector<SseEvent> events = parse_sse(body);
  ASSERT_FALSE(events.empty());
  EXPECT_EQ(events.back().event, "end");
  EXPECT_EQ(json::parse(events.back().data)["state"], "cancelled");
  EXPECT_LT(events.size() - 1, 40u);
  const json rec = json::parse(client_->Get("/jobs/" + job)->body);
  EXPECT_EQ(rec["state"], "cancelled");
  EXPECT_LT(rec["snapshots"].size(), 40u);
}

TEST_F(HttpServerTest, ReflowAndTemplates) {
  const std::string id = create("poster");
  auto res = client_->Post("/designs/" + id + "/reflow", R"({"width": 1600, "height": 900})", "application/json");
  ASSERT_TRUE(res);
  ASSERT_EQ(res->status, 201);
  const json body = json::parse(res->body);
  EXPECT_EQ(body["template_id"], "landscape-5");
  EXPECT_EQ(body["ranking"].size(), 5u);
  const std::string created = body["id"];
  EXPECT_EQ(json::parse(client_->Get("/designs/" + created)->body)["canvas"]["w"], 1600);

  auto tpl = client_->Get("/templates");
  ASSERT_TRUE(tpl);
  EXPECT_EQ(json::parse(tpl->body).size(), 14u);
}

TEST(SseFrame, Format) {
  EpochSnapshot s;
  s.epoch = 3;
  s.design = load_fixture_design("ad");
  const std::string frame = sse_epoch_event(s);
  EXPECT_EQ(frame.rfind("id: 3\nevent: epoch\ndata: {", 0), 0u);
  EXPECT_EQ(frame.substr(frame.size() - 2), "\n\n");
  EXPECT_EQ(frame.find('\n', 26), frame.size() - 2);
}

}  // namespace
}  // namespace imp::studio
