#include <doctest.h>

#include <httplib.h>
#include <json.hpp>
#include <thread>

#include "ppx/annotation_service.h"
#include "support.h"

using namespace ppx;
using nlohmann::json;

namespace {

// 100 model explanations plus 10 decoys, written and re-read the way
// `ppx serve` sees them: from the annotator-facing file only.
std::vector<ExplanationItem> study_batch(const test::TempDir& dir) {
  const Taxonomy t = Taxonomy::load(test::taxonomy_file("opp115"));
  const Corpus c = load_corpus(test::fixture("corpora/opp115_study.jsonl"), t);
  Gateway gw(test::stub_file("stub/study_explain.script"), test::fast_options(), test::no_sleep());
  std::vector<ExplanationItem> model;
  for (const auto& seg : sample_for_study(c, 100, 2024)) {
    model.push_back(explain(seg, study_categories(c.gold(seg.id)), t, gw, default_explanation_config()));
  }
  auto batch = assemble_batch(model, load_decoys(test::fixture("study/decoys.jsonl"), c, t), 2024);
  write_batch(dir / "batch.jsonl", batch);
  return read_batch(dir / "batch.jsonl");
}

class LiveServer {
 public:
  explicit LiveServer(AnnotationService& service) {
    service.bind(server_);
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~LiveServer() {
    server_.stop();
    thread_.join();
  }
  httplib::Client client() const { return httplib::Client("127.0.0.1", port_); }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
};

std::string rating_body(const std::string& annotator, const std::string& item, int c, int l, int c2) {
  return json{{"annotator_id", annotator}, {"item_id", item}, {"completeness", c}, {"logicality", l},
              {"comprehensibility", c2}}
      .dump();
}

bool leaks_source(const std::string& payload) {
  return payload.find("\"source\"") != std::string::npos || payload.find("MODEL") != std::string::npos ||
         payload.find("DECOY") != std::string::npos;
}

}  // namespace

TEST_CASE("queue, rating and progress over HTTP") {
  test::TempDir dir("api");
  const auto batch = study_batch(dir);
  REQUIRE(batch.size() == 110);
  AnnotationService service(batch, {"ann1", "ann2", "ann3"}, dir / "ratings.jsonl");
  LiveServer live(service);
  auto cli = live.client();

  auto q = cli.Get("/api/queue/ann1");
  REQUIRE(q);
  CHECK(q->status == 200);
  auto qj = json::parse(q->body);
  CHECK(qj["pending"].size() == 110);
  CHECK(qj["pending"][0] == batch[0].item_id);
  CHECK(qj["done"] == 0);

  CHECK(cli.Get("/api/queue/mallory")->status == 404);
  CHECK(cli.Get("/api/item/item-9999")->status == 404);

  const std::string first = batch[0].item_id;
  auto ok = cli.Post("/api/ratings", rating_body("ann1", first, 3, 2, 3), "application/json");
  REQUIRE(ok);
  CHECK(ok->status == 200);
  CHECK(json::parse(ok->body)["status"] == "accepted");
  CHECK(json::parse(ok->body)["done"] == 1);

  // Read-your-writes: the agreement side sees the rating immediately.
  const auto on_disk = read_ratings(dir / "ratings.jsonl");
  REQUIRE(on_disk.size() == 1);
  CHECK(on_disk[0].item_id == first);

  CHECK(json::parse(cli.Post("/api/ratings", rating_body("ann1", first, 3, 2, 3), "application/json")->body)["status"] ==
        "duplicate");
  CHECK(cli.Post("/api/ratings", rating_body("ann1", first, 1, 2, 3), "application/json")->status == 409);
  CHECK(cli.Post("/api/ratings", rating_body("ann1", batch[1].item_id, 4, 2, 3), "application/json")->status == 400);
  CHECK(cli.Post("/api/ratings", "{oops", "application/json")->status == 400);
  CHECK(cli.Post("/api/ratings", rating_body("mallory", first, 1, 1, 1), "application/json")->status == 404);
  CHECK(cli.Post("/api/ratings", rating_body("ann1", "item-9999", 1, 1, 1), "application/json")->status == 404);

  qj = json::parse(cli.Get("/api/queue/ann1")->body);
  CHECK(qj["pending"].size() == 109);
  CHECK(qj["pending"][0] == batch[1].item_id);

  for (const auto& item : batch) {
    cli.Post("/api/ratings", rating_body("ann2", item.item_id, 2, 2, 2), "application/json");
  }
  CHECK(json::parse(cli.Get("/api/queue/ann2")->body)["pending"].empty());

  const auto pj = json::parse(cli.Get("/api/progress")->body);
  CHECK(pj["total"] == 110);
  CHECK(pj["annotators"]["ann1"]["done"] == 1);
  CHECK(pj["annotators"]["ann2"]["pending"] == 0);
  CHECK(pj["annotators"]["ann3"]["done"] == 0);
}

TEST_CASE("no endpoint response reveals an item's source") {
  test::TempDir dir("blind");
  const auto batch = study_batch(dir);
  AnnotationService service(batch, {"ann1", "ann2"}, dir / "ratings.jsonl");
  LiveServer live(service);
  auto cli = live.client();

  std::vector<std::string> payloads;
  payloads.push_back(cli.Get("/api/queue/ann1")->body);
  for (const auto& item : batch) {
    auto r = cli.Get("/api/item/" + item.item_id);
    REQUIRE(r);
    CHECK(r->status == 200);
    const auto j = json::parse(r->body);
    CHECK(j["text"] == item.explanation_text);
    payloads.push_back(r->body);
    payloads.push_back(
        cli.Post("/api/ratings", rating_body("ann1", item.item_id, 3, 3, 3), "application/json")->body);
  }
  payloads.push_back(cli.Get("/api/queue/ann1")->body);
  payloads.push_back(cli.Get("/api/progress")->body);
  payloads.push_back(cli.Get("/api/queue/nobody")->body);
  size_t leaks = 0;
  for (const auto& p : payloads) leaks += leaks_source(p);
  CHECK(leaks == 0);
  CHECK(payloads.size() == 2 * batch.size() + 4);
}

TEST_CASE("service rejects malformed setups") {
  test::TempDir dir("setup");
  ExplanationItem a;
  a.item_id = "item-0000";
  CHECK_THROWS_AS(AnnotationService({a, a}, {"ann1"}, dir / "r.jsonl"), Error);
  CHECK_THROWS_AS(AnnotationService({a}, {}, dir / "r.jsonl"), Error);
}
