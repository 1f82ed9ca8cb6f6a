#include <doctest.h>

#include <sstream>
#include <thread>

#include "ppx/backends.h"
#include "ppx/llm_gateway.h"
#include "support.h"

using namespace ppx;

namespace {

const std::vector<std::string> kOppNames = {
    "First Party Collection/Use", "Third Party Sharing/Collection", "User Choice/Control",
    "User Access, Edit and Deletion", "Data Retention", "Data Security",
    "Policy Change", "Do Not Track", "International and Specific Audiences",
    "Privacy Contact Information"};

ChatRequest request_for(const std::string& segment, const std::string& text = "hello") {
  ChatRequest r;
  r.model = "m";
  r.messages = {{"system", "sys"}, {"user", text}};
  r.tag.segment_id = segment;
  r.tag.level = 1;
  return r;
}

}  // namespace

TEST_CASE("stub reply comes back on the first attempt") {
  auto stub = test::stub_from("rules:\n- match: {segment: s1}\n  reply: Data Security\n");
  Gateway gw(stub, test::fast_options(), test::no_sleep());
  const auto x = gw.complete(request_for("s1"));
  CHECK(x.response_text == "Data Security");
  CHECK(x.attempt_count == 1);
  CHECK(x.ok);
  CHECK(gw.call_count() == 1);
}

TEST_CASE("transient failures are retried with backoff") {
  auto stub = test::stub_from(
      "rules:\n- match: {segment: s1}\n  fail: {status: 503, times: 2}\n  reply: Data Security\n");
  std::vector<std::chrono::milliseconds> delays;
  Gateway gw(stub, test::fast_options(), [&](std::chrono::milliseconds d) { delays.push_back(d); });
  const auto x = gw.complete(request_for("s1"));
  CHECK(x.attempt_count == 3);
  CHECK(x.response_text == "Data Security");
  REQUIRE(delays.size() == 2);
  CHECK(delays[0].count() == 500);
  CHECK(delays[1].count() == 1000);
}

TEST_CASE("transport errors are retried too") {
  auto stub = test::stub_from(
      "rules:\n- match: {segment: s1}\n  fail: {transport: true, times: 1}\n  reply: OTHER\n");
  Gateway gw(stub, test::fast_options(), test::no_sleep());
  CHECK(gw.complete(request_for("s1")).attempt_count == 2);
}

TEST_CASE("always failing backend exhausts the cap") {
  auto stub = test::stub_from("rules:\n- match: {segment: s1}\n  fail: {status: 500}\n");
  Gateway gw(stub, test::fast_options(3), test::no_sleep());
  try {
    gw.complete(request_for("s1"));
    FAIL("expected GatewayError");
  } catch (const GatewayError& e) {
    CHECK(e.code() == ErrorCode::kRetriesExhausted);
    CHECK(e.attempts() == 3);
    CHECK(e.last_status() == 500);
    CHECK(e.body_excerpt().find("injected failure") != std::string::npos);
  }
  CHECK(gw.journal().size() == 1);
  CHECK_FALSE(gw.journal()[0].ok);
}

TEST_CASE("4xx is not retried") {
  auto stub = test::stub_from("rules:\n- match: {segment: s1}\n  fail: {status: 422}\n");
  Gateway gw(stub, test::fast_options(5), test::no_sleep());
  try {
    gw.complete(request_for("s1"));
    FAIL("expected GatewayError");
  } catch (const GatewayError& e) {
    CHECK(e.code() == ErrorCode::kClientError);
    CHECK(e.attempts() == 1);
  }
  // No matching rule and no default is a 404 from the stub.
  try {
    gw.complete(request_for("nope"));
    FAIL("expected GatewayError");
  } catch (const GatewayError& e) {
    CHECK(e.last_status() == 404);
  }
}

TEST_CASE("backoff delay schedule is capped") {
  RetryPolicy p;
  CHECK(p.delay_before(2).count() == 500);
  CHECK(p.delay_before(3).count() == 1000);
  CHECK(p.delay_before(5).count() == 4000);
  CHECK(p.delay_before(6).count() == 8000);
  CHECK(p.delay_before(12).count() == 8000);
}

TEST_CASE("wire format") {
  ChatRequest r = request_for("s1");
  r.config.seed = 7;
  auto body = to_wire(r);
  CHECK(body["model"] == "m");
  CHECK(body["messages"].size() == 2);
  CHECK(body["messages"][1]["role"] == "user");
  CHECK(body["temperature"] == doctest::Approx(0.6));
  CHECK(body["top_p"] == doctest::Approx(0.9));
  CHECK(body["top_k"] == 50);
  CHECK(body["seed"] == 7);
  CHECK_FALSE(body.contains("tag"));
  CHECK_FALSE(to_wire(r, false).contains("top_k"));

  r.config.greedy = true;
  body = to_wire(r);
  CHECK_FALSE(body.contains("temperature"));
  CHECK_FALSE(body.contains("top_k"));
  CHECK(body["do_sample"] == false);

  r.config.greedy = false;
  r.config.top_k = 0;
  CHECK_FALSE(to_wire(r).contains("top_k"));
}

TEST_CASE("generation config validation") {
  GenerationConfig c;
  CHECK_NOTHROW(c.validate());
  c.top_p = 0.0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.temperature = -0.1;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.top_k = -1;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.top_p = 1.0;
  c.temperature = 0.0;
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("parse_labels examples") {
  auto a = parse_labels("First Party Collection/Use; Data Security", kOppNames);
  CHECK(a.recognized == std::vector<std::string>{"First Party Collection/Use", "Data Security"});
  CHECK(a.unknown_mentions.empty());
  CHECK_FALSE(a.is_other);

  auto b = parse_labels("Reasoning: the text talks about nothing relevant.\nAnswer: OTHER", kOppNames);
  CHECK(b.is_other);
  CHECK(b.recognized.empty());

  auto c = parse_labels("Data Sale; Data Security", kOppNames);
  CHECK(c.recognized == std::vector<std::string>{"Data Security"});
  CHECK(c.unknown_mentions == std::vector<std::string>{"Data Sale"});

  CHECK_THROWS_AS(parse_labels("I cannot tell.", kOppNames), Error);
  CHECK_THROWS_AS(parse_labels("Data Security", {}), Error);
}

TEST_CASE("parse_labels tolerates case, whitespace and list markup") {
  auto a = parse_labels("  data security ,\n  do not track. ", kOppNames);
  CHECK(a.recognized == std::vector<std::string>{"Data Security", "Do Not Track"});

  auto b = parse_labels("- \"Data Retention\"\n- Policy Change", kOppNames);
  CHECK(b.recognized == std::vector<std::string>{"Data Retention", "Policy Change"});

  // Preamble is skipped: only the final block counts.
  auto c = parse_labels(
      "Step 1: the segment mentions Data Security practices? No.\n"
      "Step 2: it is about retention.\n\nAnswer: Data Retention",
      kOppNames);
  CHECK(c.recognized == std::vector<std::string>{"Data Retention"});

  // Names inside a sentence are found when nothing parses as a list.
  auto d = parse_labels("I would say this is mostly about Data Retention overall", kOppNames);
  CHECK(d.recognized == std::vector<std::string>{"Data Retention"});

  // Real categories beat OTHER.
  auto e = parse_labels("Data Security; OTHER", kOppNames);
  CHECK(e.recognized == std::vector<std::string>{"Data Security"});
  CHECK_FALSE(e.is_other);

  // Longest name wins over a prefix.
  auto f = parse_labels("User Access, Edit and Deletion", kOppNames);
  CHECK(f.recognized == std::vector<std::string>{"User Access, Edit and Deletion"});
}

TEST_CASE("property: parse_labels is idempotent and order-preserving") {
  std::vector<std::vector<std::string>> orders = {
      {"Data Security", "Policy Change"},
      {"Policy Change", "Data Security", "Do Not Track"},
      {"Privacy Contact Information"},
      {"User Choice/Control", "First Party Collection/Use", "Data Retention", "Data Security"}};
  for (const auto& order : orders) {
    const auto once = parse_labels(text::join(order, "; "), kOppNames);
    CHECK(once.recognized == order);
    const auto twice = parse_labels(text::join(once.recognized, "; "), kOppNames);
    CHECK(twice.recognized == once.recognized);
    CHECK(twice.is_other == once.is_other);
  }
}

TEST_CASE("property: recognized never holds OTHER and is_other implies empty") {
  const std::vector<std::string> replies = {"OTHER", "other", "Data Security", "Answer: OTHER; Do Not Track",
                                            "nothing here but OTHER", "Data Sale; OTHER"};
  for (const auto& r : replies) {
    const auto p = parse_labels(r, kOppNames);
    CHECK(std::find(p.recognized.begin(), p.recognized.end(), "OTHER") == p.recognized.end());
    if (p.is_other) CHECK(p.recognized.empty());
  }
}

TEST_CASE("unparseable output triggers exactly one re-ask") {
  auto stub = test::stub_from(
      "rules:\n"
      "- match: {segment: s1, round: 0}\n  reply: I am not sure what to say.\n"
      "- match: {segment: s1, round: 1}\n  reply: Data Security\n"
      "- match: {segment: s2}\n  reply: still nothing useful\n");
  Gateway gw(stub, test::fast_options(), test::no_sleep());
  auto ans = ask_labels(gw, request_for("s1"), kOppNames, "Answer with category names only.");
  CHECK(ans.labels.recognized == std::vector<std::string>{"Data Security"});
  REQUIRE(ans.exchanges.size() == 2);
  CHECK(ans.exchanges[1].request.tag.round == 1);
  CHECK(ans.exchanges[1].request.messages.size() == 4);
  CHECK(ans.exchanges[1].request.last_user_text() == "Answer with category names only.");

  std::vector<ChatExchange> partial;
  try {
    ask_labels(gw, request_for("s2"), kOppNames, "again", &partial);
    FAIL("expected unparseable");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kUnparseableOutput);
  }
  CHECK(partial.size() == 2);
  CHECK(gw.call_count() == 4);
}

TEST_CASE("stub is deterministic across runs and thread interleavings") {
  const std::string script =
      "rules:\n"
      "- match: {contains: flaky}\n  fail: {status: 503, times: 1}\n  reply: Do Not Track\n"
      "- match: {pattern: 'seg-[0-9]*7'}\n  reply: Policy Change\n"
      "default: {reply: OTHER}\n";
  auto run = [&](int threads) {
    Gateway gw(test::stub_from(script), test::fast_options(3, 3), test::no_sleep());
    std::vector<std::jthread> pool;
    std::atomic<int> next{0};
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (int i = next++; i < 40; i = next++) {
          const std::string id = "seg-" + std::to_string(i);
          gw.complete(request_for(id, i % 3 == 0 ? "a flaky one " + id : "plain " + id));
        }
      });
    }
    pool.clear();
    std::ostringstream out;
    gw.write_journal(out);
    return out.str();
  };
  const auto a = run(1);
  CHECK(a == run(1));
  CHECK(a == run(6));
  CHECK(text::count_occurrences(a, "\"attempt_count\":2") == 14);
}

TEST_CASE("journal round-trips through replay") {
  auto stub = test::stub_from("rules:\n- match: {segment: s1}\n  reply: Data Security\ndefault: {reply: OTHER}\n");
  Gateway gw(stub, test::fast_options(), test::no_sleep());
  gw.complete(request_for("s1"));
  gw.complete(request_for("s2"));
  const auto journal = gw.journal();
  for (const auto& x : journal) {
    const auto back = exchange_from_json(to_json(x));
    CHECK(to_json(back) == to_json(x));
  }
  Gateway replay(std::make_shared<ReplayBackend>(journal), test::fast_options(), test::no_sleep());
  CHECK(replay.complete(request_for("s1")).response_text == "Data Security");
  CHECK(replay.complete(request_for("s2")).response_text == "OTHER");
  CHECK_THROWS_AS(replay.complete(request_for("s3")), GatewayError);
}

TEST_CASE("stub script errors") {
  CHECK_THROWS_AS(StubBackend::parse("rules:\n- match: {segment: a}\n"), Error);
  CHECK_THROWS_AS(StubBackend::parse("rules:\n- match: {pattern: '('}\n  reply: x\n"), Error);
  CHECK_THROWS_AS(StubBackend::parse("rules:\n- match: {segment: a}\n  fail: {times: 2}\n"), Error);
  CHECK_THROWS_AS(StubBackend::load("/nonexistent/stub.script"), Error);
  CHECK(StubBackend::parse("rules: []\ndefault: {reply: OTHER}\n").rule_count() == 0);
}
