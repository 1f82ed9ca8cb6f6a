#include <doctest.h>

#include <json.hpp>
#include <sstream>

#include "ppx/explainer.h"
#include "support.h"

using namespace ppx;

namespace {

struct Study {
  Taxonomy t = Taxonomy::load(test::taxonomy_file("opp115"));
  Corpus c = load_corpus(test::fixture("corpora/opp115_study.jsonl"), t);
};

const Study& study() {
  static const Study s;
  return s;
}

std::vector<std::string> ids(const std::vector<Segment>& segs) {
  std::vector<std::string> out;
  for (const auto& s : segs) out.push_back(s.id);
  return out;
}

std::vector<ExplanationItem> explain_all(const std::vector<Segment>& sample, Gateway& gw) {
  const auto& s = study();
  std::vector<ExplanationItem> out;
  for (const auto& seg : sample) {
    out.push_back(explain(seg, study_categories(s.c.gold(seg.id)), s.t, gw, default_explanation_config()));
  }
  return out;
}

}  // namespace

TEST_CASE("study categories drop OTHER and Practice Not Covered") {
  const auto& s = study();
  size_t eligible = 0;
  for (const auto& a : s.c.annotations) {
    const auto cats = study_categories(a);
    for (const auto& p : cats) {
      CHECK_FALSE(p.is_other());
      CHECK(p.render() != "Practice Not Covered");
    }
    eligible += !cats.empty();
  }
  CHECK(s.c.size() == 130);
  CHECK(eligible == 120);
}

TEST_CASE("study sampling") {
  const auto& s = study();
  const auto a = sample_for_study(s.c, 100, 2024);
  CHECK(a.size() == 100);
  CHECK(ids(a) == ids(sample_for_study(s.c, 100, 2024)));
  CHECK(ids(a) != ids(sample_for_study(s.c, 100, 2025)));
  std::set<std::string> unique;
  for (const auto& seg : a) {
    CHECK_FALSE(study_categories(s.c.gold(seg.id)).empty());
    unique.insert(seg.id);
  }
  CHECK(unique.size() == 100);
  CHECK(sample_for_study(s.c, 0, 1).empty());
  CHECK(sample_for_study(s.c, 120, 1).size() == 120);
  CHECK_THROWS_AS(sample_for_study(s.c, 121, 1), Error);
}

TEST_CASE("explain stores the model text and enumerates every category") {
  const auto& s = study();
  Gateway gw(test::stub_file("stub/study_explain.script"), test::fast_options(), test::no_sleep());
  const Segment& seg = *s.c.find("study-120");
  const auto cats = study_categories(s.c.gold(seg.id));
  REQUIRE(cats.size() == 2);
  const auto item = explain(seg, cats, s.t, gw, default_explanation_config());
  CHECK(item.source == ExplanationSource::kModel);
  CHECK(item.explanation_text.find("Data Retention: this category") == 0);
  CHECK(item.explanation_text.find("\nPolicy Change") != std::string::npos);

  const auto journal = gw.journal();
  REQUIRE(journal.size() == 1);
  const auto& req = journal[0].request;
  CHECK(req.tag.purpose == "explain");
  CHECK(req.config.temperature == doctest::Approx(0.6));
  CHECK(req.config.top_p == doctest::Approx(0.9));
  for (const auto& c : cats) CHECK(req.last_user_text().find(c.render() + "\nMeaning:") != std::string::npos);

  CHECK_THROWS_AS(explain(seg, {LabelPath::other()}, s.t, gw, default_explanation_config()), Error);
  CHECK_THROWS_AS(explain(seg, {}, s.t, gw, default_explanation_config()), Error);

  Gateway failing(test::stub_from("rules:\n- match: {purpose: explain}\n  fail: {status: 500}\n"),
                  test::fast_options(2), test::no_sleep());
  CHECK_THROWS_AS(explain(seg, cats, s.t, failing, default_explanation_config()), GatewayError);
}

TEST_CASE("blinded batch of 100 model items and 10 decoys") {
  const auto& s = study();
  Gateway gw(test::stub_file("stub/study_explain.script"), test::fast_options(), test::no_sleep());
  const auto sample = sample_for_study(s.c, 100, 2024);
  const auto model = explain_all(sample, gw);
  const auto decoys = load_decoys(test::fixture("study/decoys.jsonl"), s.c, s.t);
  REQUIRE(decoys.size() == 10);
  for (const auto& d : decoys) CHECK(d.source == ExplanationSource::kDecoy);

  const auto batch = assemble_batch(model, decoys, 2024);
  CHECK(batch.size() == 110);
  const auto again = assemble_batch(model, decoys, 2024);
  for (size_t i = 0; i < batch.size(); ++i) {
    CHECK(batch[i].item_id == again[i].item_id);
    CHECK(batch[i].segment_id == again[i].segment_id);
    CHECK(batch[i].source == again[i].source);
  }

  // Multiset of (segment, source, text) preserved.
  auto key = [](const ExplanationItem& x) {
    return x.segment_id + "|" + std::string(to_string(x.source)) + "|" + x.explanation_text;
  };
  std::multiset<std::string> in, out;
  for (const auto& x : model) in.insert(key(x));
  for (const auto& x : decoys) in.insert(key(x));
  for (const auto& x : batch) out.insert(key(x));
  CHECK(in == out);

  std::set<std::string> item_ids;
  for (const auto& x : batch) item_ids.insert(x.item_id);
  CHECK(item_ids.size() == 110);

  // Decoys are not all bunched at one end.
  size_t decoys_in_first_half = 0;
  for (size_t i = 0; i < 55; ++i) decoys_in_first_half += batch[i].source == ExplanationSource::kDecoy;
  CHECK(decoys_in_first_half > 0);
  CHECK(decoys_in_first_half < 10);

  const auto no_decoys = assemble_batch(model, {}, 5);
  CHECK(no_decoys.size() == 100);
}

TEST_CASE("annotator-facing batch never carries the source") {
  const auto& s = study();
  Gateway gw(test::stub_file("stub/study_explain.script"), test::fast_options(), test::no_sleep());
  const auto model = explain_all(sample_for_study(s.c, 20, 3), gw);
  const auto decoys = load_decoys(test::fixture("study/decoys.jsonl"), s.c, s.t);
  const auto batch = assemble_batch(model, decoys, 3);

  test::TempDir dir("batch");
  write_batch(dir / "batch.jsonl", batch);
  write_key(dir / "key.private.jsonl", batch);
  const auto text = test::slurp(dir / "batch.jsonl");
  CHECK(text.find("source") == std::string::npos);
  CHECK(text.find("MODEL") == std::string::npos);
  CHECK(text.find("DECOY") == std::string::npos);
  for (const auto& line : text::split(text, '\n')) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    CHECK(j.size() == 4);
    CHECK(j.contains("item_id"));
    CHECK(j.contains("text"));
    CHECK(j.contains("segment_text"));
    CHECK(j["categories"].is_array());
  }
  CHECK(test::slurp(dir / "key.private.jsonl").find("DECOY") != std::string::npos);

  const auto back = read_batch(dir / "batch.jsonl");
  REQUIRE(back.size() == batch.size());
  CHECK(back[3].item_id == batch[3].item_id);
  CHECK(back[3].explanation_text == batch[3].explanation_text);
  CHECK(back[3].categories == batch[3].categories);
}

TEST_CASE("explanation source names") {
  CHECK(to_string(ExplanationSource::kModel) == "MODEL");
  CHECK(parse_explanation_source("DECOY") == ExplanationSource::kDecoy);
  CHECK_THROWS_AS(parse_explanation_source("HUMAN"), Error);
}
