#include <doctest.h>

#include <fmt/format.h>

#include "ppx/corpus.h"
#include "ppx/prompt_forge.h"
#include "support.h"

using namespace ppx;

namespace {

struct Setup {
  Taxonomy opp = Taxonomy::load(test::taxonomy_file("opp115"));
  Taxonomy gp = Taxonomy::load(test::taxonomy_file("goppc150"));
  Corpus opp_corpus = load_corpus(test::fixture("corpora/opp115.jsonl"), opp);
  Corpus gp_corpus = load_corpus(test::fixture("corpora/goppc150.jsonl"), gp);
  ExampleBank opp_bank = ExampleBank::load(test::fixture("banks/opp115.bank"));
  ExampleBank gp_bank = ExampleBank::load(test::fixture("banks/goppc150.bank"));
};

const Setup& setup() {
  static const Setup s;
  return s;
}

}  // namespace

TEST_CASE("five prompt kinds exist and parse by name or number") {
  CHECK(kAllPromptKinds.size() == 5);
  for (size_t i = 0; i < kAllPromptKinds.size(); ++i) {
    CHECK(parse_prompt_kind(to_string(kAllPromptKinds[i])) == kAllPromptKinds[i]);
    CHECK(parse_prompt_kind(fmt::format("p{}", i + 1)) == kAllPromptKinds[i]);
  }
  CHECK_THROWS_AS(parse_prompt_kind("FOUR_SHOT"), Error);
}

TEST_CASE("level-1 prompts match goldens") {
  const auto& s = setup();
  const Segment& seg = *s.opp_corpus.find("opp-001");
  const auto roots = s.opp.children_of(LabelPath::root());
  for (size_t i = 0; i < kAllPromptKinds.size(); ++i) {
    const auto p = render_classification_prompt(kAllPromptKinds[i], s.opp, roots, seg, std::nullopt, s.opp_bank);
    CHECK_MESSAGE(test::matches_golden(fmt::format("p{}.golden", i + 1), p.serialize()),
                  "kind ", to_string(kAllPromptKinds[i]));
  }
}

TEST_CASE("parent-conditioned level-2 prompts match goldens") {
  const auto& s = setup();
  const Segment& seg = *s.gp_corpus.find("gp-001");
  const LabelPath parent({"DATA SHARING"});
  const auto kids = s.gp.children_of(parent);
  for (size_t i = 0; i < kAllPromptKinds.size(); ++i) {
    const auto p = render_classification_prompt(kAllPromptKinds[i], s.gp, kids, seg, parent, s.gp_bank);
    CHECK(p.user_text.find("\"DATA SHARING\"") != std::string::npos);
    CHECK_MESSAGE(test::matches_golden(fmt::format("p{}_l2.golden", i + 1), p.serialize()),
                  "kind ", to_string(kAllPromptKinds[i]));
  }
}

TEST_CASE("explanation prompt matches golden") {
  const auto& s = setup();
  const Segment& seg = *s.opp_corpus.find("opp-002");
  const auto p = render_explanation_prompt(s.opp, seg, {s.opp.parse_label_path("Data Security")});
  CHECK(test::matches_golden("explain.golden", p.serialize()));
}

TEST_CASE("property: segment once, every candidate named, exemplar counts") {
  const auto& s = setup();
  const auto roots = s.opp.children_of(LabelPath::root());
  for (const auto& seg : s.opp_corpus.segments) {
    for (PromptKind kind : kAllPromptKinds) {
      const auto p = render_classification_prompt(kind, s.opp, roots, seg, std::nullopt, s.opp_bank);
      CHECK(text::count_occurrences(p.user_text, seg.text) == 1);
      for (const auto* n : roots) CHECK(p.user_text.find(n->name) != std::string::npos);
      CHECK(text::count_occurrences(p.user_text, "\nAnswer: ") == exemplars_required(kind) * roots.size());
    }
  }
  const auto kids = s.gp.children_of(LabelPath({"DATA SHARING"}));
  const auto& seg = s.gp_corpus.segments.front();
  const auto two = render_classification_prompt(PromptKind::kTwoShot, s.gp, kids, seg,
                                                 LabelPath({"DATA SHARING"}), s.gp_bank);
  CHECK(text::count_occurrences(two.user_text, "\nAnswer: ") == 2 * kids.size());
}

TEST_CASE("rendering is pure and definitions only add content") {
  const auto& s = setup();
  const auto roots = s.opp.children_of(LabelPath::root());
  const Segment& seg = *s.opp_corpus.find("opp-010");
  for (PromptKind kind : kAllPromptKinds) {
    const auto a = render_classification_prompt(kind, s.opp, roots, seg, std::nullopt, s.opp_bank);
    const auto b = render_classification_prompt(kind, s.opp, roots, seg, std::nullopt, s.opp_bank);
    CHECK(a.serialize() == b.serialize());
  }
  const auto p1 = render_classification_prompt(PromptKind::kTaskOnly, s.opp, roots, seg, std::nullopt, s.opp_bank);
  const auto p2 =
      render_classification_prompt(PromptKind::kWithDefinitions, s.opp, roots, seg, std::nullopt, s.opp_bank);
  CHECK(p2.user_text.size() > p1.user_text.size());
  for (const auto* n : roots) {
    CHECK(p2.user_text.find(n->description) != std::string::npos);
    CHECK(p1.user_text.find(n->description) == std::string::npos);
  }
  const auto cot =
      render_classification_prompt(PromptKind::kChainOfThought, s.opp, roots, seg, std::nullopt, s.opp_bank);
  CHECK(cot.user_text.find("step by step") != std::string::npos);
  CHECK(cot.user_text.find("Examples:") == std::string::npos);
}

TEST_CASE("prompt preconditions") {
  const auto& s = setup();
  const auto roots = s.opp.children_of(LabelPath::root());
  const Segment& seg = *s.opp_corpus.find("opp-001");

  ExampleBank thin;
  for (const auto* n : roots) thin.add(n->name, {"An example.", {n->name}});
  try {
    render_classification_prompt(PromptKind::kTwoShot, s.opp, roots, seg, std::nullopt, thin);
    FAIL("expected shortfall");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kExemplarShortfall);
  }
  CHECK_NOTHROW(render_classification_prompt(PromptKind::kOneShot, s.opp, roots, seg, std::nullopt, thin));

  Segment blank = seg;
  blank.text = " \n";
  try {
    render_classification_prompt(PromptKind::kTaskOnly, s.opp, roots, blank, std::nullopt, thin);
    FAIL("expected empty segment error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kEmptySegment);
  }
  CHECK_THROWS_AS(render_classification_prompt(PromptKind::kTaskOnly, s.opp, {}, seg, std::nullopt, thin), Error);

  const auto kids = s.gp.children_of(LabelPath({"DATA SHARING"}));
  CHECK_THROWS_AS(render_classification_prompt(PromptKind::kTaskOnly, s.gp, kids, seg, std::nullopt, s.gp_bank),
                  Error);
  CHECK_THROWS_AS(render_classification_prompt(PromptKind::kTaskOnly, s.opp, roots, seg,
                                               LabelPath({"Data Security"}), s.opp_bank),
                  Error);
}

TEST_CASE("explanation prompt contract") {
  const auto& s = setup();
  const Segment& seg = *s.opp_corpus.find("opp-003");
  CHECK_THROWS_AS(render_explanation_prompt(s.opp, seg, {}), Error);
  CHECK_THROWS_AS(render_explanation_prompt(s.opp, seg, {LabelPath::other()}), Error);

  const auto a = render_explanation_prompt(
      s.opp, seg, {s.opp.parse_label_path("Data Security"), s.opp.parse_label_path("Data Retention")});
  const auto b = render_explanation_prompt(
      s.opp, seg, {s.opp.parse_label_path("Data Retention"), s.opp.parse_label_path("Data Security")});
  CHECK(a.serialize() == b.serialize());
  const auto format_at = a.user_text.find("Output format");
  REQUIRE(format_at != std::string::npos);
  const auto retention = a.user_text.find("Data Retention\nMeaning:", format_at);
  const auto security = a.user_text.find("Data Security\nMeaning:", format_at);
  CHECK(retention != std::string::npos);
  CHECK(security != std::string::npos);
  CHECK(retention < security);
  CHECK(a.user_text.find(s.opp.node_at(s.opp.parse_label_path("Data Retention")).description) !=
        std::string::npos);
  CHECK(a.user_text.find("Example:") != std::string::npos);
  CHECK(text::count_occurrences(a.user_text, seg.text) == 1);
}

TEST_CASE("Chinese segments select the Chinese templates") {
  const auto& s = setup();
  Segment seg{"zh-1", "d", "zh-CN", "我们会将您的信息共享给合作伙伴。"};
  const auto roots = s.opp.children_of(LabelPath::root());
  const auto p = render_classification_prompt(PromptKind::kTaskOnly, s.opp, roots, seg, std::nullopt, s.opp_bank);
  CHECK(p.user_text.find("类别") != std::string::npos);
  CHECK(reask_instruction("zh") != reask_instruction("en"));
}
