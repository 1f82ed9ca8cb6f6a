#include <doctest.h>

#include <fmt/format.h>
#include <json.hpp>
#include <random>
#include <thread>

#include "ppx/agreement.h"
#include "support.h"

using namespace ppx;

namespace {

// Ratings for one metric laid out as items × raters; other metrics copy it.
std::vector<Rating> from_matrix(const std::vector<std::vector<int>>& m) {
  std::vector<Rating> out;
  for (size_t i = 0; i < m.size(); ++i) {
    for (size_t r = 0; r < m[i].size(); ++r) {
      const int v = m[i][r];
      out.push_back({"a" + std::to_string(r), "item-" + std::to_string(i), v, v, v, ""});
    }
  }
  return out;
}

// n scores on the 1..3 scale summing to `sum`, using only 3s and 2s.
std::vector<int> scores_with_sum(size_t n, int sum) {
  std::vector<int> out(n, 3);
  for (size_t i = 0; i < 3 * n - sum; ++i) out[i] = 2;
  return out;
}

}  // namespace

TEST_CASE("rating validation") {
  Rating ok{"ann1", "item-0001", 3, 2, 1, ""};
  CHECK_NOTHROW(validate_rating(ok));
  Rating bad = ok;
  bad.logicality = 4;
  CHECK_THROWS_AS(validate_rating(bad), Error);
  bad = ok;
  bad.completeness = 0;
  CHECK_THROWS_AS(validate_rating(bad), Error);
  bad = ok;
  bad.annotator_id.clear();
  CHECK_THROWS_AS(validate_rating(bad), Error);

  CHECK(rating_from_json(to_json(ok)).same_scores(ok));
  CHECK_THROWS_AS(rating_from_json(nlohmann::json::parse(
                      R"({"annotator_id":"a","item_id":"i","completeness":2.5,"logicality":2,"comprehensibility":2})")),
                  Error);
  CHECK(ok.score(Metric::kLogicality) == 2);
  CHECK(parse_metric("completeness") == Metric::kCompleteness);
}

TEST_CASE("kappa matches the independent oracle values") {
  const auto cases = nlohmann::json::parse(test::slurp(test::fixture("agreement/kappa_oracle.json")));
  REQUIRE(cases.size() >= 3);
  for (const auto& c : cases) {
    CAPTURE(c["name"].get<std::string>());
    const auto m = c["matrix"].get<std::vector<std::vector<int>>>();
    const auto r = fleiss_kappa(from_matrix(m), Metric::kCompleteness);
    CHECK(std::abs(r.kappa - c["kappa"].get<double>()) < 1e-9);
    CHECK(r.n_items == m.size());
    CHECK(r.n_raters == m[0].size());
    CHECK(r.kappa <= 1.0);
  }
}

TEST_CASE("kappa edge cases") {
  const auto unanimous = fleiss_kappa(from_matrix({{1, 1, 1}, {2, 2, 2}, {3, 3, 3}}), Metric::kLogicality);
  CHECK(unanimous.kappa == doctest::Approx(1.0));
  CHECK_FALSE(unanimous.degenerate);

  const auto all_two = fleiss_kappa(from_matrix({{2, 2, 2}, {2, 2, 2}, {2, 2, 2}}), Metric::kLogicality);
  CHECK(all_two.kappa == 1.0);
  CHECK(all_two.degenerate);

  // One item is missing a rating: excluded, or rejected under strict mode.
  auto ratings = from_matrix({{1, 1, 2}, {2, 2, 2}, {3, 3, 1}, {1, 2, 3}});
  ratings.pop_back();
  const auto lenient = fleiss_kappa(ratings, Metric::kCompleteness);
  CHECK(lenient.n_items == 3);
  CHECK(lenient.excluded_items == std::vector<std::string>{"item-3"});
  CHECK(lenient.kappa == doctest::Approx(fleiss_kappa(from_matrix({{1, 1, 2}, {2, 2, 2}, {3, 3, 1}}),
                                                      Metric::kCompleteness)
                                             .kappa));
  try {
    fleiss_kappa(ratings, Metric::kCompleteness, true);
    FAIL("expected strict failure");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kUnequalRaters);
  }
  CHECK_THROWS_AS(fleiss_kappa(from_matrix({{1}, {2}}), Metric::kCompleteness), Error);
  CHECK_THROWS_AS(fleiss_kappa({}, Metric::kCompleteness), Error);
}

TEST_CASE("property: kappa is invariant under relabeling and reordering") {
  std::mt19937 rng(42);
  const std::array<std::array<int, 3>, 6> perms = {
      {{1, 2, 3}, {1, 3, 2}, {2, 1, 3}, {2, 3, 1}, {3, 1, 2}, {3, 2, 1}}};
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::vector<int>> m(5 + rng() % 20, std::vector<int>(3));
    for (auto& row : m) {
      for (auto& v : row) v = 1 + static_cast<int>(rng() % 3);
    }
    const double base = fleiss_kappa(from_matrix(m), Metric::kCompleteness).kappa;
    const auto& p = perms[rng() % perms.size()];
    auto relabeled = m;
    for (auto& row : relabeled) {
      for (auto& v : row) v = p[v - 1];
    }
    CHECK(fleiss_kappa(from_matrix(relabeled), Metric::kCompleteness).kappa == doctest::Approx(base).epsilon(1e-12));

    auto shuffled = from_matrix(m);
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    CHECK(fleiss_kappa(shuffled, Metric::kCompleteness).kappa == doctest::Approx(base).epsilon(1e-12));

    auto raters_swapped = m;
    for (auto& row : raters_swapped) std::shuffle(row.begin(), row.end(), rng);
    CHECK(fleiss_kappa(from_matrix(raters_swapped), Metric::kCompleteness).kappa ==
          doctest::Approx(base).epsilon(1e-12));
  }
}

TEST_CASE("average scores reproduce the published table from synthetic ratings") {
  // 100 model items and 10 decoys, three annotators each.
  UnblindingKey key;
  for (int i = 0; i < 110; ++i) {
    key[fmt::format("item-{:04d}", i)] = i < 100 ? ExplanationSource::kModel : ExplanationSource::kDecoy;
  }
  const std::array<int, 3> model_sums = {852, 819, 861};
  const std::array<int, 3> decoy_sums = {73, 63, 82};
  std::array<std::vector<int>, 3> model, decoy;
  for (size_t m = 0; m < 3; ++m) {
    model[m] = scores_with_sum(300, model_sums[m]);
    decoy[m] = scores_with_sum(30, decoy_sums[m]);
  }
  std::vector<Rating> ratings;
  size_t mi = 0, di = 0;
  for (int i = 0; i < 110; ++i) {
    for (int a = 0; a < 3; ++a) {
      const bool is_model = i < 100;
      auto& src = is_model ? model : decoy;
      size_t& k = is_model ? mi : di;
      ratings.push_back({"ann" + std::to_string(a), fmt::format("item-{:04d}", i), src[0][k], src[1][k], src[2][k], ""});
      ++k;
    }
  }
  const auto table = average_scores(ratings, key);
  const auto& mr = table.rows.at(ExplanationSource::kModel);
  const auto& dr = table.rows.at(ExplanationSource::kDecoy);
  CHECK(mr.items == 100);
  CHECK(mr.scores == 300);
  CHECK(dr.scores == 3 * dr.items);
  const auto text = format_score_table(table);
  CHECK(text.find("2.84") != std::string::npos);
  CHECK(text.find("2.73") != std::string::npos);
  CHECK(text.find("2.87") != std::string::npos);
  CHECK(text.find("2.43") != std::string::npos);
  CHECK(text.find("2.10") != std::string::npos);
  CHECK(std::abs(mr.mean[0] - 2.84) < 0.005);
  CHECK(std::abs(mr.mean[1] - 2.73) < 0.005);
  CHECK(std::abs(mr.mean[2] - 2.87) < 0.005);
  CHECK(std::abs(dr.mean[0] - 2.43) < 0.005);
  CHECK(std::abs(dr.mean[1] - 2.10) < 0.005);
  CHECK(std::abs(dr.mean[2] - 2.73) < 0.005);
  CHECK(table.coverage_gaps.empty());
}

TEST_CASE("average score examples") {
  UnblindingKey key = {{"i1", ExplanationSource::kModel}, {"i2", ExplanationSource::kModel}};
  const auto all_three = average_scores({{"a", "i1", 3, 3, 3, ""}, {"b", "i1", 3, 3, 3, ""}}, key);
  for (double m : all_three.rows.at(ExplanationSource::kModel).mean) CHECK(m == 3.0);
  CHECK(all_three.coverage_gaps == std::vector<std::string>{"i2"});

  const auto split = average_scores({{"a", "i1", 1, 1, 1, ""}, {"b", "i1", 3, 3, 3, ""}}, key);
  CHECK(split.rows.at(ExplanationSource::kModel).mean[0] == 2.0);

  try {
    average_scores({{"a", "zzz", 1, 1, 1, ""}}, key);
    FAIL("expected not found");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNotFound);
  }
}

TEST_CASE("rating journal is append-only, idempotent and rejects conflicts") {
  test::TempDir dir("journal");
  const auto path = dir / "ratings.jsonl";
  {
    RatingJournal j(path);
    CHECK(j.submit({"ann1", "item-0001", 3, 2, 3, "t1"}) == RatingJournal::Outcome::kAccepted);
    CHECK(j.submit({"ann1", "item-0001", 3, 2, 3, "t2"}) == RatingJournal::Outcome::kDuplicate);
    try {
      j.submit({"ann1", "item-0001", 1, 2, 3, "t3"});
      FAIL("expected conflict");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kConflict);
    }
    CHECK_THROWS_AS(j.submit({"ann1", "item-0002", 5, 2, 3, ""}), Error);
    CHECK(j.submit({"ann2", "item-0001", 2, 2, 2, ""}) == RatingJournal::Outcome::kAccepted);
    CHECK(j.has("ann2", "item-0001"));
    CHECK_FALSE(j.has("ann2", "item-0002"));
    CHECK(j.count_for("ann1") == 1);
    CHECK(read_ratings(path).size() == 2);
  }
  // Reopening resumes from the file.
  RatingJournal again(path);
  CHECK(again.snapshot().size() == 2);
  CHECK(again.submit({"ann1", "item-0001", 3, 2, 3, ""}) == RatingJournal::Outcome::kDuplicate);

  test::spit(dir / "conflict.jsonl",
             to_json(Rating{"a", "i", 1, 1, 1, ""}).dump() + "\n" + to_json(Rating{"a", "i", 2, 1, 1, ""}).dump() + "\n");
  CHECK_THROWS_AS(read_ratings(dir / "conflict.jsonl"), Error);
}

TEST_CASE("concurrent submissions all land in the journal") {
  test::TempDir dir("concurrent");
  RatingJournal j(dir / "ratings.jsonl");
  {
    std::vector<std::jthread> pool;
    for (int a = 0; a < 4; ++a) {
      pool.emplace_back([&, a] {
        for (int i = 0; i < 50; ++i) {
          j.submit({"ann" + std::to_string(a), "item-" + std::to_string(i), 1 + i % 3, 2, 3, ""});
        }
      });
    }
  }
  CHECK(j.snapshot().size() == 200);
  CHECK(read_ratings(dir / "ratings.jsonl").size() == 200);
}
