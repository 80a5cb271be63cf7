#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include "postforge/features.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"
#include "support/temp_dir.hpp"

using namespace postforge;
using namespace postforge::testing;

namespace {

QuestionRecord with_answers(std::vector<std::int64_t> scores, std::vector<std::int64_t> comments,
                            std::vector<std::int64_t> reputations, std::int64_t views) {
  QuestionRecord q;
  q.question_id = 1;
  q.tags = {"java"};
  q.view_count = views;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    q.answers.push_back({static_cast<std::int64_t>(i + 1), scores[i], comments[i], reputations[i], "", {}});
  }
  return q;
}

}  // namespace

TEST_CASE("features: no answers") {
  auto q = with_answers({}, {}, {}, 18);
  q.accepted_answer_id = 5;  // dangling; nothing to accept
  const auto fv = extract_features(q);
  CHECK_FALSE(fv.haa);
  CHECK(fv.ac == 0);
  CHECK(fv.sas == 0);
  CHECK(fv.ssvc == 0);
  CHECK(fv.acc == 0);
  CHECK(fv.aar == 0);
  CHECK(fv.s == 0);
  CHECK(fv.vc == 18);
  CHECK(fv.degenerate == kNoAnswers);
}

TEST_CASE("features: forced arithmetic") {
  const auto fv = extract_features(with_answers({3, -1, 2}, {1, 0, 2}, {300, 600, 900}, 400));
  CHECK(fv.ac == 3);
  CHECK(fv.sas == 4);
  CHECK(fv.ssvc == 0.01);
  CHECK(fv.acc == 1);
  CHECK(fv.aar == 600);
  CHECK(fv.degenerate == 0);
}

TEST_CASE("features: zero views") {
  const auto fv = extract_features(with_answers({-2}, {0}, {1}, 0));
  CHECK(fv.ssvc == 0);
  CHECK(fv.sas == -2);
  CHECK(fv.degenerate == kNoViews);
}

TEST_CASE("features: dangling accepted id with answers still counts") {
  auto q = with_answers({1}, {0}, {1}, 10);
  q.accepted_answer_id = 99;
  normalize(q);
  CHECK(q.accepted_dangling);
  CHECK(extract_features(q).haa);
}

TEST_CASE("features: agree with the oracle on 1000 random records") {
  std::mt19937_64 rng(2024);
  int zero_answer = 0;
  int zero_views = 0;
  for (std::int64_t id = 1; id <= 1000; ++id) {
    const auto q = random_question(rng, id);
    const auto fv = extract_features(q);
    const auto expected = feature_oracle(q);
    REQUIRE(fv == expected);
    REQUIRE(extract_features(q) == fv);
    zero_answer += fv.ac == 0;
    zero_views += fv.vc == 0;
    if (fv.ac == 0) {
      REQUIRE(fv.sas == 0);
      REQUIRE(fv.acc == 0);
      REQUIRE(fv.aar == 0);
      REQUIRE_FALSE(fv.haa);
    }
    if (fv.vc > 0) {
      REQUIRE(std::abs(fv.ssvc * static_cast<double>(fv.vc) - static_cast<double>(fv.sas)) <= 1e-12 * std::max<double>(1, std::abs(static_cast<double>(fv.sas))));
      REQUIRE((fv.ssvc > 0) == (fv.sas > 0));
      REQUIRE((fv.ssvc < 0) == (fv.sas < 0));
    }
  }
  CHECK(zero_answer > 50);
  CHECK(zero_views > 5);
}

TEST_CASE("features: array and JSON round trips") {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 200; ++i) {
    auto fv = random_vector(rng);
    fv.ssvc = round_significant(fv.ssvc);
    CHECK(FeatureVector::from_array(fv.to_array()) == fv);
    CHECK(nlohmann::json(fv).get<FeatureVector>() == fv);
    for (std::size_t f = 0; f < kFeatureCount; ++f) CHECK(fv[static_cast<Feature>(f)] == fv.to_array()[f]);
  }
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    CHECK(feature_from_name(feature_name(static_cast<Feature>(f))) == static_cast<Feature>(f));
  }
  CHECK_THROWS_AS(feature_from_name("xyz"), std::invalid_argument);
}

TEST_CASE("labels: unanimous sheets resolve, mixed ones need review") {
  using enum Label;
  CHECK(aggregate_labels({1, {yes, yes, yes}, {}, {}}) == LabelDecision::yes);
  CHECK(aggregate_labels({1, {no, no, no}, {}, {}}) == LabelDecision::no);
  CHECK(aggregate_labels({1, {yes, yes, no}, {}, {}}) == LabelDecision::needs_review);
  CHECK_THROWS_WITH_AS(aggregate_labels({1, {yes, yes}, {}, {}}), "unresolvable sheet", std::invalid_argument);
  CHECK(resolve_label({1, {yes, no, no}, {}, yes}) == yes);
  CHECK_FALSE(resolve_label({1, {yes, no, no}, {}, {}}));
}

TEST_CASE("labels: decisions do not depend on vote order") {
  std::mt19937_64 rng(4);
  for (int run = 0; run < 300; ++run) {
    VoteSheet sheet;
    const auto n = uniform_int(rng, 3, 6);
    for (std::int64_t i = 0; i < n; ++i) sheet.votes.push_back(chance(rng, 0.7) ? Label::yes : Label::no);
    const auto first = aggregate_labels(sheet);
    std::sort(sheet.votes.begin(), sheet.votes.end());
    do {
      REQUIRE(aggregate_labels(sheet) == first);
    } while (std::next_permutation(sheet.votes.begin(), sheet.votes.end()));
  }
}

TEST_CASE("labels: vote sheet file") {
  TempDir dir;
  std::ofstream(dir.path / "votes.jsonl")
      << R"({"question_id": 1, "votes": ["YES", "YES", "YES"]})" << "\n\n"
      << R"({"question_id": 2, "votes": ["YES", "NO", "NO"], "override": "NO", "criteria": [{"correctness": false}]})" << "\n";
  const auto sheets = read_vote_sheets((dir.path / "votes.jsonl").string());
  REQUIRE(sheets.size() == 2);
  CHECK(sheets[1].override_label == Label::no);
  REQUIRE(sheets[1].notes.size() == 1);
  CHECK(sheets[1].notes[0].correct == false);
  CHECK_FALSE(sheets[1].notes[0].complete);
  CHECK(resolve_label(sheets[0]) == Label::yes);
  CHECK_THROWS_AS(read_vote_sheets((dir.path / "none.jsonl").string()), std::runtime_error);
}

TEST_CASE("iqr: constant list keeps everything") {
  const std::vector<double> v{5, 5, 5, 5};
  const auto b = iqr_bounds(v);
  CHECK(b.lower == 5);
  CHECK(b.upper == 5);
  for (double x : v) CHECK(b.contains(x));
}

TEST_CASE("iqr: a far value is excluded") {
  const std::vector<double> v{1, 2, 3, 4, 5, 100};
  // Q1 = 2.25, Q3 = 4.75, IQR = 2.5.
  const auto b = iqr_bounds(v, 1.5);
  CHECK(b.lower == doctest::Approx(-1.5));
  CHECK(b.upper == doctest::Approx(8.5));
  CHECK_FALSE(b.contains(100));
  CHECK(b.contains(5));
  CHECK_THROWS_AS(iqr_bounds(std::vector<double>{1, 2, 3}), std::invalid_argument);
}

TEST_CASE("iqr: bounds shift with the data") {
  std::mt19937_64 rng(6);
  for (int run = 0; run < 100; ++run) {
    std::vector<double> v;
    for (int i = 0; i < 4 + run % 20; ++i) v.push_back(std::uniform_real_distribution<double>(-50, 50)(rng));
    const double c = std::uniform_real_distribution<double>(-1000, 1000)(rng);
    std::vector<double> shifted = v;
    for (double& x : shifted) x += c;
    const auto a = iqr_bounds(v);
    const auto b = iqr_bounds(shifted);
    CHECK(b.lower == doctest::Approx(a.lower + c));
    CHECK(b.upper == doctest::Approx(a.upper + c));
  }
}

TEST_CASE("quantile: linear interpolation") {
  CHECK(quantile({3, 1, 2}, 0.5) == 2);
  CHECK(quantile({1, 2, 3, 4}, 0.5) == 2.5);
  CHECK(quantile({10}, 0.9) == 10);
  CHECK(quantile({1, 2, 3, 4, 5}, 1.0) == 5);
  CHECK_THROWS_AS(quantile({}, 0.5), std::invalid_argument);
}

namespace {

Dataset vc_dataset() {
  Dataset d;
  for (int i = 0; i < 10; ++i) {
    LabeledExample yes;
    yes.question_id = i + 1;
    yes.features.vc = i * 10;
    yes.label = Label::yes;
    d.push_back(yes);
    LabeledExample no;
    no.question_id = i + 101;
    no.features.vc = 100 + i * 10;
    no.label = Label::no;
    d.push_back(no);
  }
  return d;
}

}  // namespace

TEST_CASE("summarize: hand tally of view counts") {
  const auto report = summarize(vc_dataset());
  const auto& yes = report.at(Feature::vc, Label::yes);
  const auto& no = report.at(Feature::vc, Label::no);
  // Shared edges 0, 19, ..., 190.
  CHECK(yes.histogram.edges == no.histogram.edges);
  CHECK(yes.histogram.edges.front() == 0);
  CHECK(yes.histogram.edges.back() == 190);
  CHECK(yes.histogram.counts == std::vector<std::size_t>{2, 2, 2, 2, 2, 0, 0, 0, 0, 0});
  CHECK(no.histogram.counts == std::vector<std::size_t>{0, 0, 0, 0, 0, 2, 2, 2, 2, 2});
  CHECK(yes.removed == 0);
  CHECK(report.warnings.empty());
  const auto& haa = report.at(Feature::haa, Label::yes);
  CHECK(haa.histogram.counts.size() == 2);
}

TEST_CASE("summarize: counts are conserved") {
  const auto data = planted_dataset(500, 12);
  const auto report = summarize(data);
  CHECK(report.entries.size() == 2 * kFeatureCount);
  for (const auto& e : report.entries) {
    CHECK(e.retained + e.removed == e.total);
    std::size_t binned = 0;
    for (auto c : e.histogram.counts) binned += c;
    CHECK(binned == e.retained);
  }
  std::ostringstream tsv;
  report.write_tsv(tsv);
  CHECK(tsv.str().rfind("feature\tclass\tlower", 0) == 0);
}

TEST_CASE("summarize: an outlier is removed from its class only") {
  auto d = vc_dataset();
  d[0].features.vc = 1'000'000;  // a YES example
  const auto report = summarize(d);
  CHECK(report.at(Feature::vc, Label::yes).removed == 1);
  CHECK(report.at(Feature::vc, Label::no).removed == 0);
}

TEST_CASE("summarize: one class warns") {
  Dataset d = vc_dataset();
  std::erase_if(d, [](const LabeledExample& e) { return e.label == Label::no; });
  const auto report = summarize(d);
  CHECK(std::find(report.warnings.begin(), report.warnings.end(), "class NO is empty") != report.warnings.end());
  CHECK(report.at(Feature::vc, Label::no).total == 0);
  CHECK_THROWS_AS(summarize(Dataset{}), std::invalid_argument);
}

TEST_CASE("dataset file round trip") {
  TempDir dir;
  auto data = planted_dataset(50, 3);
  for (auto& e : data) e.features.ssvc = round_significant(e.features.ssvc);
  const auto path = (dir.path / "dataset.jsonl").string();
  write_dataset(path, data);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(nlohmann::json::parse(header).contains("meta"));
  CHECK(read_dataset(path) == data);
}

TEST_CASE("outlier filtering for training is opt-in and drops extreme rows") {
  auto data = planted_dataset(200, 9);
  data[0].features.vc = 100'000'000;
  const auto kept = filter_outliers(data);
  CHECK(kept.size() < data.size());
  CHECK(std::none_of(kept.begin(), kept.end(), [](const LabeledExample& e) { return e.question_id == 1; }));
}
