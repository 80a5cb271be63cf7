#include <doctest.h>

#include <algorithm>

#include "postforge/selection.hpp"
#include "support/synthetic.hpp"

using namespace postforge;

namespace {

bool contains_plant(const FeatureSubset& s) {
  const FeatureMask plant = mask_of(std::vector<Feature>{Feature::haa, Feature::sas, Feature::ssvc});
  return (mask_of(s.selected) & plant) == plant;
}

}  // namespace

TEST_CASE("masks and names") {
  const std::vector<Feature> f = {Feature::ac, Feature::ar};
  CHECK(features_of(mask_of(f)) == f);
  CHECK(selection_method_from_string("ga") == SelectionMethod::ga);
  CHECK(to_string(SelectionMethod::sa) == "sa");
  CHECK_THROWS(selection_method_from_string("pso"));
}

TEST_CASE("rfe never keeps a constant feature") {
  // One informative feature (vc) and one constant feature (fc).
  Dataset d;
  for (int i = 0; i < 200; ++i) {
    LabeledExample e;
    e.features.vc = i;
    e.features.fc = 3;
    e.label = (i % 50) < 25 ? Label::yes : Label::no;
    d.push_back(e);
  }
  const std::vector<Feature> candidates = {Feature::vc, Feature::fc};
  const auto s = select_features(d, SelectionMethod::rfe, TrainingConfig::defaults(), candidates);
  CHECK(s.selected == std::vector<Feature>{Feature::vc});
}

TEST_CASE("each wrapper keeps the planted features") {
  const Dataset d = testing::planted_dataset(600, 8);
  for (auto method : {SelectionMethod::rfe, SelectionMethod::ga, SelectionMethod::sa}) {
    CAPTURE(to_string(method));
    const auto s = select_features(d, method, TrainingConfig::defaults());
    CHECK(contains_plant(s));
    CHECK(s.cv_score.has_value());
    CHECK(!s.selected.empty());
  }
}

TEST_CASE("selection is deterministic for a seed") {
  const Dataset d = testing::planted_dataset(300, 3);
  const auto cfg = TrainingConfig::defaults();
  const auto a = select_features(d, SelectionMethod::ga, cfg);
  const auto b = select_features(d, SelectionMethod::ga, cfg);
  CHECK(a.selected == b.selected);
  CHECK(a.cv_score == b.cv_score);
}

TEST_CASE("selection preconditions") {
  const Dataset d = testing::planted_dataset(50, 3);
  const std::vector<Feature> one = {Feature::ac};
  CHECK_THROWS(select_features(d, SelectionMethod::rfe, TrainingConfig::defaults(), one));
}
