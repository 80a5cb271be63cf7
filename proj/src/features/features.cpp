#include "postforge/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace postforge {

using nlohmann::json;

std::string_view feature_name(Feature f) { return kFeatureNames[index_of(f)]; }

Feature feature_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    if (kFeatureNames[i] == name) return static_cast<Feature>(i);
  }
  throw std::invalid_argument("unknown feature: " + std::string(name));
}

FeatureArray FeatureVector::to_array() const {
  return {haa ? 1.0 : 0.0,          static_cast<double>(ac), static_cast<double>(s),
          static_cast<double>(sas), static_cast<double>(vc), ssvc,
          static_cast<double>(cc),  static_cast<double>(fc), acc,
          aar,                      static_cast<double>(ar)};
}

FeatureVector FeatureVector::from_array(const FeatureArray& v) {
  FeatureVector fv;
  fv.haa = v[0] >= 0.5;
  fv.ac = std::llround(v[1]);
  fv.s = std::llround(v[2]);
  fv.sas = std::llround(v[3]);
  fv.vc = std::llround(v[4]);
  fv.ssvc = v[5];
  fv.cc = std::llround(v[6]);
  fv.fc = std::llround(v[7]);
  fv.acc = v[8];
  fv.aar = v[9];
  fv.ar = std::llround(v[10]);
  return fv;
}

FeatureVector extract_features(const QuestionRecord& q) {
  FeatureVector fv;
  fv.ac = static_cast<std::int64_t>(q.answers.size());
  // Presence of the id, as the API exposes it; a question with no answers
  // cannot have an accepted one.
  fv.haa = q.accepted_answer_id.has_value() && fv.ac > 0;
  fv.s = q.score;
  fv.vc = q.view_count;
  fv.cc = q.comment_count;
  fv.fc = q.favorite_count;
  fv.ar = q.asker_reputation;

  std::int64_t comment_sum = 0;
  std::int64_t reputation_sum = 0;
  for (const auto& a : q.answers) {
    fv.sas += a.score;
    comment_sum += a.comment_count;
    reputation_sum += a.answerer_reputation;
  }
  if (fv.ac > 0) {
    fv.acc = static_cast<double>(comment_sum) / static_cast<double>(fv.ac);
    fv.aar = static_cast<double>(reputation_sum) / static_cast<double>(fv.ac);
  } else {
    fv.degenerate |= kNoAnswers;
  }
  if (fv.vc > 0) {
    fv.ssvc = static_cast<double>(fv.sas) / static_cast<double>(fv.vc);
  } else {
    fv.degenerate |= kNoViews;
  }
  return fv;
}

std::string_view to_string(Label label) { return label == Label::yes ? "YES" : "NO"; }

Label label_from_string(std::string_view text) {
  if (text == "YES" || text == "yes" || text == "Y" || text == "1") return Label::yes;
  if (text == "NO" || text == "no" || text == "N" || text == "0") return Label::no;
  throw std::invalid_argument("bad label: " + std::string(text));
}

std::string_view to_string(LabelDecision d) {
  switch (d) {
    case LabelDecision::yes: return "YES";
    case LabelDecision::no: return "NO";
    case LabelDecision::needs_review: return "NEEDS_REVIEW";
  }
  return "?";
}

LabelDecision aggregate_labels(const VoteSheet& sheet) {
  if (sheet.votes.size() < 3) throw std::invalid_argument("unresolvable sheet");
  const auto yes = std::count(sheet.votes.begin(), sheet.votes.end(), Label::yes);
  if (yes == static_cast<std::ptrdiff_t>(sheet.votes.size())) return LabelDecision::yes;
  if (yes == 0) return LabelDecision::no;
  return LabelDecision::needs_review;
}

std::optional<Label> resolve_label(const VoteSheet& sheet) {
  switch (aggregate_labels(sheet)) {
    case LabelDecision::yes: return Label::yes;
    case LabelDecision::no: return Label::no;
    case LabelDecision::needs_review: return sheet.override_label;
  }
  return std::nullopt;
}

std::vector<VoteSheet> read_vote_sheets(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open votes file " + path);
  std::vector<VoteSheet> sheets;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const json j = json::parse(line);
    VoteSheet sheet;
    sheet.question_id = j.at("question_id").get<std::int64_t>();
    for (const auto& v : j.at("votes")) sheet.votes.push_back(label_from_string(v.get<std::string>()));
    if (auto it = j.find("override"); it != j.end() && !it->is_null()) {
      sheet.override_label = label_from_string(it->get<std::string>());
    }
    for (const auto& n : j.value("criteria", json::array())) {
      CriteriaNotes notes;
      auto read = [&](const char* key, std::optional<bool>& field) {
        if (n.contains(key)) field = n.at(key).get<bool>();
      };
      read("completeness", notes.complete);
      read("conciseness", notes.concise);
      read("correctness", notes.correct);
      read("comprehensibility", notes.comprehensible);
      sheet.notes.push_back(notes);
    }
    sheets.push_back(std::move(sheet));
  }
  return sheets;
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("quantile of empty list");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

Bounds iqr_bounds(std::span<const double> values, double factor) {
  if (values.size() < 4) throw std::invalid_argument("iqr_bounds needs at least 4 values");
  std::vector<double> v(values.begin(), values.end());
  const double q1 = quantile(v, 0.25);
  const double q3 = quantile(std::move(v), 0.75);
  const double iqr = q3 - q1;
  return {q1 - factor * iqr, q3 + factor * iqr};
}

const FeatureClassSummary& DistributionReport::at(Feature f, Label label) const {
  for (const auto& e : entries) {
    if (e.feature == f && e.label == label) return e;
  }
  throw std::out_of_range("no summary entry");
}

void DistributionReport::write_tsv(std::ostream& out) const {
  out << "feature\tclass\tlower\tupper\ttotal\tretained\tremoved\tbin_lo\tbin_hi\tcount\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return std::string(buf);
  };
  for (const auto& e : entries) {
    const std::string lower = e.bounds ? num(e.bounds->lower) : "NA";
    const std::string upper = e.bounds ? num(e.bounds->upper) : "NA";
    for (std::size_t b = 0; b < e.histogram.counts.size(); ++b) {
      out << feature_name(e.feature) << '\t' << to_string(e.label) << '\t' << lower << '\t' << upper
          << '\t' << e.total << '\t' << e.retained << '\t' << e.removed << '\t'
          << num(e.histogram.edges[b]) << '\t' << num(e.histogram.edges[b + 1]) << '\t'
          << e.histogram.counts[b] << '\n';
    }
  }
}

DistributionReport summarize(std::span<const LabeledExample> dataset, double factor, std::size_t bins) {
  if (dataset.empty()) throw std::invalid_argument("summarize needs a non-empty dataset");
  if (bins == 0) throw std::invalid_argument("bins must be positive");
  DistributionReport report;
  for (Label label : {Label::yes, Label::no}) {
    const bool present = std::any_of(dataset.begin(), dataset.end(),
                                     [&](const LabeledExample& e) { return e.label == label; });
    if (!present) report.warnings.push_back("class " + std::string(to_string(label)) + " is empty");
  }

  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    const auto feature = static_cast<Feature>(f);
    FeatureClassSummary per_class[2];
    std::vector<double> retained[2];
    for (int c = 0; c < 2; ++c) {
      const Label label = c == 0 ? Label::yes : Label::no;
      std::vector<double> values;
      for (const auto& e : dataset) {
        if (e.label == label) values.push_back(e.features.to_array()[f]);
      }
      auto& summary = per_class[c];
      summary.feature = feature;
      summary.label = label;
      summary.total = values.size();
      if (values.size() >= 4) {
        summary.bounds = iqr_bounds(values, factor);
        for (double v : values) {
          if (summary.bounds->contains(v)) retained[c].push_back(v);
        }
      } else {
        if (!values.empty()) {
          report.warnings.push_back(std::string(feature_name(feature)) + "/" +
                                    std::string(to_string(label)) +
                                    ": fewer than 4 values, outliers not removed");
        }
        retained[c] = values;
      }
      summary.retained = retained[c].size();
      summary.removed = summary.total - summary.retained;
    }

    std::vector<double> edges;
    if (feature == Feature::haa) {
      edges = {0.0, 0.5, 1.0};
    } else {
      double lo = 0.0;
      double hi = 0.0;
      bool any = false;
      for (const auto& r : retained) {
        for (double v : r) {
          lo = any ? std::min(lo, v) : v;
          hi = any ? std::max(hi, v) : v;
          any = true;
        }
      }
      if (!any || lo == hi) {
        edges = {lo, hi};
      } else {
        for (std::size_t b = 0; b <= bins; ++b) {
          edges.push_back(b == bins ? hi : lo + (hi - lo) * static_cast<double>(b) / static_cast<double>(bins));
        }
      }
    }
    const std::size_t bin_count = edges.size() - 1;
    for (int c = 0; c < 2; ++c) {
      auto& hist = per_class[c].histogram;
      hist.edges = edges;
      hist.counts.assign(bin_count, 0);
      for (double v : retained[c]) {
        std::size_t b = 0;
        if (edges.back() > edges.front()) {
          const double t = (v - edges.front()) / (edges.back() - edges.front());
          b = std::min(bin_count - 1, static_cast<std::size_t>(std::floor(t * static_cast<double>(bin_count))));
        }
        ++hist.counts[b];
      }
      report.entries.push_back(std::move(per_class[c]));
    }
  }
  return report;
}

Dataset filter_outliers(std::span<const LabeledExample> dataset, double factor) {
  if (dataset.size() < 4) return Dataset(dataset.begin(), dataset.end());
  std::array<Bounds, kFeatureCount> bounds;
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    std::vector<double> values;
    values.reserve(dataset.size());
    for (const auto& e : dataset) values.push_back(e.features.to_array()[f]);
    bounds[f] = iqr_bounds(values, factor);
  }
  Dataset out;
  for (const auto& e : dataset) {
    const auto x = e.features.to_array();
    bool keep = true;
    // HAA is boolean; IQR filtering is meaningless for it.
    for (std::size_t f = 1; f < kFeatureCount && keep; ++f) keep = bounds[f].contains(x[f]);
    if (keep) out.push_back(e);
  }
  return out;
}

double round_significant(double value, int digits) {
  if (value == 0.0 || !std::isfinite(value)) return value;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, value);
  return std::strtod(buf, nullptr);
}

void to_json(json& j, const FeatureVector& fv) {
  j = json{{"haa", fv.haa}, {"ac", fv.ac},   {"s", fv.s},     {"sas", fv.sas},
           {"vc", fv.vc},   {"ssvc", round_significant(fv.ssvc)},   {"cc", fv.cc},
           {"fc", fv.fc},   {"acc", fv.acc}, {"aar", fv.aar}, {"ar", fv.ar}};
  if (fv.degenerate != 0) j["degenerate"] = fv.degenerate;
}

void from_json(const json& j, FeatureVector& fv) {
  const auto& haa = j.at("haa");
  fv.haa = haa.is_boolean() ? haa.get<bool>() : haa.get<double>() >= 0.5;
  j.at("ac").get_to(fv.ac);
  j.at("s").get_to(fv.s);
  j.at("sas").get_to(fv.sas);
  j.at("vc").get_to(fv.vc);
  j.at("ssvc").get_to(fv.ssvc);
  j.at("cc").get_to(fv.cc);
  j.at("fc").get_to(fv.fc);
  j.at("acc").get_to(fv.acc);
  j.at("aar").get_to(fv.aar);
  j.at("ar").get_to(fv.ar);
  fv.degenerate = j.value("degenerate", std::uint8_t{0});
}

void to_json(json& j, const LabeledExample& e) {
  j = json(e.features);
  j["question_id"] = e.question_id;
  j["label"] = to_string(e.label);
  j["provenance"] = e.provenance == Provenance::manual ? "manual" : "synthetic";
}

void from_json(const json& j, LabeledExample& e) {
  e.question_id = j.value("question_id", std::int64_t{0});
  e.features = j.get<FeatureVector>();
  e.label = label_from_string(j.at("label").get<std::string>());
  e.provenance = j.value("provenance", std::string{"manual"}) == "synthetic" ? Provenance::synthetic
                                                                           : Provenance::manual;
}

void write_dataset(const std::string& path, std::span<const LabeledExample> dataset) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write dataset " + path);
  json meta = {{"format", "postforge-dataset/1"},
               {"fields", kFeatureNames},
               {"positive_class", "YES"},
               {"aar", "answerer reputation at collection time"},
               {"zero_answer_convention", "acc=aar=sas=0 when ac=0; ssvc=0 when vc=0"}};
  out << json{{"meta", meta}}.dump() << '\n';
  for (const auto& e : dataset) out << json(e).dump() << '\n';
}

Dataset read_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset " + path);
  Dataset out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const json j = json::parse(line);
    if (j.contains("meta")) continue;
    out.push_back(j.get<LabeledExample>());
  }
  return out;
}

}  // namespace postforge
