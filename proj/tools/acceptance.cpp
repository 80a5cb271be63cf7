// Acceptance checks. Prints one PASS, FAIL or SKIP line per criterion and
// exits non-zero if any check fails.

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "postforge/clones.hpp"
#include "postforge/draft.hpp"
#include "postforge/matcher.hpp"
#include "postforge/metrics.hpp"
#include "postforge/mlp.hpp"
#include "postforge/pipeline.hpp"
#include "postforge/selection.hpp"
#include "postforge/slicing.hpp"
#include "postforge/svm.hpp"
#include "postforge/tree.hpp"
#include "support/oracles.hpp"
#include "support/programs.hpp"
#include "support/service_fixture.hpp"
#include "support/synthetic.hpp"
#include "support/transcript.hpp"

using namespace postforge;
using namespace postforge::testing;

namespace {

enum class Status { pass, fail, skip };

struct Outcome {
  Status status = Status::pass;
  std::string detail;
};

Outcome verdict(bool ok, std::string detail) { return {ok ? Status::pass : Status::fail, std::move(detail)}; }

std::string fmt(double v, int digits = 4) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

std::string sci(double v) {
  std::ostringstream s;
  s << std::scientific << std::setprecision(2) << v;
  return s.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const char* labeled_dataset() {
  const char* p = std::getenv("POSTFORGE_LABELED_DATASET");
  return p && *p ? p : nullptr;
}

std::vector<std::pair<Label, Label>> from_counts(const Confusion& c) {
  std::vector<std::pair<Label, Label>> out;
  for (int i = 0; i < c.tp; ++i) out.emplace_back(Label::yes, Label::yes);
  for (int i = 0; i < c.fp; ++i) out.emplace_back(Label::yes, Label::no);
  for (int i = 0; i < c.fn; ++i) out.emplace_back(Label::no, Label::yes);
  for (int i = 0; i < c.tn; ++i) out.emplace_back(Label::no, Label::no);
  return out;
}

EvalMetrics score(const DecisionTreeModel& tree, const Dataset& test) {
  std::vector<std::pair<Label, Label>> pairs;
  for (const auto& e : test) pairs.emplace_back(tree.predict(e.features).label, e.label);
  return evaluate(pairs);
}

// ---- classification -------------------------------------------------------

Outcome labeled_precision_recall() {
  const char* path = labeled_dataset();
  if (!path) return {Status::skip, "labeled dataset not available (set POSTFORGE_LABELED_DATASET); replaced by the synthetic oracle"};
  const auto t0 = std::chrono::steady_clock::now();
  const Dataset data = read_dataset(path);
  double precision = 0;
  double recall = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto [train, test] = split_dataset(data, 0.8, seed);
    const auto m = score(train_tree(train, 0.012), test);
    if (!m.precision || !m.recall) return {Status::fail, "undefined precision or recall at seed " + std::to_string(seed)};
    precision += *m.precision / 10;
    recall += *m.recall / 10;
  }
  const double took = seconds_since(t0);
  const bool ok = std::abs(precision * 100 - 94.5) <= 3 && std::abs(recall * 100 - 90.3) <= 3 && took < 60;
  return verdict(ok, "mean precision " + fmt(precision * 100, 1) + " (94.5 +/- 3), mean recall " + fmt(recall * 100, 1) +
                         " (90.3 +/- 3), " + fmt(took, 1) + " s");
}

Outcome synthetic_oracle() {
  const Dataset data = planted_dataset(3000, 1, 0.05);
  const auto [train, test] = split_dataset(data, 0.8, 1);
  const auto tree = train_tree(train, 0.012);
  std::size_t hits = 0;
  for (const auto& e : test) hits += tree.predict(e.features).label == e.label ? 1 : 0;
  const double acc = static_cast<double>(hits) / static_cast<double>(test.size());
  const double rule = rule_accuracy(test);

  const nlohmann::json serialized = tree;
  std::mt19937_64 rng(99);
  int agree = 0;
  const int probes = 10'000;
  for (int i = 0; i < probes; ++i) {
    const FeatureVector fv = random_vector(rng);
    agree += tree.predict(fv).label == walk_json(serialized, fv) ? 1 : 0;
  }
  return verdict(acc >= rule - 0.03 && agree == probes, "test accuracy " + fmt(acc) + " vs rule " + fmt(rule) +
                                                             " - 0.03; path walker agrees on " + std::to_string(agree) +
                                                             "/" + std::to_string(probes));
}

Outcome metric_identities() {
  const double tol = 1e-9;
  bool ok = true;
  auto near = [&](const std::optional<double>& got, double want) {
    ok = ok && got && std::abs(*got - want) <= tol;
  };
  const auto m = evaluate(from_counts({3, 1, 2, 4}));
  ok = ok && m.confusion == Confusion{3, 1, 2, 4};
  near(m.precision, 0.75);
  near(m.recall, 0.6);
  near(m.kappa, 0.4);
  near(m.f1, 2.0 / 3.0);
  near(m.specificity, 0.8);
  near(m.accuracy, 0.7);
  near(m.balanced_accuracy, 0.7);

  const auto perfect = evaluate(from_counts({5, 0, 0, 5}));
  near(perfect.precision, 1.0);
  near(perfect.recall, 1.0);
  near(perfect.kappa, 1.0);

  // No positive predictions: precision is undefined, not zero.
  const auto none = evaluate(from_counts({0, 0, 3, 7}));
  ok = ok && !none.precision && !none.f1;
  near(none.recall, 0.0);
  return verdict(ok, "tp=3 fp=1 fn=2 tn=4 gives precision " + fmt(m.precision.value_or(-1), 6) + ", recall " +
                         fmt(m.recall.value_or(-1), 6) + ", kappa " + fmt(m.kappa.value_or(-1), 6) + " (tol 1e-9)");
}

Outcome feature_extraction() {
  std::mt19937_64 rng(2024);
  int exact = 0;
  int zero_answers = 0;
  int zero_views = 0;
  const int n = 1000;
  for (std::int64_t id = 1; id <= n; ++id) {
    const auto q = random_question(rng, id);
    const auto fv = extract_features(q);
    exact += fv == feature_oracle(q) ? 1 : 0;
    zero_answers += q.answers.empty() ? 1 : 0;
    zero_views += q.view_count == 0 ? 1 : 0;
  }
  // Degenerate corners on top of the random ones.
  QuestionRecord bare;
  bare.question_id = 1;
  bare.accepted_answer_id = 9;
  normalize(bare);
  const bool corners = extract_features(bare) == feature_oracle(bare) && !extract_features(bare).haa;
  return verdict(exact == n && zero_answers > 0 && corners,
                 std::to_string(exact) + "/" + std::to_string(n) + " exact, " + std::to_string(zero_answers) +
                     " with no answers, " + std::to_string(zero_views) + " with no views");
}

// ---- assignment -----------------------------------------------------------

Outcome assignment_distribution() {
  const std::vector<ScoredCandidate> cands{{1, 0.6, {}}, {2, 0.5, {}}};
  const auto analytic = assignment_probabilities(cands);
  std::mt19937_64 rng(2024);
  const int n = 100'000;
  int first = 0;
  for (int i = 0; i < n; ++i) first += assign(cands, rng) == 1 ? 1 : 0;
  const double p1 = static_cast<double>(first) / n;
  const bool dist = std::abs(analytic[0] - 0.75) < 1e-12 && std::abs(analytic[1] - 0.25) < 1e-12 &&
                    std::abs(p1 - 0.75) <= 0.01 && std::abs((1 - p1) - 0.25) <= 0.01;

  // Fuzzed lists: zeros mixed in, at least one similarity >= 0.01.
  std::mt19937_64 fuzz(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int lists = 0;
  bool valid = true;
  for (; lists < 2000; ++lists) {
    const int len = std::uniform_int_distribution<int>(1, 30)(fuzz);
    std::vector<ScoredCandidate> v;
    for (int i = 0; i < len; ++i) {
      const double r = u(fuzz);
      v.push_back({i + 1, r < 0.3 ? 0.0 : r < 0.6 ? 0.01 * u(fuzz) : u(fuzz), {}});
    }
    v[static_cast<std::size_t>(std::uniform_int_distribution<int>(0, len - 1)(fuzz))].similarity =
        0.01 + 0.99 * u(fuzz) * (u(fuzz) < 0.5 ? 0.0 : 1.0);
    for (int k = 0; k < 5; ++k) {
      const auto picked = assign(v, fuzz);
      const auto it = std::find_if(v.begin(), v.end(), [&](const auto& c) { return c.question_id == picked; });
      valid = valid && it != v.end() && it->similarity > 0;
    }
  }
  return verdict(dist && valid, "P(first) " + fmt(p1, 5) + " vs 0.75, P(second) " + fmt(1 - p1, 5) + " vs 0.25 over " +
                                    std::to_string(n) + " trials; " + std::to_string(lists) +
                                    " fuzzed lists terminated with a positive pick");
}

// ---- feature selection ----------------------------------------------------

Outcome feature_selection() {
  const FeatureMask plant = mask_of(std::vector<Feature>{Feature::haa, Feature::sas, Feature::ssvc});
  std::map<SelectionMethod, int> recovered;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Dataset d = planted_dataset(600, seed);
    TrainingConfig cfg = TrainingConfig::defaults();
    cfg.rng_seed = seed;
    for (auto method : {SelectionMethod::rfe, SelectionMethod::ga, SelectionMethod::sa}) {
      const auto s = select_features(d, method, cfg);
      recovered[method] += (mask_of(s.selected) & plant) == plant ? 1 : 0;
    }
  }
  bool ok = true;
  std::string detail;
  for (const auto& [method, hits] : recovered) {
    ok = ok && hits >= 9;
    detail += (detail.empty() ? "" : ", ") + std::string(to_string(method)) + " " + std::to_string(hits) + "/10";
  }
  return verdict(ok, detail + " seeds keep {haa, ssvc, sas}");
}

Outcome feature_selection_labeled() {
  const char* path = labeled_dataset();
  if (!path) return {Status::skip, "labeled dataset not available (set POSTFORGE_LABELED_DATASET)"};
  const Dataset data = read_dataset(path);
  const auto [train, test] = split_dataset(data, 0.8, 1);
  const std::vector<Feature> want = {Feature::sas, Feature::vc, Feature::haa, Feature::ssvc, Feature::ac};
  bool ok = true;
  std::string detail;
  for (auto method : {SelectionMethod::rfe, SelectionMethod::ga, SelectionMethod::sa}) {
    const auto s = select_features(train, method, TrainingConfig::defaults());
    ok = ok && mask_of(s.selected) == mask_of(want);
    detail += (detail.empty() ? "" : "; ") + std::string(to_string(method)) + " {";
    for (std::size_t i = 0; i < s.selected.size(); ++i) detail += (i ? ", " : "") + std::string(feature_name(s.selected[i]));
    detail += "}";
  }
  return verdict(ok, detail + " vs {sas, vc, haa, ssvc, ac}");
}

// ---- numerics -------------------------------------------------------------

Outcome mlp_svm_numerics() {
  const Dataset d = planted_dataset(5, 3, 0.0);
  TrainingConfig cfg = TrainingConfig::defaults();
  cfg.mlp.max_epochs = 0;
  double worst_grad = 0.0;
  for (int hidden : {0, 3, 8}) {
    MlpModel model = train_mlp(d, hidden, cfg);
    std::mt19937_64 rng(static_cast<std::uint64_t>(hidden) + 10);
    std::normal_distribution<double> normal(0.0, 0.7);
    std::vector<double> params = model.parameters();
    for (double& p : params) p = normal(rng);
    model.set_parameters(params);
    std::vector<std::vector<double>> inputs;
    std::vector<Label> labels;
    for (const auto& e : d) {
      inputs.push_back(model.scaler.transform(e.features));
      labels.push_back(e.label);
    }
    std::vector<double> analytic;
    std::vector<double> scratch;
    mlp_loss_gradient(model, inputs, labels, analytic);
    for (std::size_t k = 0; k < params.size(); ++k) {
      const double h = 1e-5;
      auto shifted = params;
      shifted[k] = params[k] + h;
      model.set_parameters(shifted);
      const double up = mlp_loss_gradient(model, inputs, labels, scratch);
      shifted[k] = params[k] - h;
      model.set_parameters(shifted);
      const double down = mlp_loss_gradient(model, inputs, labels, scratch);
      const double numeric = (up - down) / (2 * h);
      if (std::abs(analytic[k]) + std::abs(numeric) > 1e-7) worst_grad = std::max(worst_grad, relative_error(analytic[k], numeric));
    }
  }

  const Dataset points = planted_dataset(50, 12, 0.1);
  double worst_kkt = 0.0;
  for (const auto& [gamma, cost] : {std::pair{1.0 / 32.0, 262144.0}, std::pair{0.25, 1.0}, std::pair{0.5, 16.0}}) {
    SvmParams p;
    p.gamma = gamma;
    p.cost = cost;
    const auto fit = fit_svm(points, p);
    worst_kkt = std::max({worst_kkt, fit.kkt_residual, kkt_violation(fit, points)});
  }
  return verdict(worst_grad < 1e-4 && worst_kkt < 1e-3,
                 "mlp max relative gradient error " + sci(worst_grad) + " (< 1e-4); svm KKT residual " + sci(worst_kkt) +
                     " on 50 points (< 1e-3)");
}

// ---- clones and slicing ---------------------------------------------------

std::string join(const std::vector<std::string>& lines, std::size_t from, std::size_t to, const std::string& indent = "") {
  std::string out;
  for (std::size_t i = from; i < to; ++i) out += indent + lines[i] + "\n";
  return out;
}

CorpusFile corpus_file(const std::string& path, std::string text) {
  CorpusFile f;
  f.path = path;
  f.text = std::move(text);
  f.tokens = lex(f.text, path);
  return f;
}

Outcome clone_slice_suite() {
  const auto t0 = std::chrono::steady_clock::now();
  int exact_found = 0;
  int exact_total = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const std::size_t len = 6 + seed % 8;  // 6..13 lines, never below min_lines
    const auto block = random_method(seed, static_cast<int>(len), "v", "op");
    const auto filler = random_method(seed + 1000, 12, "f", "aux");
    const std::string corpus_text = join(filler.lines, 0, 5) + join(block.lines, 0, len, "    ") + join(filler.lines, 5, 12);
    const std::string needle = "int q = 0;\n" + join(block.lines, 0, len, "\t") + "q++;\n";
    const std::vector<TokenStream> corpus{lex(corpus_text, "A.java")};
    const auto m = detect_clones(lex(needle), corpus, 6, false);
    ++exact_total;
    exact_found += !m.empty() && m[0].length_lines == static_cast<int>(len) &&
                   m[0].corpus_range == LineRange{6, 5 + static_cast<int>(len)};
  }

  int renamed_found = 0;
  int renamed_total = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto original = random_method(seed, 8, "v", "op");
    const auto renamed = random_method(seed, 8, "w", "fn");
    const std::vector<TokenStream> corpus{lex(join(original.lines, 0, 8), "A.java")};
    const auto m = detect_clones(lex(join(renamed.lines, 0, 8)), corpus, 6, true);
    ++renamed_total;
    renamed_found += !m.empty() && m[0].length_lines == 8 && m[0].normalized;
  }

  // Slices on random statement graphs against transitive closure.
  std::mt19937_64 rng(99);
  int graphs_ok = 0;
  const int graphs = 200;
  for (int trial = 0; trial < graphs; ++trial) {
    const int n = std::uniform_int_distribution<int>(1, 25)(rng);
    const double p = std::uniform_real_distribution<double>(0.0, 0.4)(rng);
    std::vector<std::pair<int, int>> edges;
    for (int a = 1; a <= n; ++a)
      for (int b = a + 1; b <= n; ++b)
        if (std::bernoulli_distribution(p)(rng)) edges.emplace_back(a, b);
    StatementGraph g;
    for (int i = 1; i <= n; ++i) {
      Statement s;
      s.id = i;
      g.statements.push_back(s);
    }
    g.edges = edges;
    const auto reach = transitive(n, edges);
    std::set<int> seeds;
    for (int i = 1; i <= n; ++i)
      if (std::bernoulli_distribution(0.2)(rng)) seeds.insert(i);
    if (seeds.empty()) seeds.insert(n);
    std::set<int> want_back;
    std::set<int> want_fwd;
    for (int i = 1; i <= n; ++i) {
      for (int s : seeds) {
        if (reach[i][s]) want_back.insert(i);
        if (reach[s][i]) want_fwd.insert(i);
      }
    }
    const auto back = backward_slice(g, seeds);
    const auto fwd = forward_slice(g, seeds);
    bool ok = back == want_back && fwd == want_fwd;
    for (auto [a, b] : edges) ok = ok && (!back.count(b) || back.count(a)) && (!fwd.count(a) || fwd.count(b));
    std::set<int> more = seeds;
    more.insert(std::uniform_int_distribution<int>(1, n)(rng));
    const auto back_more = backward_slice(g, more);
    const auto fwd_more = forward_slice(g, more);
    ok = ok && std::includes(back_more.begin(), back_more.end(), back.begin(), back.end()) &&
         std::includes(fwd_more.begin(), fwd_more.end(), fwd.begin(), fwd.end());
    graphs_ok += ok;
  }

  // End to end: drafts from generated programs equal the dependence closure.
  int drafts_ok = 0;
  const int programs = 100;
  std::mt19937_64 pick(5);
  for (std::uint64_t seed = 1; seed <= static_cast<std::uint64_t>(programs); ++seed) {
    const auto m = random_method(seed, 20, "v", "op");
    const auto other = random_method(seed + 5000, 12, "u", "aux");
    const Corpus corpus{corpus_file("a/Noise.java", wrap_in_class("Noise", other.lines)),
                        corpus_file("b/Gen.java", wrap_in_class("Gen", m.lines))};
    const int len = std::uniform_int_distribution<int>(6, 10)(pick);
    const int start = std::uniform_int_distribution<int>(0, 20 - len)(pick);
    QuestionRecord q;
    q.question_id = 77;
    std::string window;
    for (int i = start; i < start + len; ++i) window += (i > start ? "\n" : "") + m.lines[static_cast<std::size_t>(i)];
    q.code_blocks = {window};
    const auto out = draft_for_question(q, corpus, 6, false, kNow);
    std::set<int> seeds;
    for (int i = start; i < start + len; ++i) seeds.insert(i);
    std::string want;
    bool first = true;
    for (int i : closure(m, seeds)) {
      want += (first ? "" : "\n") + m.lines[static_cast<std::size_t>(i)];
      first = false;
    }
    const auto* d = std::get_if<DraftAnswer>(&out);
    drafts_ok += d && d->snippet == want;
  }

  const double took = seconds_since(t0);
  const bool ok = exact_found == exact_total && renamed_found == renamed_total && graphs_ok == graphs &&
                  drafts_ok == programs && took < 120;
  return verdict(ok, "exact clones " + std::to_string(exact_found) + "/" + std::to_string(exact_total) +
                         ", renamed under normalization " + std::to_string(renamed_found) + "/" +
                         std::to_string(renamed_total) + ", slice graphs " + std::to_string(graphs_ok) + "/" +
                         std::to_string(graphs) + ", closure drafts " + std::to_string(drafts_ok) + "/" +
                         std::to_string(programs) + ", " + fmt(took, 2) + " s (< 120)");
}

// ---- end to end -----------------------------------------------------------

Outcome determinism() {
  std::vector<std::string> sessions;
  for (int run = 0; run < 3; ++run) {
    Workspace ws(twenty_posts());
    const auto r = run_pipeline(ws.cfg, ws.inputs(), kNow);
    const auto* s = std::get_if<AssignmentSession>(&r.outcome);
    if (!s) return {Status::fail, "run " + std::to_string(run + 1) + " assigned nothing"};
    sessions.push_back(nlohmann::json(*s).dump());
  }
  std::ifstream in(golden_transcript_path());
  if (!in) return {Status::fail, "missing " + golden_transcript_path().string()};
  std::ostringstream golden;
  golden << in.rdbuf();
  int transcripts = 0;
  for (int run = 0; run < 3; ++run) transcripts += scripted_transcript() == golden.str();
  const bool same = sessions[0] == sessions[1] && sessions[1] == sessions[2];
  return verdict(same && transcripts == 3, std::string(same ? "identical" : "differing") +
                                               " sessions over 3 runs; golden transcript matched " +
                                               std::to_string(transcripts) + "/3");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> checks = {
      {"labeled-dataset-precision-recall", labeled_precision_recall},
      {"synthetic-oracle-classification", synthetic_oracle},
      {"metric-identities", metric_identities},
      {"feature-extraction-oracle", feature_extraction},
      {"assignment-distribution", assignment_distribution},
      {"feature-selection-planted", feature_selection},
      {"feature-selection-labeled-dataset", feature_selection_labeled},
      {"mlp-gradient-svm-kkt", mlp_svm_numerics},
      {"clone-slice-suite", clone_slice_suite},
      {"end-to-end-determinism", determinism},
  };
  int failed = 0;
  for (const auto& [name, check] : checks) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {Status::fail, std::string("threw: ") + e.what()};
    }
    const char* tag = o.status == Status::pass ? "PASS" : o.status == Status::fail ? "FAIL" : "SKIP";
    failed += o.status == Status::fail;
    std::cout << tag << " " << name << ": " << o.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
