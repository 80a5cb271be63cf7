// postforge command line: one subcommand per stage of the loop.

#include <CLI11.hpp>

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <thread>

#include "postforge/api.hpp"
#include "postforge/draft.hpp"
#include "postforge/features.hpp"
#include "postforge/ingest.hpp"
#include "postforge/matcher.hpp"
#include "postforge/model.hpp"
#include "postforge/pipeline.hpp"
#include "postforge/selection.hpp"
#include "postforge/service.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace postforge;

namespace {

std::string env_or_empty(const char* name) {
  const char* v = std::getenv(name);
  return v ? v : "";
}

std::vector<Feature> parse_feature_list(const std::string& text) {
  std::vector<Feature> out;
  std::stringstream ss(text);
  std::string name;
  while (std::getline(ss, name, ',')) {
    if (!name.empty()) out.push_back(feature_from_name(name));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::string feature_list(std::span<const Feature> features) {
  std::string out;
  for (Feature f : features) out += (out.empty() ? "" : ",") + std::string(feature_name(f));
  return out;
}

std::string fmt(const std::optional<double>& v) {
  if (!v) return "undefined";
  std::ostringstream out;
  out.precision(4);
  out << std::fixed << *v;
  return out.str();
}

// ---- ingest ---------------------------------------------------------------

struct IngestArgs {
  std::string source = "dump";
  std::string dump;
  std::string tag;
  std::string from = "2008-01-01";
  std::string to = "2100-01-01";
  std::string out;
  int pages = 10;
  int page_size = 100;
  double per_minute = 25;
};

int run_ingest(const IngestArgs& a) {
  FetchRequest req;
  req.tag = a.tag;
  req.from = parse_timestamp(a.from);
  req.to = parse_timestamp(a.to);
  req.page_limit = a.pages;
  req.page_size = a.page_size;
  Store store(a.out);
  IngestReport report;
  std::vector<QuestionRecord> got;
  if (a.source == "dump") {
    if (a.dump.empty()) throw std::invalid_argument("--dump is required with --source dump");
    got = fetch_questions(req, DumpSource{a.dump}, store, report);
  } else {
    ApiConfig cfg;
    cfg.key = env_or_empty("POSTFORGE_SE_KEY");
    cfg.requests_per_minute = a.per_minute;
    StackExchangeClient client(
        cfg, make_https_get(), [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); },
        [] { return std::chrono::steady_clock::now(); });
    got = fetch_questions(req, ApiSource{&client}, store, report);
  }
  std::cout << report.summary() << "\n";
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
  std::cout << "store " << a.out << " now holds " << store.size() << " questions\n";
  return 0;
}

// ---- profile --------------------------------------------------------------

struct ProfileArgs {
  std::string tags;
  std::int64_t user = 0;
  int per_day = 1;
  std::string out;
};

int run_profile(const ProfileArgs& a) {
  ExpertiseProfile p;
  if (a.user > 0) {
    ApiConfig cfg;
    cfg.key = env_or_empty("POSTFORGE_SE_KEY");
    StackExchangeClient client(
        cfg, make_https_get(), [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); },
        [] { return std::chrono::steady_clock::now(); });
    for (const auto& t : client.fetch_user(a.user).top_tags) p.top_tags.insert(t);
  }
  std::stringstream ss(a.tags);
  std::string tag;
  while (std::getline(ss, tag, ',')) {
    if (!tag.empty()) p.top_tags.insert(tag);
  }
  p = json(p).get<ExpertiseProfile>();  // lowercases tags
  p.max_suggestions_per_day = a.per_day;
  p.validate();
  save_profile(a.out, p);
  std::cout << "top tags: ";
  for (const auto& t : p.top_tags) std::cout << t << " ";
  std::cout << "\n";
  return 0;
}

// ---- features -------------------------------------------------------------

struct FeaturesArgs {
  std::string store;
  std::string labels;
  std::string out;
  std::string summary;
};

int run_features(const FeaturesArgs& a) {
  const Store store(a.store);
  Dataset data;
  std::size_t unresolved = 0;
  std::size_t unknown = 0;
  std::size_t short_sheets = 0;
  for (const auto& sheet : read_vote_sheets(a.labels)) {
    std::optional<Label> label;
    try {
      label = resolve_label(sheet);
    } catch (const std::invalid_argument&) {
      ++short_sheets;
      continue;
    }
    if (!label) {
      ++unresolved;
      continue;
    }
    const auto q = store.get(sheet.question_id);
    if (!q) {
      ++unknown;
      continue;
    }
    data.push_back({q->question_id, extract_features(*q), *label, Provenance::manual});
  }
  write_dataset(a.out, data);
  std::cout << "examples=" << data.size() << " needs_review=" << unresolved << " fewer_than_three_votes=" << short_sheets
            << " not_in_store=" << unknown << "\n";
  if (!a.summary.empty() && !data.empty()) {
    const auto report = summarize(data);
    std::ofstream out(a.summary);
    report.write_tsv(out);
    for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
  }
  return 0;
}

// ---- split ----------------------------------------------------------------

struct SplitArgs {
  std::string dataset;
  double ratio = 0.8;
  std::uint64_t seed = 1;
  std::string train_out;
  std::string test_out;
};

int run_split(const SplitArgs& a) {
  const auto data = read_dataset(a.dataset);
  const auto [train, test] = split_dataset(data, a.ratio, a.seed);
  write_dataset(a.train_out, train);
  write_dataset(a.test_out, test);
  std::cout << "train=" << train.size() << " test=" << test.size() << "\n";
  return 0;
}

// ---- train / eval ---------------------------------------------------------

struct TrainArgs {
  std::string dataset;
  std::string kind = "dt";
  std::optional<double> cp;
  std::optional<int> hidden;
  std::optional<double> gamma;
  std::optional<double> cost;
  std::uint64_t seed = 1;
  std::string features;
  bool loocv = false;
  bool iqr_train = false;
  std::string out;
};

int run_train(const TrainArgs& a) {
  Dataset data = read_dataset(a.dataset);
  if (a.iqr_train) {
    const auto before = data.size();
    data = filter_outliers(data);
    std::cout << "iqr filter removed " << before - data.size() << " examples\n";
  }
  TrainingConfig cfg = TrainingConfig::defaults();
  cfg.rng_seed = a.seed;
  cfg.tuning_mode = a.loocv ? TuningMode::loocv : TuningMode::kfold;
  const std::vector<Feature> subset = a.features.empty() ? all_features() : parse_feature_list(a.features);

  Model model;
  if (a.kind == "dt") {
    double cp = 0;
    if (a.cp) {
      cp = *a.cp;
    } else {
      const auto tuning = tune_cp(data, cfg, subset);
      cp = tuning.best_cp;
      std::cout << "tuned cp=" << cp << "\n";
    }
    cfg.cp_grid = {cp};
    model = train_tree(data, cp, cfg.tree, subset);
  } else if (a.kind == "mlp") {
    int hidden = 0;
    if (a.hidden) {
      hidden = *a.hidden;
    } else {
      hidden = tune_hidden_units(data, cfg, subset).best;
      std::cout << "tuned hidden units=" << hidden << "\n";
    }
    cfg.hidden_units_grid = {hidden};
    model = train_mlp(data, hidden, cfg, subset);
  } else if (a.kind == "svm") {
    double gamma = 0;
    double cost = 0;
    if (a.gamma && a.cost) {
      gamma = *a.gamma;
      cost = *a.cost;
    } else {
      const auto tuning = tune_svm(data, cfg, subset);
      gamma = tuning.gamma;
      cost = tuning.cost;
      std::cout << "tuned gamma=" << gamma << " cost=" << cost << "\n";
    }
    cfg.gamma_grid = {gamma};
    cfg.cost_grid = {cost};
    model = train_svm(data, gamma, cost, cfg.svm_degree, cfg, subset);
  } else {
    throw std::invalid_argument("unknown model kind " + a.kind);
  }
  save_model(a.out, model, cfg);
  const auto fit = evaluate_model(model, data);
  std::cout << "trained " << model_kind(model) << " on " << data.size() << " examples, features "
            << feature_list(model_features(model)) << "\ntraining " << fit.to_string() << "\n";
  return 0;
}

int run_eval(const std::string& model_path, const std::string& dataset) {
  const Model model = load_model(model_path);
  const auto data = read_dataset(dataset);
  const auto m = evaluate_model(model, data);
  const auto& c = m.confusion;
  std::cout << "tp=" << c.tp << " fp=" << c.fp << " fn=" << c.fn << " tn=" << c.tn << "\n"
            << "precision=" << fmt(m.precision) << " recall=" << fmt(m.recall) << " specificity=" << fmt(m.specificity)
            << " accuracy=" << fmt(m.accuracy) << " balanced_accuracy=" << fmt(m.balanced_accuracy)
            << " kappa=" << fmt(m.kappa) << " f1=" << fmt(m.f1) << "\n";
  return 0;
}

// ---- select ---------------------------------------------------------------

int run_select(const std::string& dataset, const std::string& method, std::uint64_t seed) {
  const auto data = read_dataset(dataset);
  TrainingConfig cfg = TrainingConfig::defaults();
  cfg.rng_seed = seed;
  const auto result = select_features(data, selection_method_from_string(method), cfg);
  std::cout << to_string(result.method) << " selected " << feature_list(result.selected) << " (cv f1 "
            << fmt(result.cv_score) << ", " << result.subsets_evaluated << " subsets evaluated)\n";
  return 0;
}

// ---- suggest / draft ------------------------------------------------------

struct SuggestArgs {
  std::string store;
  std::string context;
  std::string corpus;
  std::string profile;
  std::string model;
  std::uint64_t seed = 1;
  int min_lines = 6;
};

int run_suggest(const SuggestArgs& a) {
  PipelineConfig cfg;
  cfg.store = a.store;
  cfg.context = a.context;
  cfg.corpus = a.corpus;
  cfg.profile = a.profile;
  cfg.model = a.model;
  cfg.seed = a.seed;
  cfg.min_lines = a.min_lines;
  const auto in = load_inputs(cfg);
  for (const auto& w : in.context.warnings) std::cerr << "warning: " << w << "\n";
  const Timestamp now = system_now();
  const auto run = run_pipeline(cfg, in, now);
  std::cout << run.counts.summary() << "\n";
  if (const auto* none = std::get_if<NoCandidate>(&run.outcome)) {
    std::cout << "no candidate (" << none->reason << "), retry at " << format_timestamp(none->retry_at) << "\n";
    return 0;
  }
  const auto& s = std::get<AssignmentSession>(run.outcome);
  ExpertiseProfile profile = in.profile;
  record_assignment(profile, now);
  save_profile(cfg.profile, profile);
  std::cout << json(s).dump(2) << "\n";
  return 0;
}

struct DraftArgs {
  std::int64_t question = 0;
  std::string store;
  std::string corpus;
  std::string outbox = "outbox";
  int min_lines = 6;
  bool normalize = false;
};

int run_draft(const DraftArgs& a) {
  const Store store(a.store);
  const auto q = store.get(a.question);
  if (!q) throw std::runtime_error("question " + std::to_string(a.question) + " is not in the store");
  const auto outcome = draft_for_question(*q, load_corpus(a.corpus), a.min_lines, a.normalize, system_now());
  if (const auto* none = std::get_if<NoRecommendation>(&outcome)) {
    std::cout << "no recommendation: " << none->reason << "\n";
    return 0;
  }
  const auto& d = std::get<DraftAnswer>(outcome);
  const fs::path dir = fs::path(a.outbox) / "drafts";
  fs::create_directories(dir);
  const fs::path file = dir / (std::to_string(a.question) + ".json");
  write_file_atomically(file, json(d).dump(2) + "\n");
  std::cout << d.snippet << "\n\nwritten to " << file.string() << "\n";
  return 0;
}

// ---- serve ----------------------------------------------------------------

volatile std::sig_atomic_t g_stop = 0;

void on_signal(int) { g_stop = 1; }

int run_serve(const std::string& config, const std::string& host, int port, bool live, int poll_seconds) {
  const PipelineConfig cfg = load_config(config);
  ServiceOptions options;
  options.live_confirmed = live;
  if (live && cfg.dry_run) throw std::invalid_argument("--live given but the config has dry_run = true");
  if (!cfg.dry_run) {
    const std::string key = env_or_empty("POSTFORGE_SE_KEY");
    const std::string token = env_or_empty("POSTFORGE_SE_TOKEN");
    if (token.empty()) throw std::invalid_argument("live posting needs POSTFORGE_SE_TOKEN");
    options.live_poster = make_live_poster(cfg.site, key, token);
  }
  Service service(cfg, load_inputs(cfg), options);
  HttpServer server(service, std::chrono::seconds(poll_seconds));
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  const int bound = server.start(host, port);
  if (bound < 0) throw std::runtime_error("cannot listen on " + host + ":" + std::to_string(port));
  std::cerr << "postforge serving on http://" << host << ":" << bound << " ("
            << (service.live() ? "LIVE posting" : "dry run") << ")\n";
  while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(200));
  server.stop();
  std::cerr << "stopped\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"postforge: find deficient questions you can improve and draft answers from your own code"};
  app.require_subcommand(1);

  IngestArgs ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Fetch questions from the API or a dump into a store");
  c_ingest->add_option("--source", ingest.source)->check(CLI::IsMember({"api", "dump"}));
  c_ingest->add_option("--dump", ingest.dump, "Dump file (store line format)");
  c_ingest->add_option("--tag", ingest.tag);
  c_ingest->add_option("--from", ingest.from, "YYYY-MM-DD");
  c_ingest->add_option("--to", ingest.to, "YYYY-MM-DD");
  c_ingest->add_option("--out", ingest.out, "Store directory")->required();
  c_ingest->add_option("--pages", ingest.pages)->check(CLI::PositiveNumber);
  c_ingest->add_option("--page-size", ingest.page_size)->check(CLI::Range(1, 100));
  c_ingest->add_option("--rate", ingest.per_minute, "Requests per minute");

  ProfileArgs profile;
  auto* c_profile = app.add_subcommand("profile", "Write an expertise profile");
  c_profile->add_option("--tags", profile.tags, "Comma-separated top tags");
  c_profile->add_option("--user", profile.user, "Fetch top tags of this user id");
  c_profile->add_option("--per-day", profile.per_day)->check(CLI::PositiveNumber);
  c_profile->add_option("--out", profile.out)->required();

  FeaturesArgs features;
  auto* c_features = app.add_subcommand("features", "Build a labeled dataset from stored questions and votes");
  c_features->add_option("--store", features.store)->required();
  c_features->add_option("--labels", features.labels, "Votes file")->required();
  c_features->add_option("--out", features.out)->required();
  c_features->add_option("--summary", features.summary, "Per-class distribution table (TSV)");

  SplitArgs split;
  auto* c_split = app.add_subcommand("split", "Stratified train/test split");
  c_split->add_option("--dataset", split.dataset)->required();
  c_split->add_option("--ratio", split.ratio);
  c_split->add_option("--seed", split.seed);
  c_split->add_option("--train-out", split.train_out)->required();
  c_split->add_option("--test-out", split.test_out)->required();

  TrainArgs train;
  auto* c_train = app.add_subcommand("train", "Train a deficiency classifier");
  c_train->add_option("--dataset", train.dataset)->required();
  c_train->add_option("--model", train.kind)->check(CLI::IsMember({"dt", "mlp", "svm"}));
  c_train->add_option("--cp", train.cp, "Tree complexity parameter; tuned when omitted");
  c_train->add_option("--hidden", train.hidden, "MLP hidden units; tuned when omitted");
  c_train->add_option("--gamma", train.gamma);
  c_train->add_option("--cost", train.cost);
  c_train->add_option("--seed", train.seed);
  c_train->add_option("--features", train.features, "Comma-separated subset, e.g. sas,vc,haa,ssvc,ac");
  c_train->add_flag("--loocv", train.loocv, "Tune with leave-one-out instead of 10-fold");
  c_train->add_flag("--iqr-train", train.iqr_train, "Drop IQR outliers before training");
  c_train->add_option("--out", train.out)->required();

  std::string eval_model;
  std::string eval_dataset;
  auto* c_eval = app.add_subcommand("eval", "Evaluate a model on a dataset");
  c_eval->add_option("--model", eval_model)->required();
  c_eval->add_option("--dataset", eval_dataset)->required();

  std::string select_dataset;
  std::string select_method = "rfe";
  std::uint64_t select_seed = 1;
  auto* c_select = app.add_subcommand("select", "Wrapper feature selection");
  c_select->add_option("--dataset", select_dataset)->required();
  c_select->add_option("--method", select_method)->check(CLI::IsMember({"rfe", "ga", "sa"}));
  c_select->add_option("--seed", select_seed);

  SuggestArgs suggest;
  auto* c_suggest = app.add_subcommand("suggest", "Run the pipeline once and print the assignment");
  c_suggest->add_option("--store", suggest.store)->required();
  c_suggest->add_option("--context", suggest.context, "Your active sources")->required();
  c_suggest->add_option("--corpus", suggest.corpus, "Code searched for drafts (default: context)");
  c_suggest->add_option("--profile", suggest.profile)->required();
  c_suggest->add_option("--model", suggest.model)->required();
  c_suggest->add_option("--seed", suggest.seed);
  c_suggest->add_option("--min-lines", suggest.min_lines);

  DraftArgs draft;
  auto* c_draft = app.add_subcommand("draft", "Draft an answer for one stored question");
  c_draft->add_option("--question", draft.question)->required();
  c_draft->add_option("--store", draft.store)->required();
  c_draft->add_option("--corpus", draft.corpus)->required();
  c_draft->add_option("--outbox", draft.outbox);
  c_draft->add_option("--min-lines", draft.min_lines);
  c_draft->add_flag("--normalize", draft.normalize, "Match renamed identifiers and literals");

  std::string serve_config = "postforge.conf";
  std::string serve_host = "127.0.0.1";
  int serve_port = 8080;
  int serve_poll = 600;
  bool serve_live = false;
  auto* c_serve = app.add_subcommand("serve", "Run the service and its HTTP API");
  c_serve->add_option("--config", serve_config);
  c_serve->add_option("--host", serve_host);
  c_serve->add_option("--port", serve_port)->check(CLI::Range(0, 65535));
  c_serve->add_option("--poll", serve_poll, "Seconds between pipeline polls")->check(CLI::PositiveNumber);
  c_serve->add_flag("--live", serve_live, "Really post approved answers (needs dry_run = false)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (c_ingest->parsed()) return run_ingest(ingest);
    if (c_profile->parsed()) return run_profile(profile);
    if (c_features->parsed()) return run_features(features);
    if (c_split->parsed()) return run_split(split);
    if (c_train->parsed()) return run_train(train);
    if (c_eval->parsed()) return run_eval(eval_model, eval_dataset);
    if (c_select->parsed()) return run_select(select_dataset, select_method, select_seed);
    if (c_suggest->parsed()) return run_suggest(suggest);
    if (c_draft->parsed()) return run_draft(draft);
    if (c_serve->parsed()) return run_serve(serve_config, serve_host, serve_port, serve_live, serve_poll);
  } catch (const std::exception& e) {
    std::cerr << "postforge: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
