#include "postforge/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "postforge/features.hpp"

namespace postforge {

namespace fs = std::filesystem;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "yes" || v == "1" || v == "on") return true;
  if (v == "false" || v == "no" || v == "0" || v == "off") return false;
  throw std::invalid_argument("config: " + key + " expects true or false, got '" + v + "'");
}

double parse_double(const std::string& v, const std::string& key) {
  std::size_t used = 0;
  double d = 0;
  try {
    d = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || v.empty()) throw std::invalid_argument("config: " + key + " expects a number, got '" + v + "'");
  return d;
}

long long parse_int(const std::string& v, const std::string& key) {
  std::size_t used = 0;
  long long n = 0;
  try {
    n = std::stoll(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || v.empty()) throw std::invalid_argument("config: " + key + " expects an integer, got '" + v + "'");
  return n;
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path corpus_root(const PipelineConfig& cfg) {
  if (!cfg.corpus.empty()) return cfg.corpus;
  return fs::is_directory(cfg.context) ? cfg.context : cfg.context.parent_path();
}

}  // namespace

void PipelineConfig::validate() const {
  weights.validate();
  if (similarity_floor < 0 || similarity_floor > 1) throw std::invalid_argument("similarity_floor must lie in [0, 1]");
  if (min_lines < 2) throw std::invalid_argument("min_lines must be at least 2");
  if (rate_limit && *rate_limit < 1) throw std::invalid_argument("rate_limit must be at least 1");
  if (retry_period.count() <= 0) throw std::invalid_argument("retry_period must be positive");
}

void PipelineConfig::check_paths() const {
  const std::pair<const char*, const fs::path*> required[] = {
      {"store", &store}, {"model", &model}, {"profile", &profile}, {"context", &context}};
  for (const auto& [name, path] : required) {
    if (path->empty()) throw std::runtime_error(std::string("config: ") + name + " is not set");
    if (!fs::exists(*path)) throw std::runtime_error(std::string("config: ") + name + " not found: " + path->string());
  }
  if (!corpus.empty() && !fs::is_directory(corpus)) throw std::runtime_error("config: corpus not found: " + corpus.string());
}

PipelineConfig parse_config(std::string_view text, const fs::path& base) {
  PipelineConfig cfg;
  auto path_of = [&](const std::string& v) { return fs::path(v).is_absolute() || base.empty() ? fs::path(v) : base / v; };
  cfg.outbox = path_of("outbox");
  cfg.state = path_of("state");
  std::istringstream in{std::string(text)};
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("config line " + std::to_string(number) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string v = trim(line.substr(eq + 1));
    if (key == "store") cfg.store = path_of(v);
    else if (key == "model") cfg.model = path_of(v);
    else if (key == "profile") cfg.profile = path_of(v);
    else if (key == "context") cfg.context = path_of(v);
    else if (key == "corpus") cfg.corpus = path_of(v);
    else if (key == "outbox") cfg.outbox = path_of(v);
    else if (key == "state") cfg.state = path_of(v);
    else if (key == "weight_code") cfg.weights.code = parse_double(v, key);
    else if (key == "weight_api") cfg.weights.api = parse_double(v, key);
    else if (key == "weight_text") cfg.weights.text = parse_double(v, key);
    else if (key == "similarity_floor") cfg.similarity_floor = parse_double(v, key);
    else if (key == "min_lines") cfg.min_lines = static_cast<int>(parse_int(v, key));
    else if (key == "normalize") cfg.normalize = parse_bool(v, key);
    else if (key == "rate_limit") cfg.rate_limit = static_cast<int>(parse_int(v, key));
    else if (key == "retry_period") cfg.retry_period = parse_duration(v);
    else if (key == "dry_run") cfg.dry_run = parse_bool(v, key);
    else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_int(v, key));
    else if (key == "site") cfg.site = v;
    else throw std::invalid_argument("config line " + std::to_string(number) + ": unknown key '" + key + "'");
  }
  cfg.validate();
  return cfg;
}

PipelineConfig load_config(const fs::path& path) {
  return parse_config(read_text(path), fs::absolute(path).parent_path());
}

std::string format_config(const PipelineConfig& cfg) {
  std::ostringstream out;
  out.precision(17);
  out << "store = " << cfg.store.string() << "\n"
      << "model = " << cfg.model.string() << "\n"
      << "profile = " << cfg.profile.string() << "\n"
      << "context = " << cfg.context.string() << "\n";
  if (!cfg.corpus.empty()) out << "corpus = " << cfg.corpus.string() << "\n";
  out << "outbox = " << cfg.outbox.string() << "\n"
      << "state = " << cfg.state.string() << "\n"
      << "weight_code = " << cfg.weights.code << "\n"
      << "weight_api = " << cfg.weights.api << "\n"
      << "weight_text = " << cfg.weights.text << "\n"
      << "similarity_floor = " << cfg.similarity_floor << "\n"
      << "min_lines = " << cfg.min_lines << "\n"
      << "normalize = " << (cfg.normalize ? "true" : "false") << "\n";
  if (cfg.rate_limit) out << "rate_limit = " << *cfg.rate_limit << "\n";
  out << "retry_period = " << cfg.retry_period.count() << "\n"
      << "dry_run = " << (cfg.dry_run ? "true" : "false") << "\n"
      << "seed = " << cfg.seed << "\n"
      << "site = " << cfg.site << "\n";
  return out.str();
}

std::vector<std::string> read_sources(const fs::path& path) {
  if (fs::is_regular_file(path)) return {read_text(path)};
  if (!fs::is_directory(path)) throw std::runtime_error("source path not found: " + path.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(path)) {
    if (e.is_regular_file() && e.path().extension() == ".java") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<std::string> out;
  for (const auto& f : files) out.push_back(read_text(f));
  return out;
}

PipelineInputs load_inputs(const PipelineConfig& cfg) {
  cfg.validate();
  cfg.check_paths();
  PipelineInputs in;
  try {
    in.posts = Store(cfg.store).load_all();
  } catch (const std::exception& e) {
    throw std::runtime_error("cannot load store: " + std::string(e.what()));
  }
  try {
    in.model = load_model(cfg.model);
  } catch (const std::exception& e) {
    throw std::runtime_error("cannot load model: " + std::string(e.what()));
  }
  in.profile = load_profile(cfg.profile);
  try {
    in.context = extract_context(read_sources(cfg.context));
  } catch (const std::exception& e) {
    throw std::runtime_error("cannot build coding context: " + std::string(e.what()));
  }
  in.corpus = load_corpus(corpus_root(cfg));
  return in;
}

std::string StageCounts::summary() const {
  std::ostringstream out;
  out << "stored=" << stored << " stale=" << stale << " related=" << related << " expert=" << expert
      << " deficient=" << deficient;
  return out.str();
}

Selection select_candidates(const PipelineConfig& cfg, const PipelineInputs& in, Timestamp now) {
  Selection sel;
  sel.counts.stored = in.posts.size();
  std::vector<QuestionRecord> stale;
  for (const auto& q : in.posts) {
    if (staleness_filter(q, now)) stale.push_back(q);
  }
  sel.counts.stale = stale.size();
  std::map<std::int64_t, const QuestionRecord*> by_id;
  for (const auto& q : stale) by_id[q.question_id] = &q;

  // IDF comes from the stale pool: the posts that are actually candidates.
  for (const auto& c : score_candidates(in.context, stale, cfg.weights)) {
    if (c.similarity < cfg.similarity_floor || c.similarity <= 0) continue;
    ++sel.counts.related;
    const QuestionRecord& q = *by_id.at(c.question_id);
    if (!expertise_filter(q, in.profile)) continue;
    ++sel.counts.expert;
    if (predict(in.model, extract_features(q)).label != Label::yes) continue;
    ++sel.counts.deficient;
    sel.ranked.push_back(c);
  }
  return sel;
}

void attach_draft(AssignmentSession& s, const QuestionRecord& q, const PipelineConfig& cfg, const Corpus& corpus,
                  Timestamp now) {
  const auto outcome = draft_for_question(q, corpus, cfg.min_lines, cfg.normalize, now);
  if (const auto* d = std::get_if<DraftAnswer>(&outcome)) {
    s.draft = *d;
    s.draft_note.clear();
    if (s.state == SessionState::suggested) s.advance(SessionState::drafted, now);
  } else {
    s.draft_note = std::get<NoRecommendation>(outcome).reason;
  }
}

PipelineRun run_pipeline(const PipelineConfig& cfg, const PipelineInputs& in, Timestamp now) {
  cfg.validate();
  PipelineRun run;
  ExpertiseProfile profile = in.profile;
  if (cfg.rate_limit) profile.max_suggestions_per_day = *cfg.rate_limit;
  if (!rate_limit_check(profile, now)) {
    // The window frees up a day after the oldest assignment still inside it.
    Timestamp oldest = now;
    std::vector<Timestamp> issued = profile.recent_assignments;
    if (profile.last_assignment_time) issued.push_back(*profile.last_assignment_time);
    for (auto t : issued) {
      if (t <= now && now - t < hours(24)) oldest = std::min(oldest, t);
    }
    run.outcome = NoCandidate{"rate_limited", oldest + hours(24), {}};
    return run;
  }

  const Selection sel = select_candidates(cfg, in, now);
  run.counts = sel.counts;
  if (sel.ranked.empty()) {
    const auto& c = sel.counts;
    const char* reason = c.stored == 0 ? "no_posts"
                         : c.stale == 0 ? "staleness"
                         : c.related == 0 ? "similarity"
                         : c.expert == 0 ? "expertise"
                                         : "classifier";
    run.outcome = NoCandidate{reason, now + cfg.retry_period, c};
    return run;
  }

  const auto epoch = static_cast<std::uint64_t>(to_epoch(now));
  std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                    static_cast<std::uint32_t>(epoch), static_cast<std::uint32_t>(epoch >> 32)};
  std::mt19937_64 rng(seq);
  const std::int64_t chosen = assign(sel.ranked, rng);
  const auto pick = std::find_if(sel.ranked.begin(), sel.ranked.end(), [&](const ScoredCandidate& c) { return c.question_id == chosen; });

  AssignmentSession s;
  s.session_id = std::to_string(to_epoch(now)) + "-" + std::to_string(chosen);
  s.question_id = chosen;
  s.similarity = pick->similarity;
  s.components = pick->components;
  s.weights = cfg.weights;
  s.history.push_back({SessionState::suggested, now});
  const auto q = std::find_if(in.posts.begin(), in.posts.end(), [&](const QuestionRecord& r) { return r.question_id == chosen; });
  attach_draft(s, *q, cfg, in.corpus, now);
  run.outcome = std::move(s);
  return run;
}

}  // namespace postforge
