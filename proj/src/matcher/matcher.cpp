#include "postforge/matcher.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "postforge/draft.hpp"
#include "postforge/store.hpp"

namespace postforge {

using nlohmann::json;

namespace {

bool is(const Token& t, std::string_view text) { return t.text == text && t.kind != TokenKind::literal; }

bool capitalized_type(const Token& t) {
  if (t.kind != TokenKind::identifier || t.text.empty()) return false;
  if (!std::isupper(static_cast<unsigned char>(t.text[0]))) return false;
  return std::any_of(t.text.begin(), t.text.end(), [](char c) { return std::islower(static_cast<unsigned char>(c)); });
}

void add_identifier_terms(std::span<const Token> tokens, std::map<std::string, int>& terms) {
  for (const Token& t : tokens) {
    if (t.kind != TokenKind::identifier) continue;
    for (auto& w : split_identifier(t.text)) ++terms[w];
  }
}

// Words of free text; markup tags and entities are dropped first.
void add_text_terms(std::string_view text, std::map<std::string, int>& terms) {
  std::string plain;
  plain.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '<') {
      const auto close = text.find('>', i);
      if (close == std::string_view::npos) break;
      i = close;
      plain += ' ';
    } else if (text[i] == '&') {
      const auto semi = text.find(';', i);
      if (semi != std::string_view::npos && semi - i <= 8) i = semi;
      plain += ' ';
    } else {
      plain += text[i];
    }
  }
  std::string word;
  auto flush = [&] {
    for (auto& w : split_identifier(word)) ++terms[w];
    word.clear();
  };
  for (char c : plain) {
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') word += c;
    else flush();
  }
  flush();
}

template <typename Map>
void merge_counts(Map& into, const Map& from) {
  for (const auto& [k, v] : from) into[k] += v;
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

// Ranked copy: similarity descending, then lower question id.
std::vector<std::size_t> ranking(std::span<const ScoredCandidate> c) {
  std::vector<std::size_t> order(c.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (c[a].similarity != c[b].similarity) return c[a].similarity > c[b].similarity;
    return c[a].question_id < c[b].question_id;
  });
  return order;
}

}  // namespace

std::vector<std::string> split_identifier(std::string_view id) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    const bool digits = std::all_of(cur.begin(), cur.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
    if (!cur.empty() && !digits) out.push_back(cur);
    cur.clear();
  };
  for (std::size_t i = 0; i < id.size(); ++i) {
    const auto c = static_cast<unsigned char>(id[i]);
    if (!std::isalnum(c)) {
      flush();
      continue;
    }
    if (std::isupper(c) && !cur.empty()) {
      const auto prev = static_cast<unsigned char>(id[i - 1]);
      const bool next_lower = i + 1 < id.size() && std::islower(static_cast<unsigned char>(id[i + 1]));
      if (std::islower(prev) || std::isdigit(prev) || (std::isupper(prev) && next_lower)) flush();
    }
    cur += static_cast<char>(std::tolower(c));
  }
  flush();
  return out;
}

std::map<std::string, int> shingles(std::span<const Token> tokens, int k) {
  if (k < 1) throw std::invalid_argument("shingle size must be positive");
  std::map<std::string, int> out;
  const auto n = static_cast<std::size_t>(k);
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string key = tokens[i].text;
    for (std::size_t j = 1; j < n; ++j) key += '\x1f' + tokens[i + j].text;
    ++out[key];
  }
  return out;
}

std::set<std::string> api_types(std::span<const Token> tokens) {
  std::set<std::string> out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const Token& t = tokens[i];
    if (!capitalized_type(t)) continue;
    const Token* prev = i > 0 ? &tokens[i - 1] : nullptr;
    const Token* next = i + 1 < tokens.size() ? &tokens[i + 1] : nullptr;
    const bool declared = next && next->kind == TokenKind::identifier;
    const bool instantiated = prev && is(*prev, "new");
    const bool generic = (next && is(*next, "<")) || (prev && is(*prev, "<")) ||
                         (prev && is(*prev, ",") && next && (is(*next, ">") || is(*next, ">>")));
    const bool array = next && is(*next, "[") && i + 2 < tokens.size() && is(tokens[i + 2], "]");
    if (declared || instantiated || generic || array) out.insert(t.text);
  }
  return out;
}

CodingContext extract_context(const std::vector<std::string>& source_files, int k) {
  if (source_files.empty()) throw std::invalid_argument("no source files for the coding context");
  CodingContext ctx;
  bool any = false;
  for (std::size_t i = 0; i < source_files.size(); ++i) {
    const TokenStream s = lex(source_files[i], "context:" + std::to_string(i));
    if (!s.clean()) {
      ctx.warnings.push_back("skipped source file " + std::to_string(i) + ": " + s.diagnostics.front().message +
                             " at line " + std::to_string(s.diagnostics.front().line));
      continue;
    }
    if (s.tokens.empty()) continue;
    any = true;
    merge_counts(ctx.token_shingles, shingles(s.tokens, k));
    const auto types = api_types(s.tokens);
    ctx.api_types.insert(types.begin(), types.end());
    add_identifier_terms(s.tokens, ctx.terms);
  }
  if (!any) throw std::invalid_argument("no usable source in the coding context");
  return ctx;
}

CodingContext question_context(const QuestionRecord& q, int k) {
  CodingContext ctx;
  if (!q.code_blocks.empty()) {
    const TokenStream s = question_tokens(q);
    ctx.token_shingles = shingles(s.tokens, k);
    ctx.api_types = api_types(s.tokens);
  }
  add_text_terms(q.title, ctx.terms);
  add_text_terms(q.body, ctx.terms);
  return ctx;
}

void SimilarityWeights::validate() const {
  if (code < 0 || api < 0 || text < 0) throw std::invalid_argument("similarity weights must be non-negative");
  if (std::abs(code + api + text - 1.0) > 1e-9) throw std::invalid_argument("similarity weights must sum to 1");
}

TermWeights::TermWeights(std::span<const CodingContext> pool) : documents_(pool.size()) {
  for (const auto& doc : pool) {
    for (const auto& [term, count] : doc.terms) {
      if (count > 0) ++df_[term];
    }
  }
}

double TermWeights::idf(const std::string& term) const {
  const auto it = df_.find(term);
  const double df = it == df_.end() ? 0.0 : it->second;
  return std::log((1.0 + static_cast<double>(documents_)) / (1.0 + df)) + 1.0;
}

double weighted_jaccard(const std::map<std::string, int>& a, const std::map<std::string, int>& b) {
  double lo = 0, hi = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() || ib != b.end()) {
    if (ib == b.end() || (ia != a.end() && ia->first < ib->first)) {
      hi += ia->second;
      ++ia;
    } else if (ia == a.end() || ib->first < ia->first) {
      hi += ib->second;
      ++ib;
    } else {
      lo += std::min(ia->second, ib->second);
      hi += std::max(ia->second, ib->second);
      ++ia;
      ++ib;
    }
  }
  return hi == 0 ? 0.0 : lo / hi;
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a.empty() && b.empty()) return 0.0;
  std::size_t common = 0;
  for (const auto& x : a) common += b.count(x);
  return static_cast<double>(common) / static_cast<double>(a.size() + b.size() - common);
}

double tfidf_cosine(const std::map<std::string, int>& a, const std::map<std::string, int>& b, const TermWeights& w) {
  double dot = 0, na = 0, nb = 0;
  for (const auto& [term, count] : a) {
    const double x = count * w.idf(term);
    na += x * x;
    const auto it = b.find(term);
    if (it != b.end()) dot += x * it->second * w.idf(term);
  }
  for (const auto& [term, count] : b) {
    const double y = count * w.idf(term);
    nb += y * y;
  }
  if (na == 0 || nb == 0) return 0.0;
  return clamp01(dot / (std::sqrt(na) * std::sqrt(nb)));
}

namespace {

ScoredCandidate score(const CodingContext& ctx, const QuestionRecord& q, const CodingContext& qc,
                      const SimilarityWeights& weights, const TermWeights& idf) {
  ScoredCandidate c;
  c.question_id = q.question_id;
  c.components.code = q.code_blocks.empty() ? 0.0 : weighted_jaccard(ctx.token_shingles, qc.token_shingles);
  c.components.api = jaccard(ctx.api_types, qc.api_types);
  c.components.text = tfidf_cosine(ctx.terms, qc.terms, idf);
  c.similarity = clamp01(weights.code * c.components.code + weights.api * c.components.api +
                         weights.text * c.components.text);
  return c;
}

}  // namespace

ScoredCandidate similarity(const CodingContext& ctx, const QuestionRecord& q, const SimilarityWeights& weights,
                           const TermWeights& idf) {
  weights.validate();
  return score(ctx, q, question_context(q), weights, idf);
}

std::vector<ScoredCandidate> score_candidates(const CodingContext& ctx, std::span<const QuestionRecord> pool,
                                              const SimilarityWeights& weights) {
  weights.validate();
  std::vector<CodingContext> contexts;
  contexts.reserve(pool.size());
  for (const auto& q : pool) contexts.push_back(question_context(q));
  const TermWeights idf(contexts);
  std::vector<ScoredCandidate> out;
  out.reserve(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) out.push_back(score(ctx, pool[i], contexts[i], weights, idf));
  const auto order = ranking(out);
  std::vector<ScoredCandidate> sorted;
  sorted.reserve(out.size());
  for (std::size_t i : order) sorted.push_back(out[i]);
  return sorted;
}

void ExpertiseProfile::validate() const {
  if (max_suggestions_per_day < 1) throw std::invalid_argument("max_suggestions_per_day must be at least 1");
}

bool expertise_filter(const QuestionRecord& q, const ExpertiseProfile& p) {
  if (q.tags.empty() || p.top_tags.empty()) return false;
  return std::all_of(q.tags.begin(), q.tags.end(), [&](const std::string& t) { return p.top_tags.count(t) > 0; });
}

bool staleness_filter(const QuestionRecord& q, Timestamp now) { return now - q.last_activity_date >= kStaleAfter; }

bool rate_limit_check(const ExpertiseProfile& p, Timestamp now) {
  std::set<Timestamp> issued(p.recent_assignments.begin(), p.recent_assignments.end());
  if (p.last_assignment_time) issued.insert(*p.last_assignment_time);
  const auto in_window = std::count_if(issued.begin(), issued.end(), [&](Timestamp t) {
    return t <= now && now - t < hours(24);
  });
  return in_window < p.max_suggestions_per_day;
}

void record_assignment(ExpertiseProfile& p, Timestamp now) {
  auto& r = p.recent_assignments;
  r.erase(std::remove_if(r.begin(), r.end(), [&](Timestamp t) { return now - t >= hours(24); }), r.end());
  r.push_back(now);
  p.last_assignment_time = now;
}

std::int64_t assign(std::span<const ScoredCandidate> candidates, std::mt19937_64& rng) {
  if (candidates.empty()) throw std::invalid_argument("no candidates to assign");
  const auto order = ranking(candidates);
  if (candidates[order.front()].similarity <= 0) throw std::runtime_error("no assignable candidate");
  std::uniform_real_distribution<double> u(0.0, 1.0);
  long trials = 0;
  while (trials < kMaxAssignTrials) {
    for (std::size_t i : order) {
      const double p = candidates[i].similarity;
      if (p <= 0) continue;
      if (u(rng) < p) return candidates[i].question_id;
      if (++trials >= kMaxAssignTrials) break;
    }
  }
  return candidates[order.front()].question_id;
}

std::vector<double> assignment_probabilities(std::span<const ScoredCandidate> candidates) {
  std::vector<double> out(candidates.size(), 0.0);
  if (candidates.empty()) return out;
  const auto order = ranking(candidates);
  double miss = 1.0;
  for (std::size_t i : order) {
    const double p = std::clamp(candidates[i].similarity, 0.0, 1.0);
    out[i] = miss * p;
    miss *= 1.0 - p;
  }
  const double total = 1.0 - miss;
  if (total <= 0) return std::vector<double>(candidates.size(), 0.0);
  for (double& v : out) v /= total;
  return out;
}

void to_json(json& j, const SimilarityWeights& w) { j = json{{"code", w.code}, {"api", w.api}, {"text", w.text}}; }

void from_json(const json& j, SimilarityWeights& w) {
  w.code = j.at("code").get<double>();
  w.api = j.at("api").get<double>();
  w.text = j.at("text").get<double>();
}

void to_json(json& j, const ScoredCandidate& c) {
  j = json{{"question_id", c.question_id},
           {"similarity", c.similarity},
           {"components", {{"code", c.components.code}, {"api", c.components.api}, {"text", c.components.text}}}};
}

void from_json(const json& j, ScoredCandidate& c) {
  c.question_id = j.at("question_id").get<std::int64_t>();
  c.similarity = j.at("similarity").get<double>();
  const auto& comp = j.at("components");
  c.components = {comp.at("code").get<double>(), comp.at("api").get<double>(), comp.at("text").get<double>()};
}

void to_json(json& j, const ExpertiseProfile& p) {
  std::vector<std::int64_t> recent;
  for (auto t : p.recent_assignments) recent.push_back(to_epoch(t));
  j = json{{"top_tags", p.top_tags},
           {"max_suggestions_per_day", p.max_suggestions_per_day},
           {"last_assignment_time", p.last_assignment_time ? json(to_epoch(*p.last_assignment_time)) : json(nullptr)},
           {"recent_assignments", recent}};
}

void from_json(const json& j, ExpertiseProfile& p) {
  p.top_tags.clear();
  for (const auto& t : j.at("top_tags")) {
    std::string tag = t.get<std::string>();
    std::transform(tag.begin(), tag.end(), tag.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    p.top_tags.insert(tag);
  }
  p.max_suggestions_per_day = j.value("max_suggestions_per_day", 1);
  p.last_assignment_time.reset();
  if (j.contains("last_assignment_time") && !j.at("last_assignment_time").is_null()) {
    p.last_assignment_time = from_epoch(j.at("last_assignment_time").get<std::int64_t>());
  }
  p.recent_assignments.clear();
  for (const auto& t : j.value("recent_assignments", json::array())) p.recent_assignments.push_back(from_epoch(t.get<std::int64_t>()));
  p.validate();
}

ExpertiseProfile load_profile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read profile " + path.string());
  try {
    return json::parse(in).get<ExpertiseProfile>();
  } catch (const json::exception& e) {
    throw std::runtime_error("invalid profile " + path.string() + ": " + e.what());
  }
}

void save_profile(const std::filesystem::path& path, const ExpertiseProfile& p) {
  write_file_atomically(path, json(p).dump(2) + "\n");
}

}  // namespace postforge
