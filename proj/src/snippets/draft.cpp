#include "postforge/draft.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace postforge {

using nlohmann::json;

namespace {

bool is(const Token& t, std::string_view text) { return t.text == text && t.kind != TokenKind::literal; }

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string cur;
  for (char c : text) {
    if (c == '\n') {
      if (!cur.empty() && cur.back() == '\r') cur.pop_back();
      lines.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  lines.push_back(cur);
  return lines;
}

std::size_t matching_close(std::span<const Token> tokens, std::size_t open) {
  int depth = 0;
  for (std::size_t i = open; i < tokens.size(); ++i) {
    if (is(tokens[i], "{")) ++depth;
    if (is(tokens[i], "}") && --depth == 0) return i;
  }
  return tokens.size();
}

// Whether the '{' at `open` starts a method or constructor body:
// name ( ... ) [throws A, B] {
bool opens_method(std::span<const Token> tokens, std::size_t open) {
  if (open == 0) return false;
  std::size_t i = open - 1;
  if (tokens[i].kind == TokenKind::identifier) {
    while (i > 0 && (tokens[i].kind == TokenKind::identifier || is(tokens[i], ".") || is(tokens[i], ","))) --i;
    if (!is(tokens[i], "throws") || i == 0) return false;
    --i;
  }
  if (!is(tokens[i], ")")) return false;
  int depth = 0;
  while (true) {
    if (is(tokens[i], ")")) ++depth;
    if (is(tokens[i], "(") && --depth == 0) break;
    if (i == 0) return false;
    --i;
  }
  if (i == 0) return false;
  const Token& name = tokens[i - 1];
  if (name.kind != TokenKind::identifier) return false;
  return i < 2 || !(is(tokens[i - 2], ".") || is(tokens[i - 2], "new"));
}

struct Body {
  std::size_t first = 0;  // first token inside the braces
  std::size_t end = 0;    // the closing brace (exclusive end)
  LineRange lines;
};

std::optional<Body> enclosing_method(std::span<const Token> tokens, int line) {
  std::optional<Body> best;
  for (std::size_t k = 0; k < tokens.size(); ++k) {
    if (!is(tokens[k], "{") || !opens_method(tokens, k)) continue;
    const std::size_t close = matching_close(tokens, k);
    if (close >= tokens.size()) continue;
    const LineRange span{tokens[k].line, tokens[close].line};
    if (line < span.start || line > span.end) continue;
    if (!best || span.end - span.start < best->lines.end - best->lines.start) best = Body{k + 1, close, span};
  }
  return best;
}

const CloneMatch& pick_best(std::vector<CloneMatch>& ordered) {
  std::stable_sort(ordered.begin(), ordered.end(), [](const CloneMatch& a, const CloneMatch& b) {
    if (a.length_lines != b.length_lines) return a.length_lines > b.length_lines;
    if (a.corpus_file != b.corpus_file) return a.corpus_file < b.corpus_file;
    if (a.corpus_range.start != b.corpus_range.start) return a.corpus_range.start < b.corpus_range.start;
    return a.question_range.start < b.question_range.start;
  });
  return ordered.front();
}

}  // namespace

std::string_view to_string(DraftStatus s) {
  switch (s) {
    case DraftStatus::draft: return "draft";
    case DraftStatus::approved: return "approved";
    case DraftStatus::submitted: return "submitted";
  }
  return "?";
}

Corpus load_corpus(const std::filesystem::path& root) {
  if (!std::filesystem::is_directory(root)) throw std::runtime_error("corpus directory not found: " + root.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(root)) {
    if (entry.is_regular_file() && entry.path().extension() == ".java") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  Corpus corpus;
  for (const auto& p : files) {
    CorpusFile f;
    f.path = std::filesystem::relative(p, root).generic_string();
    f.text = read_file(p);
    f.tokens = lex(f.text, f.path);
    corpus.push_back(std::move(f));
  }
  return corpus;
}

TokenStream question_tokens(const QuestionRecord& q) {
  std::string joined;
  for (std::size_t i = 0; i < q.code_blocks.size(); ++i) {
    if (i > 0) joined += '\n';
    joined += q.code_blocks[i];
  }
  return lex(joined, "question:" + std::to_string(q.question_id));
}

std::string dedent(const std::vector<std::string>& lines) {
  std::size_t common = std::string::npos;
  for (const auto& l : lines) {
    const auto first = l.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    common = std::min(common, first);
  }
  if (common == std::string::npos) common = 0;
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i > 0) out += '\n';
    std::string l = lines[i];
    while (!l.empty() && (l.back() == ' ' || l.back() == '\t')) l.pop_back();
    out += l.size() > common ? l.substr(common) : std::string();
  }
  return out;
}

DraftOutcome compose_draft(const QuestionRecord& q, std::span<const CloneMatch> matches, const Corpus& corpus,
                           Timestamp now) {
  if (q.code_blocks.empty()) return NoRecommendation{"question has no code"};
  if (matches.empty()) return NoRecommendation{"no clone match in the corpus"};
  std::vector<CloneMatch> ordered(matches.begin(), matches.end());
  const CloneMatch best = pick_best(ordered);
  const auto file = std::find_if(corpus.begin(), corpus.end(), [&](const CorpusFile& f) { return f.path == best.corpus_file; });
  if (file == corpus.end()) throw std::invalid_argument("match refers to unknown corpus file " + best.corpus_file);

  const std::span<const Token> tokens(file->tokens.tokens);
  Body body{0, tokens.size(), {tokens.empty() ? 1 : tokens.front().line, tokens.empty() ? 1 : tokens.back().line}};
  if (auto m = enclosing_method(tokens, best.corpus_range.start)) body = *m;
  const auto body_tokens = tokens.subspan(body.first, body.end - body.first);
  if (body_tokens.empty()) return NoRecommendation{"matched method has an empty body"};

  const StatementGraph graph = build_statement_graph(body_tokens);
  std::set<int> seeds;
  for (const auto& s : graph.statements) {
    if (s.lines.overlaps(best.corpus_range)) seeds.insert(s.id);
  }
  if (seeds.empty()) return NoRecommendation{"match covers no statement"};
  std::set<int> slice = backward_slice(graph, seeds);
  for (int id : forward_slice(graph, seeds)) slice.insert(id);

  std::set<int> line_numbers;
  for (int id : slice) {
    const auto& s = graph.at(id);
    for (int l = s.lines.start; l <= s.lines.end; ++l) line_numbers.insert(l);
  }
  const auto source_lines = split_lines(file->text);
  std::vector<std::string> picked;
  DraftAnswer draft;
  for (int l : line_numbers) {
    picked.push_back(source_lines.at(static_cast<std::size_t>(l - 1)));
    auto& ranges = draft.provenance.slice_lines;
    if (!ranges.empty() && ranges.back().end + 1 == l) ranges.back().end = l;
    else ranges.push_back({l, l});
  }
  draft.question_id = q.question_id;
  draft.snippet = dedent(picked);
  draft.provenance.match = best;
  draft.provenance.alternatives.assign(ordered.begin() + 1, ordered.end());
  draft.provenance.method_range = body.lines;
  draft.provenance.seed_statements.assign(seeds.begin(), seeds.end());
  draft.provenance.slice_statements.assign(slice.begin(), slice.end());
  draft.status = DraftStatus::draft;
  draft.created_at = now;
  return draft;
}

DraftOutcome draft_for_question(const QuestionRecord& q, const Corpus& corpus, int min_lines, bool normalize,
                                Timestamp now) {
  if (q.code_blocks.empty()) return NoRecommendation{"question has no code"};
  const TokenStream needle = question_tokens(q);
  std::vector<TokenStream> streams;
  streams.reserve(corpus.size());
  for (const auto& f : corpus) streams.push_back(f.tokens);
  const auto matches = detect_clones(needle, streams, min_lines, normalize);
  return compose_draft(q, matches, corpus, now);
}

void to_json(json& j, const DraftAnswer& d) {
  j = json{{"question_id", d.question_id},
           {"snippet", d.snippet},
           {"status", to_string(d.status)},
           {"created_at", to_epoch(d.created_at)},
           {"provenance",
            {{"match", d.provenance.match},
             {"alternatives", d.provenance.alternatives},
             {"method_range", d.provenance.method_range},
             {"seed_statements", d.provenance.seed_statements},
             {"slice_statements", d.provenance.slice_statements},
             {"slice_lines", d.provenance.slice_lines}}}};
}

void from_json(const json& j, DraftAnswer& d) {
  d.question_id = j.at("question_id").get<std::int64_t>();
  d.snippet = j.at("snippet").get<std::string>();
  const auto status = j.at("status").get<std::string>();
  d.status = status == "approved" ? DraftStatus::approved : status == "submitted" ? DraftStatus::submitted : DraftStatus::draft;
  d.created_at = from_epoch(j.at("created_at").get<std::int64_t>());
  const auto& p = j.at("provenance");
  p.at("match").get_to(d.provenance.match);
  p.at("alternatives").get_to(d.provenance.alternatives);
  p.at("method_range").get_to(d.provenance.method_range);
  p.at("seed_statements").get_to(d.provenance.seed_statements);
  p.at("slice_statements").get_to(d.provenance.slice_statements);
  p.at("slice_lines").get_to(d.provenance.slice_lines);
}

}  // namespace postforge
