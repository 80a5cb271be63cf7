#include "postforge/clones.hpp"

#include <algorithm>
#include <stdexcept>

namespace postforge {

using nlohmann::json;

namespace {

struct CodeLine {
  int line = 0;
  std::string key;
};

std::vector<CodeLine> code_lines(const TokenStream& s, bool normalize) {
  std::vector<CodeLine> out;
  for (const Token& t : s.tokens) {
    if (out.empty() || out.back().line != t.line) out.push_back({t.line, {}});
    std::string& key = out.back().key;
    if (!key.empty()) key += ' ';
    if (normalize && t.kind == TokenKind::identifier) key += "$id";
    else if (normalize && t.kind == TokenKind::literal) key += "$lit";
    else key += t.text;
  }
  return out;
}

}  // namespace

std::vector<CloneMatch> detect_clones(const TokenStream& needle, std::span<const TokenStream> corpus,
                                      int min_lines, bool normalize) {
  if (min_lines < 2) throw std::invalid_argument("min_lines must be at least 2");
  const auto a = code_lines(needle, normalize);
  std::vector<CloneMatch> out;
  for (const TokenStream& file : corpus) {
    const auto b = code_lines(file, normalize);
    // run[j] = length of the equal run ending at (i, j).
    std::vector<int> prev(b.size() + 1, 0);
    std::vector<int> cur(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
      for (std::size_t j = 1; j <= b.size(); ++j) {
        cur[j] = a[i - 1].key == b[j - 1].key ? prev[j - 1] + 1 : 0;
      }
      // A run is maximal when the next diagonal cell does not extend it.
      for (std::size_t j = 1; j <= b.size(); ++j) {
        const int len = cur[j];
        if (len < min_lines) continue;
        const bool extends = i < a.size() && j < b.size() && a[i].key == b[j].key;
        if (extends) continue;
        CloneMatch m;
        m.question_range = {a[i - static_cast<std::size_t>(len)].line, a[i - 1].line};
        m.corpus_file = file.source_id;
        m.corpus_range = {b[j - static_cast<std::size_t>(len)].line, b[j - 1].line};
        m.length_lines = len;
        m.normalized = normalize;
        out.push_back(std::move(m));
      }
      std::swap(prev, cur);
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const CloneMatch& x, const CloneMatch& y) {
    if (x.length_lines != y.length_lines) return x.length_lines > y.length_lines;
    if (x.corpus_file != y.corpus_file) return x.corpus_file < y.corpus_file;
    if (x.corpus_range.start != y.corpus_range.start) return x.corpus_range.start < y.corpus_range.start;
    return x.question_range.start < y.question_range.start;
  });
  return out;
}

void to_json(json& j, const LineRange& r) { j = json::array({r.start, r.end}); }
void from_json(const json& j, LineRange& r) {
  r.start = j.at(0).get<int>();
  r.end = j.at(1).get<int>();
}

void to_json(json& j, const CloneMatch& m) {
  j = json{{"question_range", m.question_range},
           {"corpus_file", m.corpus_file},
           {"corpus_range", m.corpus_range},
           {"length_lines", m.length_lines},
           {"normalized", m.normalized}};
}

void from_json(const json& j, CloneMatch& m) {
  j.at("question_range").get_to(m.question_range);
  j.at("corpus_file").get_to(m.corpus_file);
  j.at("corpus_range").get_to(m.corpus_range);
  j.at("length_lines").get_to(m.length_lines);
  j.at("normalized").get_to(m.normalized);
}

}  // namespace postforge
