#include <doctest.h>

#include <set>
#include <tuple>

#include "postforge/clones.hpp"
#include "support/programs.hpp"

using namespace postforge;
using postforge::testing::random_method;

namespace {

std::string join(const std::vector<std::string>& lines, std::size_t from, std::size_t to, const std::string& indent = "") {
  std::string out;
  for (std::size_t i = from; i < to; ++i) out += indent + lines[i] + "\n";
  return out;
}

}  // namespace

TEST_CASE("planted block is found once with its exact extent") {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const auto block = random_method(seed, 10, "v", "op");
    const auto filler = random_method(seed + 1000, 12, "f", "aux");
    // Corpus: 5 filler lines, the block, 7 filler lines. The needle has one
    // unrelated line on each side and different indentation.
    const std::string corpus_text = join(filler.lines, 0, 5) + join(block.lines, 0, 10, "    ") + join(filler.lines, 5, 12);
    const std::string needle_text = "int q = 0;\n" + join(block.lines, 0, 10, "\t") + "q++;\n";
    const std::vector<TokenStream> corpus{lex(corpus_text, "A.java")};
    const auto matches = detect_clones(lex(needle_text), corpus, 6, false);
    REQUIRE(matches.size() == 1);
    CHECK(matches[0].length_lines == 10);
    CHECK(matches[0].question_range == LineRange{2, 11});
    CHECK(matches[0].corpus_range == LineRange{6, 15});
    CHECK(matches[0].corpus_file == "A.java");
    CHECK_FALSE(matches[0].normalized);
  }
}

TEST_CASE("runs shorter than min_lines are not reported") {
  const auto block = random_method(7, 10, "v", "op");
  const std::vector<TokenStream> corpus{lex(join(block.lines, 0, 5), "A.java")};
  CHECK(detect_clones(lex(join(block.lines, 0, 10)), corpus, 6, false).empty());
  CHECK(detect_clones(lex(join(block.lines, 0, 10)), corpus, 5, false).size() == 1);
}

TEST_CASE("disjoint sources give nothing") {
  const auto a = random_method(3, 20, "a", "x");
  const auto b = random_method(4, 20, "b", "y");
  const std::vector<TokenStream> corpus{lex(join(b.lines, 0, 20), "B.java")};
  CHECK(detect_clones(lex(join(a.lines, 0, 20)), corpus, 2, false).empty());
}

TEST_CASE("renamed clone needs normalization") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const auto original = random_method(seed, 8, "v", "op");
    const auto renamed = random_method(seed, 8, "w", "fn");
    const std::vector<TokenStream> corpus{lex(join(original.lines, 0, 8), "A.java")};
    const auto needle = lex(join(renamed.lines, 0, 8));
    CHECK(detect_clones(needle, corpus, 6, false).empty());
    const auto norm = detect_clones(needle, corpus, 6, true);
    REQUIRE_FALSE(norm.empty());
    CHECK(norm[0].length_lines == 8);
    CHECK(norm[0].normalized);
  }
}

TEST_CASE("comments and blank lines do not count toward length") {
  const auto block = random_method(11, 6, "v", "op");
  std::string spaced;
  for (const auto& l : block.lines) spaced += l + "\n\n// note\n";
  const std::vector<TokenStream> corpus{lex(spaced, "A.java")};
  const auto matches = detect_clones(lex(join(block.lines, 0, 6)), corpus, 6, false);
  REQUIRE(matches.size() == 1);
  CHECK(matches[0].length_lines == 6);
  CHECK(matches[0].corpus_range == LineRange{1, 16});
}

TEST_CASE("exact matching is symmetric") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto shared = random_method(seed, 7, "s", "op");
    const auto x = random_method(seed + 100, 6, "x", "op");
    const auto y = random_method(seed + 200, 9, "y", "op");
    const auto left = lex(join(x.lines, 0, 3) + join(shared.lines, 0, 7) + join(x.lines, 3, 6), "L");
    const auto right = lex(join(y.lines, 0, 9) + join(shared.lines, 0, 7), "R");
    const auto lr = detect_clones(left, std::vector<TokenStream>{right}, 3, false);
    const auto rl = detect_clones(right, std::vector<TokenStream>{left}, 3, false);
    std::set<std::tuple<int, int, int>> a, b;
    for (const auto& m : lr) a.insert({m.question_range.start, m.corpus_range.start, m.length_lines});
    for (const auto& m : rl) b.insert({m.corpus_range.start, m.question_range.start, m.length_lines});
    CHECK(a == b);
    CHECK(a.count({4, 10, 7}) == 1);
  }
}

TEST_CASE("matches are ordered longest first, then by file") {
  const auto big = random_method(21, 9, "v", "op");
  const std::vector<TokenStream> corpus{lex(join(big.lines, 0, 6), "b.java"), lex(join(big.lines, 0, 9), "c.java"),
                                        lex(join(big.lines, 0, 6), "a.java")};
  const auto m = detect_clones(lex(join(big.lines, 0, 9)), corpus, 3, false);
  REQUIRE(m.size() == 3);
  CHECK(m[0].corpus_file == "c.java");
  CHECK(m[1].corpus_file == "a.java");
  CHECK(m[2].corpus_file == "b.java");
}

TEST_CASE("min_lines below two is rejected") {
  CHECK_THROWS_AS(detect_clones(lex("a;"), std::vector<TokenStream>{lex("a;")}, 1, false), std::invalid_argument);
}

TEST_CASE("match json round trip") {
  const CloneMatch m{{2, 9}, "x/Y.java", {40, 47}, 8, true};
  CHECK(nlohmann::json(m).get<CloneMatch>() == m);
}
