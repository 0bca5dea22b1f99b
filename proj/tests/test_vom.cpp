#include <doctest.h>

#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "chordjam/vom.hpp"

using namespace chordjam;
using Rational = boost::rational<std::int64_t>;

namespace {

std::vector<int> symbols(std::string_view text) {
  std::vector<int> out;
  for (char c : text) out.push_back(c - 'a');
  return out;
}

std::string letter(int s) { return std::string(1, static_cast<char>('a' + s)); }

std::string read_fixture(const char* name) {
  std::ifstream in(std::string(CHORDJAM_FIXTURE_DIR) + "/" + name);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// C G C Am C G C with C=0, G=1, Am=2.
const std::vector<int> kExample{0, 1, 0, 2, 0, 1, 0};

// Continuation counts of the longest suffix of `context` (up to max_depth)
// that occurs with a successor somewhere in `corpus`.
std::optional<std::map<int, std::size_t>> brute_distribution(const std::vector<std::vector<int>>& corpus,
                                                             const std::vector<int>& context,
                                                             std::size_t max_depth = 0) {
  std::size_t longest = context.size();
  if (max_depth > 0) longest = std::min(longest, max_depth);
  for (std::size_t len = longest; len >= 1; --len) {
    std::map<int, std::size_t> counts;
    for (const auto& seq : corpus) {
      for (std::size_t end = len; end < seq.size(); ++end) {
        if (std::equal(context.end() - len, context.end(), seq.begin() + (end - len))) ++counts[seq[end]];
      }
    }
    if (!counts.empty()) return counts;
  }
  return std::nullopt;
}

}  // namespace

TEST_CASE("tree for abcd and abbc") {
  VomTree tree;
  tree.learn_sequence(symbols("abcd"));
  tree.learn_sequence(symbols("abbc"));
  CHECK(tree.dump(letter) == read_fixture("contree_abcd_abbc.txt"));

  // Query ab: continuation c from the first sequence or b from the second.
  const auto d = tree.query(symbols("ab"));
  REQUIRE(d);
  CHECK(d->depth == 2);
  CHECK(d->total_pointers == 2);
  CHECK(d->probability(2) == Rational(1, 2));
  CHECK(d->probability(1) == Rational(1, 2));
  CHECK(d->probability(0) == Rational(0));
}

TEST_CASE("single symbol has no continuation") {
  VomTree tree;
  tree.learn_sequence(std::vector<int>{0});
  CHECK(tree.node_count() == 2);
  CHECK(tree.pointer_count() == 1);
  CHECK(tree.dump() == "root\n  0 (0,2)\n");
  CHECK_FALSE(tree.query(std::vector<int>{0}));
}

TEST_CASE("chord example distributions are exact") {
  VomTree tree;
  tree.learn_sequence(kExample);

  const auto full = tree.query(kExample);
  REQUIRE(full);
  CHECK(full->counts == std::map<int, std::size_t>{{2, 1}});
  CHECK(full->probability(2) == Rational(1));

  const auto tail = tree.query(std::vector<int>{1, 0});
  REQUIRE(tail);
  CHECK(tail->probability(2) == Rational(1));

  const auto single = tree.query(std::vector<int>{0});
  REQUIRE(single);
  CHECK(single->depth == 1);
  CHECK(single->probability(1) == Rational(2, 3));
  CHECK(single->probability(2) == Rational(1, 3));
  CHECK(single->argmax() == 1);
  CHECK(tree.predict(std::vector<int>{0}) == 1);
}

TEST_CASE("empty tree and unseen contexts") {
  VomTree empty;
  CHECK_FALSE(empty.query(std::vector<int>{0, 1}));
  CHECK_FALSE(empty.predict(std::vector<int>{3}));
  VomTree tree;
  tree.learn_sequence(kExample);
  CHECK_FALSE(tree.query(std::vector<int>{5}));
  CHECK_FALSE(tree.predict(std::vector<int>{5}));
  CHECK(tree.matched_depth(std::vector<int>{5}) == 0);
}

TEST_CASE("sampling matches the exact distribution") {
  VomTree tree;
  tree.learn_sequence(kExample);
  std::mt19937_64 rng(2024);
  constexpr int kDraws = 100000;
  int g = 0, am = 0;
  for (int i = 0; i < kDraws; ++i) {
    const auto s = tree.sample(std::vector<int>{0}, rng);
    REQUIRE(s);
    g += *s == 1;
    am += *s == 2;
  }
  CHECK(g + am == kDraws);
  CHECK(std::abs(g / double(kDraws) - 2.0 / 3) <= 0.01);
  CHECK(std::abs(am / double(kDraws) - 1.0 / 3) <= 0.01);

  // Seeded policy is reproducible.
  const auto a = tree.predict(std::vector<int>{0}, VomTree::Sample{7});
  const auto b = tree.predict(std::vector<int>{0}, VomTree::Sample{7});
  CHECK(a == b);
}

TEST_CASE("argmax ties go to the lowest symbol") {
  VomTree tree;
  tree.learn_sequence(std::vector<int>{4, 3, 4, 1});
  const auto d = tree.query(std::vector<int>{4});
  REQUIRE(d);
  CHECK(d->probability(3) == Rational(1, 2));
  CHECK(d->argmax() == 1);
}

TEST_CASE("pointer conservation and distributions against enumeration") {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> symbol(0, 3);
  std::uniform_int_distribution<int> length(1, 8);
  std::uniform_int_distribution<int> count(1, 3);
  for (int trial = 0; trial < 300; ++trial) {
    VomTree tree;
    std::vector<std::vector<int>> corpus(count(rng));
    std::size_t expected_pointers = 0;
    for (auto& seq : corpus) {
      const int n = length(rng);
      for (int i = 0; i < n; ++i) seq.push_back(symbol(rng));
      // Every (context, continuation) pair, plus the n past-the-end pointers
      // from the contexts ending at the last symbol.
      std::size_t pairs = 0;
      for (int end = 1; end < n; ++end) pairs += end;
      expected_pointers += pairs + n;
      tree.learn_sequence(seq);
    }
    CHECK(tree.pointer_count() == expected_pointers);

    for (int q = 0; q < 10; ++q) {
      std::vector<int> context(length(rng));
      for (auto& s : context) s = symbol(rng);
      const auto expected = brute_distribution(corpus, context);
      const auto got = tree.query(context);
      REQUIRE(got.has_value() == expected.has_value());
      if (got) CHECK(got->counts == *expected);
    }
  }
}

TEST_CASE("deepest match is monotone in context length") {
  std::mt19937_64 rng(23);
  std::uniform_int_distribution<int> symbol(0, 2);
  VomTree tree;
  for (int s = 0; s < 5; ++s) {
    std::vector<int> seq(12);
    for (auto& x : seq) x = symbol(rng);
    tree.learn_sequence(seq);
  }
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<int> context(10);
    for (auto& x : context) x = symbol(rng);
    std::size_t previous = 0;
    for (std::size_t len = 1; len <= context.size(); ++len) {
      const auto depth = tree.matched_depth(std::span(context).last(len));
      CHECK(depth >= previous);
      previous = depth;
    }
  }
}

TEST_CASE("a single training sequence is reproduced from any prefix") {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> symbol(0, 6);
  for (int trial = 0; trial < 50; ++trial) {
    // Distinct symbols keep every prefix unambiguous.
    std::vector<int> seq{0, 1, 2, 3, 4, 5, 6};
    std::shuffle(seq.begin(), seq.end(), rng);
    VomTree tree;
    tree.learn_sequence(seq);
    for (std::size_t i = 1; i < seq.size(); ++i) {
      const auto d = tree.query(std::span(seq).first(i));
      REQUIRE(d);
      CHECK(d->counts == std::map<int, std::size_t>{{seq[i], 1}});
    }
  }
}

TEST_CASE("bounded context depth") {
  VomTree tree(2);
  tree.learn_sequence(symbols("abcabd"));
  const auto d = tree.query(symbols("cab"));
  REQUIRE(d);
  CHECK(d->depth == 2);
  const auto expected = brute_distribution({symbols("abcabd")}, symbols("cab"), 2);
  CHECK(d->counts == *expected);
  tree.clear();
  CHECK(tree.node_count() == 1);
  CHECK_FALSE(tree.query(symbols("ab")));
}
