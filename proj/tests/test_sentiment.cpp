#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "sentiflow/sentiment.hpp"

using namespace sentiflow;
using namespace sentiflow::sentiment;

namespace {

using Tokens = std::vector<std::string>;

KeywordList table1_subset() {
  return WordList::from_entries({"risk", "risks", "uncertainty", "inflation", "laid off", "recession"});
}

Lexicon small_lexicon() {
  return parse_lexicon(
      "word,value\nstrong,positive\ngains,positive\nsolid,positive\nweak,negative\nlosses,negative\n"
      "good,1.9\nbad,-2.5\nstrong,2.3\nweak,-1.9\n",
      "test");
}

MonthlyIndex idx(std::string label, std::vector<double> v) {
  return MonthlyIndex{std::move(label), YearMonth{2020, 1}, std::move(v)};
}

}  // namespace

TEST(Word0, CountsKeywords) {
  auto kw = table1_subset();
  EXPECT_EQ(score_word0(Tokens{"inflation", "rose"}, kw), -1.0);
  EXPECT_EQ(score_word0(Tokens{"growth", "was", "strong"}, kw), 0.0);
  EXPECT_EQ(score_word0(Tokens{"risks", "and", "uncertainty", "and", "inflation"}, kw), -3.0);
  EXPECT_EQ(score_word0(Tokens{}, kw), 0.0);
}

TEST(Word0, MultiWordEntryCountsOnce) {
  EXPECT_EQ(score_word0(Tokens{"workers", "were", "laid", "off"}, table1_subset()), -1.0);
}

TEST(Word0, PermutationInvariant) {
  auto kw = table1_subset();
  oracle::Rng rng(3);
  const Tokens vocab = {"risk", "inflation", "growth", "recession", "the", "rose", "uncertainty"};
  for (int trial = 0; trial < 200; ++trial) {
    Tokens t(rng.index(20));
    for (auto& w : t) w = vocab[rng.index(vocab.size())];
    double before = score_word0(t, kw);
    std::shuffle(t.begin(), t.end(), std::mt19937(trial));
    EXPECT_EQ(score_word0(t, kw), before);
    EXPECT_LE(before, 0.0);
  }
}

TEST(Word1, NormalizedNetCount) {
  auto lex = small_lexicon();
  Tokens t = {"strong", "gains", "weak", "a", "b", "c", "d", "e", "f", "g"};
  EXPECT_DOUBLE_EQ(score_word1(t, lex), 0.1);
  EXPECT_EQ(score_word1(Tokens{"the", "economy"}, lex), 0.0);
  EXPECT_EQ(score_word1(Tokens{"strong", "gains", "solid", "strong"}, lex), 1.0);
}

TEST(Word2, CompoundNormalization) {
  auto lex = parse_lexicon("good,1.9\n", "v");
  EXPECT_NEAR(score_word2(Tokens{"good"}, lex), 1.9 / std::sqrt(1.9 * 1.9 + 15.0), 1e-15);
  EXPECT_NEAR(score_word2(Tokens{"good"}, lex), 0.4404, 5e-5);
  EXPECT_EQ(score_word2(Tokens{"nothing", "here"}, lex), 0.0);
}

TEST(Word2, NegationWindow) {
  auto lex = parse_lexicon("good,1.9\n", "v");
  EXPECT_NEAR(score_word2(Tokens{"not", "good"}, lex), -1.406 / std::sqrt(1.406 * 1.406 + 15.0), 1e-15);
  EXPECT_NEAR(score_word2(Tokens{"not", "good"}, lex), -0.3412, 5e-5);
  // three tokens back still negates, four does not
  EXPECT_LT(score_word2(Tokens{"never", "a", "b", "good"}, lex), 0.0);
  EXPECT_GT(score_word2(Tokens{"never", "a", "b", "c", "good"}, lex), 0.0);
  EXPECT_LT(score_word2(Tokens{"dont", "good"}, lex), 0.0);
}

TEST(Word2, OrderMatters) {
  auto lex = parse_lexicon("good,1.9\n", "v");
  EXPECT_NE(score_word2(Tokens{"not", "good"}, lex), score_word2(Tokens{"good", "not"}, lex));
}

TEST(Word2, BoundedForRandomInputs) {
  auto lex = small_lexicon();
  oracle::Rng rng(5);
  const Tokens vocab = {"good", "bad", "strong", "weak", "not", "no", "the"};
  for (int trial = 0; trial < 500; ++trial) {
    Tokens t(rng.index(30));
    for (auto& w : t) w = vocab[rng.index(vocab.size())];
    double s = score_word2(t, lex);
    EXPECT_GE(s, -1.0);
    EXPECT_LE(s, 1.0);
  }
}

TEST(Word3, NormalizedHits) {
  auto list = WordList::from_entries({"crisis", "recession"});
  Tokens t(33, "word");
  t[10] = "recession";
  EXPECT_NEAR(score_word3(t, list), -1.0 / 33.0, 1e-15);
  EXPECT_NEAR(score_word3(t, list), -0.0303, 5e-5);
  EXPECT_EQ(score_word3(Tokens{"calm"}, list), 0.0);
  EXPECT_EQ(score_word3(Tokens{"crisis", "crisis", "recession", "crisis"}, list), -1.0);
}

TEST(Word3, NeutralTokenShrinksTowardZero) {
  auto list = WordList::from_entries({"crisis"});
  auto lex = small_lexicon();
  Tokens t = {"crisis", "strong", "the"};
  double w3 = score_word3(t, list), w1 = score_word1(t, lex);
  t.push_back("neutral");
  EXPECT_GT(score_word3(t, list), w3);
  EXPECT_LE(score_word3(t, list), 0.0);
  EXPECT_LT(score_word1(t, lex), w1);
  EXPECT_GE(score_word1(t, lex), 0.0);
}

TEST(Word4, CompositeRowsFromPublishedExamples) {
  EXPECT_NEAR(score_word4(1.00, -0.03), 0.97, 1e-12);
  EXPECT_NEAR(score_word4(1.00, -0.08), 0.92, 1e-12);
  EXPECT_EQ(score_word4(0.42, 0.0), 0.42);
  EXPECT_EQ(score_word4(-0.9, -0.5), -1.0);
}

TEST(ScoreSentence, InvariantsOnRandomSentences) {
  ScoringResources res{table1_subset(), small_lexicon(), WordList::from_entries({"crisis", "recession"})};
  oracle::Rng rng(9);
  const Tokens vocab = {"good", "bad", "strong", "weak", "not", "crisis", "risk", "inflation", "the", "recession"};
  for (int trial = 0; trial < 500; ++trial) {
    Tokens t(rng.index(25));
    for (auto& w : t) w = vocab[rng.index(vocab.size())];
    auto s = score_sentence(t, res);
    EXPECT_LE(s.word0, 0.0);
    EXPECT_GE(s.word3, -1.0);
    EXPECT_LE(s.word3, 0.0);
    EXPECT_GE(s.word2, -1.0);
    EXPECT_LE(s.word2, 1.0);
    if (s.word2 + s.word3 >= -1.0) EXPECT_EQ(s.word4, s.word2 + s.word3);
  }
}

TEST(Lexicon, RejectsOverlapAndUppercase) {
  EXPECT_THROW(parse_lexicon("up,positive\nup,negative\n", "x"), Error);
  EXPECT_THROW(parse_lexicon("Up,positive\n", "x"), Error);
  EXPECT_THROW(parse_lexicon("up,positive\nup,sideways\n", "x"), Error);
}

TEST(WordList, CommentsDuplicatesCase) {
  auto l = parse_word_list("# header\ncrisis\n\nrecession # trailing\n", "l");
  EXPECT_EQ(l.entries, (std::vector<std::string>{"crisis", "recession"}));
  EXPECT_THROW(parse_word_list("crisis\ncrisis\n", "l"), Error);
  EXPECT_THROW(parse_word_list("Crisis\n", "l"), Error);
}

TEST(Aggregate, Mean) {
  EXPECT_NEAR(aggregate_meeting(std::vector<double>{-1, 0, -1}), -2.0 / 3.0, 1e-15);
  EXPECT_EQ(aggregate_meeting(std::vector<double>{0.5}), 0.5);
  EXPECT_EQ(aggregate_meeting(std::vector<double>{0.25, 0.25, 0.25}), 0.25);
  try {
    aggregate_meeting(std::vector<double>{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Aggregation);
  }
}

TEST(ExternalScores, SingleColumn) {
  auto s = ingest_external_scores(
      parse_delimited("date,BERTk2\n2020-01-29,-1\n2020-03-15,0.5\n2020-04-29,1\n", "ext"));
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].method, "BERTk2");
  EXPECT_EQ(s[0].points.size(), 3u);
}

TEST(ExternalScores, NoMethodColumns) {
  EXPECT_THROW(ingest_external_scores(parse_delimited("date\n2020-01-29\n", "ext")), Error);
}

TEST(ExternalScores, OutOfOrderRowsAreSorted) {
  const std::string sorted = "date,BERTa,X\n2020-01-29,1,2\n2020-03-15,3,4\n2020-04-29,5,6\n";
  const std::string shuffled = "date,BERTa,X\n2020-04-29,5,6\n2020-01-29,1,2\n2020-03-15,3,4\n";
  auto a = ingest_external_scores(parse_delimited(sorted, "a"));
  auto b = ingest_external_scores(parse_delimited(shuffled, "b"));
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].points, b[i].points);
}

TEST(ExternalScores, StrictAlignmentAndBadValues) {
  std::vector<Date> meetings = {parse_date("2020-01-29")};
  try {
    ingest_external_scores(parse_delimited("date,B\n2020-01-30,1\n", "e"), meetings);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Alignment);
  }
  EXPECT_THROW(ingest_external_scores(parse_delimited("date,B\n2020-01-29,high\n", "e")), Error);
  EXPECT_THROW(ingest_external_scores(parse_delimited("date,B\n2020-01-29,1\n2020-01-29,2\n", "e")), Error);
}

TEST(ComposeScm, Means) {
  auto a = idx("a", {0.1, 0.5}), b = idx("b", {0.2, -0.5}), c = idx("c", {0.6, 0.0});
  auto same = compose_scm({a, a}, {"a", "a"});
  EXPECT_EQ(same.values, a.values);
  auto neg = idx("n", {-0.1, -0.5});
  auto zero = compose_scm({a, neg}, {"a", "n"});
  for (double v : zero.values) EXPECT_EQ(v, 0.0);
  auto three = compose_scm({a, b, c}, {"a", "b", "c"});
  EXPECT_NEAR(three.values[0], 0.3, 1e-15);
}

TEST(ComposeScm, DisjointGrids) {
  MonthlyIndex late{"b", YearMonth{2021, 1}, {1.0, 2.0}};
  try {
    compose_scm({idx("a", {1.0, 2.0}), late}, {"a", "b"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Alignment);
  }
  EXPECT_THROW(compose_scm({idx("a", {1.0})}, {"a"}), Error);
}
