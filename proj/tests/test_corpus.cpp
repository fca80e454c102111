#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "oracles.hpp"
#include "sentiflow/corpus.hpp"

using namespace sentiflow;
using namespace sentiflow::corpus;

namespace {

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            fmt::format("sentiflow_corpus_{}_{}", ::getpid(), counter++);
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }
  void write(const std::string& name, const std::string& content) const {
    std::ofstream(path_ / name) << content;
  }

 private:
  fs::path path_;
};

MinutesDocument doc_with(std::string text) {
  MinutesDocument d;
  d.meeting_date = parse_date("2006-01-31");
  d.publication_date = parse_date("2006-02-21");
  d.raw_text = std::move(text);
  return d;
}

std::vector<std::string> texts(const std::vector<SentenceRecord>& s) {
  std::vector<std::string> out;
  for (const auto& r : s) out.push_back(r.text);
  return out;
}

}  // namespace

TEST(Tokenize, StripsPunctuation) {
  EXPECT_EQ(tokenize("Inflation, rose!"), (std::vector<std::string>{"inflation", "rose"}));
}

TEST(Tokenize, Empty) { EXPECT_TRUE(tokenize("").empty()); }

TEST(Tokenize, SplitsHyphensAndLowercases) {
  EXPECT_EQ(tokenize("risk-averse Firms"), (std::vector<std::string>{"risk", "averse", "firms"}));
}

TEST(Tokenize, DropsDigitsAndJoinsApostrophes) {
  EXPECT_EQ(tokenize("the staff's 10 year don't"),
            (std::vector<std::string>{"the", "staffs", "year", "dont"}));
  EXPECT_EQ(tokenize("growth\xE2\x80\x94slow"), (std::vector<std::string>{"growth", "slow"}));
}

TEST(Tokenize, EmptyIffNoLetters) {
  EXPECT_TRUE(tokenize("2006 -- 3.5% ...").empty());
  EXPECT_FALSE(tokenize("2006 a").empty());
}

TEST(Tokenize, IdempotentOnRenderedOutput) {
  oracle::Rng rng(7);
  const std::string alphabet = "abcXYZ -,.'!?09\t\xE2";
  for (int trial = 0; trial < 300; ++trial) {
    std::string s;
    auto len = rng.index(60);
    for (std::size_t i = 0; i < len; ++i) s.push_back(alphabet[rng.index(alphabet.size())]);
    auto once = tokenize(s);
    std::string rendered;
    for (std::size_t i = 0; i < once.size(); ++i) rendered += (i ? " " : "") + once[i];
    EXPECT_EQ(tokenize(rendered), once) << s;
  }
}

TEST(Segment, TwoTerminators) {
  auto s = segment(doc_with("Growth was strong. Inflation rose."));
  EXPECT_EQ(texts(s), (std::vector<std::string>{"Growth was strong", "Inflation rose"}));
  EXPECT_EQ(s[0].ordinal, 0u);
  EXPECT_EQ(s[1].ordinal, 1u);
  EXPECT_EQ(s[1].tokens, (std::vector<std::string>{"inflation", "rose"}));
}

TEST(Segment, EmptyText) { EXPECT_TRUE(segment(doc_with("")).empty()); }

TEST(Segment, AbbreviationGuard) {
  EXPECT_EQ(segment(doc_with("The U.S. economy grew.")).size(), 1u);
  EXPECT_EQ(segment(doc_with("Exports to the U.S. Treasury rose. Mr. Powell spoke.")).size(), 2u);
  EXPECT_EQ(segment(doc_with("Data from Jan. Markets were calm.")).size(), 1u);
}

TEST(Segment, QuestionAndExclamationAndBlankLines) {
  auto s = segment(doc_with("Is inflation rising? It is! Prices rose\n\nStaff Review\nGrowth was solid."));
  EXPECT_EQ(texts(s), (std::vector<std::string>{"Is inflation rising", "It is", "Prices rose",
                                                "Staff Review\nGrowth was solid"}));
}

TEST(Segment, NoSplitBeforeLowercaseOrDecimal) {
  EXPECT_EQ(segment(doc_with("Rates rose 2.5 percent. e.g. prices rose.")).size(), 1u);
}

TEST(Segment, CoversAllNonWhitespace) {
  std::string text = "Growth was strong.  Inflation rose 3.2 percent! Does it matter? Yes.\n\nNew section";
  std::string joined;
  for (const auto& r : segment(doc_with(text))) joined += r.text;
  auto strip = [](const std::string& s, bool drop_terms) {
    std::string o;
    for (char c : s)
      if (!std::isspace(static_cast<unsigned char>(c)) && !(drop_terms && (c == '.' || c == '!' || c == '?')))
        o.push_back(c);
    return o;
  };
  // terminators at split points are separators; everything else survives
  EXPECT_EQ(strip(joined, true), strip(text, true));
}

TEST(Segment, RoundTripOnCleanSentences) {
  oracle::Rng rng(11);
  const std::vector<std::string> words = {"growth", "inflation", "rose", "markets", "Staff", "risk",
                                          "were", "steady", "outlook", "participants"};
  const std::vector<std::string> starters = {"Growth", "Inflation", "Members", "The", "Participants"};
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::string> sentences(1 + rng.index(6));
    for (auto& s : sentences) {
      s = starters[rng.index(starters.size())];
      auto n = rng.index(8);
      for (std::size_t i = 0; i < n; ++i) s += " " + words[rng.index(words.size())];
    }
    std::string joined;
    for (std::size_t i = 0; i < sentences.size(); ++i) joined += (i ? ". " : "") + sentences[i];
    EXPECT_EQ(texts(segment(doc_with(joined))), sentences);
  }
}

TEST(LoadCorpus, DirectorySortedByDate) {
  TempDir dir;
  dir.write("2006-03-28.txt", "Second meeting.");
  dir.write("2006-01-31.txt", "First meeting.");
  dir.write("README.md", "ignored");
  auto docs = load_corpus(dir.path());
  ASSERT_EQ(docs.size(), 2u);
  EXPECT_EQ(docs[0].key(), "2006-01-31");
  EXPECT_EQ(docs[1].key(), "2006-03-28");
}

TEST(LoadCorpus, DefaultPublicationLag) {
  TempDir dir;
  dir.write("2006-01-31.txt", "Text.");
  auto docs = load_corpus(dir.path());
  EXPECT_EQ(format_date(docs[0].publication_date), "2006-02-21");
}

TEST(LoadCorpus, EmptyDirectory) {
  TempDir dir;
  try {
    load_corpus(dir.path());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyCorpus);
  }
}

TEST(LoadCorpus, BadFilenameDate) {
  TempDir dir;
  dir.write("2006-13-01.txt", "Text.");
  try {
    load_corpus(dir.path());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Format);
    EXPECT_NE(std::string(e.what()).find("2006-13-01"), std::string::npos);
  }
}

TEST(LoadCorpus, ManifestWithOverrideAndMissingFile) {
  TempDir dir;
  dir.write("a.txt", "Alpha.");
  dir.write("b.txt", "Beta.");
  dir.write("manifest.csv",
            "meeting_date,publication_date,path\n2006-03-28,,b.txt\n2006-01-31,2006-02-10,a.txt\n");
  auto docs = load_corpus(dir.path() / "manifest.csv");
  ASSERT_EQ(docs.size(), 2u);
  EXPECT_EQ(docs[0].raw_text, "Alpha.");
  EXPECT_EQ(format_date(docs[0].publication_date), "2006-02-10");
  EXPECT_EQ(format_date(docs[1].publication_date), "2006-04-18");

  dir.write("bad.csv", "meeting_date,path\n2006-01-31,missing.txt\n");
  try {
    load_corpus(dir.path() / "bad.csv");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Io);
    EXPECT_NE(std::string(e.what()).find("missing.txt"), std::string::npos);
  }
}

TEST(LoadCorpus, PublicationBeforeMeetingRejected) {
  TempDir dir;
  dir.write("a.txt", "Alpha.");
  dir.write("m.csv", "meeting_date,publication_date,path\n2006-01-31,2006-01-01,a.txt\n");
  EXPECT_THROW(load_corpus(dir.path() / "m.csv"), Error);
}

TEST(LoadMacro, ThreeRows) {
  auto t = parse_macro(parse_delimited("month,HCPI\n2006-01,2.1\n2006-02,2.2\n2006-03,2.0\n", "m"));
  EXPECT_EQ(t.months, 3u);
  EXPECT_EQ(format_month(t.start), "2006-01");
  EXPECT_DOUBLE_EQ(*t.column("HCPI")[2], 2.0);
}

TEST(LoadMacro, GapIsMissing) {
  auto t = parse_macro(parse_delimited("month,HCPI\n2006-03,2.0\n2006-01,2.1\n", "m"));
  ASSERT_EQ(t.months, 3u);
  EXPECT_TRUE(t.column("HCPI")[0].has_value());
  EXPECT_FALSE(t.column("HCPI")[1].has_value());
  EXPECT_TRUE(std::isnan(t.series("HCPI").values[1]));
}

TEST(LoadMacro, DuplicateMonth) {
  try {
    parse_macro(parse_delimited("month,HCPI\n2006-01,1\n2006-02,2\n2006-02,3\n", "m"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Format);
  }
}

TEST(LoadMacro, NonNumericCellNamesRowAndColumn) {
  try {
    parse_macro(parse_delimited("month,HCPI,y\n2006-01,1,abc\n", "macro.csv"));
    FAIL();
  } catch (const Error& e) {
    std::string msg = e.what();
    EXPECT_NE(msg.find("macro.csv:2"), std::string::npos);
    EXPECT_NE(msg.find("'y'"), std::string::npos);
  }
}
