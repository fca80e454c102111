// Scores each line of stdin as one sentence with a polarity/valence lexicon.
// usage: score_sentences <lexicon.csv> [more lexicons...] < sentences.txt

#include <iostream>
#include <string>

#include <fmt/format.h>

#include "sentiflow/config.hpp"
#include "sentiflow/sentiment.hpp"

int main(int argc, char** argv) {
  using namespace sentiflow;
  if (argc < 2) {
    std::cerr << "usage: score_sentences <lexicon.csv>... < sentences.txt\n";
    return 2;
  }
  try {
    sentiment::ScoringResources res;
    for (int i = 1; i < argc; ++i) res.lexicon.merge(sentiment::load_lexicon(argv[i]));
    res.keywords = sentiment::load_word_list(RunConfig::default_keywords().resolved());
    res.concentrated = sentiment::load_word_list(RunConfig::default_concentrated().resolved());
    std::cout << "Word0\tWord1\tWord2\tWord3\tWord4\tsentence\n";
    std::string line;
    while (std::getline(std::cin, line)) {
      if (trim(line).empty()) continue;
      auto s = sentiment::score_sentence(corpus::tokenize(line), res);
      std::cout << fmt::format("{}\t{:.4f}\t{:.4f}\t{:.4f}\t{:.4f}\t{}\n", s.word0, s.word1, s.word2, s.word3,
                               s.word4, line);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  }
  return 0;
}
