#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "lem/error.hpp"
#include "lem/rng.hpp"
#include "lem/tokenization.hpp"
#include "lem_test_support.hpp"

using namespace lem;
using lem::testing::make_vocab;

TEST_CASE("greedy tokenizer aligns sub-words to words") {
  const GreedySubwordTokenizer tok(make_vocab({"Jack", "walk", "s"}));
  const auto t = tok.tokenize("Jack walks", 9);
  CHECK(t.sentence_id == 9);
  REQUIRE(t.tokens.size() == 3);
  CHECK(t.tokens[0].surface == "Jack");
  CHECK(t.tokens[0].word_index == 0);
  CHECK(t.tokens[1].surface == "walk");
  CHECK(t.tokens[1].word_index == 1);
  CHECK(t.tokens[2].surface == "s");
  CHECK(t.tokens[2].word_index == 1);
  CHECK(t.subword_count() == 3);
  CHECK(t.word_count() == 2);
  CHECK(t.detokenize() == "Jack walks");
}

TEST_CASE("empty input yields no tokens") {
  const GreedySubwordTokenizer tok(make_vocab({"a"}));
  CHECK(tok.tokenize("").tokens.empty());
  CHECK(tok.tokenize("   ").tokens.empty());
}

TEST_CASE("out-of-vocabulary code points map to unk one at a time") {
  const GreedySubwordTokenizer tok(make_vocab({"ab"}));
  const auto t = tok.tokenize("abé ab");
  REQUIRE(t.tokens.size() == 3);
  CHECK(t.tokens[0].id == 6);
  CHECK(t.tokens[1].id == 5);  // unk
  CHECK(t.tokens[1].surface == "é");
  CHECK(t.tokens[2].word_index == 1);
  CHECK(t.detokenize() == "abé ab");
}

TEST_CASE("special token strings are never matched as text") {
  const GreedySubwordTokenizer tok(make_vocab({"<", ">", "m", "a", "s", "k"}));
  const auto t = tok.tokenize("<mask>");
  for (const auto& token : t.tokens) CHECK(token.id != tok.vocab().specials().mask);
}

TEST_CASE("continuation prefix is applied to non-initial pieces") {
  const GreedySubwordTokenizer tok(make_vocab({"walk", "##s", "s"}, "##"));
  const auto t = tok.tokenize("walks s");
  REQUIRE(t.tokens.size() == 3);
  CHECK(t.tokens[1].id == tok.vocab().find("##s"));
  CHECK(t.tokens[1].surface == "s");
  CHECK(t.tokens[2].id == tok.vocab().find("s"));
}

TEST_CASE("vocabulary validation") {
  CHECK_THROWS_AS(Vocabulary({"a", "b"}, SpecialIds{0, 0, 0, 0, 0, 0}), FormatError);
  CHECK_THROWS_AS(Vocabulary({"a", "a", "b", "c", "d", "e", "f"}, SpecialIds{0, 1, 2, 3, 4, 5}),
                  FormatError);
  CHECK_THROWS_AS(Vocabulary({"a", "b", "c"}, SpecialIds{0, 1, 2, 3, 4, 5}), FormatError);
  const auto v = make_vocab({"x", "y"});
  CHECK(v.regular_ids() == std::vector<TokenId>{6, 7});
  CHECK(v.is_special(4));
  CHECK_FALSE(v.is_special(6));
}

TEST_CASE("vocab files and WordPiece tokenizer.json") {
  const auto dir = std::filesystem::temp_directory_path() / "lem_tok_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream(dir / "vocab.txt") << "<pad>\n<s>\n</s>\n<sep>\n<mask>\n<unk>\nun\nhappy\n";
    std::ofstream(dir / "specials.json")
        << R"({"bos":"<s>","eos":"</s>","sep":"<sep>","mask":"<mask>","pad":0,"unk":"<unk>"})";
    std::ofstream(dir / "bad_specials.json") << R"({"bos":"<s>","eos":"</s>","sep":"<sep>","pad":0,"unk":"<unk>"})";
    std::ofstream(dir / "tokenizer.json") << R"({"model":{"type":"WordPiece","unk_token":"[UNK]",
      "continuing_subword_prefix":"##","max_input_chars_per_word":100,
      "vocab":{"[PAD]":0,"[CLS]":1,"[SEP]":2,"[MASK]":3,"[UNK]":4,"[BOS]":5,
               "un":6,"##happy":7,"happy":8}}})";
    std::ofstream(dir / "wp_specials.json")
        << R"({"bos":"[BOS]","eos":"[CLS]","sep":"[SEP]","mask":"[MASK]","pad":"[PAD]","unk":"[UNK]"})";
  }
  const auto v = Vocabulary::from_files(dir / "vocab.txt", dir / "specials.json");
  CHECK(v.size() == 8);
  CHECK(v.specials().mask == 4);
  CHECK(GreedySubwordTokenizer(v).tokenize("unhappy").tokens.size() == 2);
  CHECK_THROWS_AS(Vocabulary::from_files(dir / "vocab.txt", dir / "bad_specials.json"), FormatError);

  const auto wp = WordPieceTokenizer::from_json(dir / "tokenizer.json", dir / "wp_specials.json");
  const auto t = wp.tokenize("unhappy happy unhappyx");
  REQUIRE(t.tokens.size() == 4);
  CHECK(t.tokens[0].id == 6);
  CHECK(t.tokens[1].id == 7);
  CHECK(t.tokens[1].surface == "happy");
  CHECK(t.tokens[2].id == 8);
  CHECK(t.tokens[3].id == 4);  // whole word falls back to unk
  CHECK(t.tokens[3].surface == "unhappyx");
  CHECK(t.detokenize() == "unhappy happy unhappyx");
  std::filesystem::remove_all(dir);
}

TEST_CASE("concat_pair layout") {
  const GreedySubwordTokenizer tok(make_vocab({"a", "b", "c", "d"}));
  const auto src = tok.tokenize("a b c");
  const auto tgt = tok.tokenize("d dd c d");  // "dd" -> d d, one word
  REQUIRE(src.subword_count() == 3);
  REQUIRE(tgt.subword_count() == 5);
  const auto pair = concat_pair(src, tgt, tok.vocab(), 11);
  const auto& seq = pair.sequence.tokens;
  CHECK(pair.pair_id == 11);
  CHECK(seq.size() == 3 + 5 + 3);
  CHECK(pair.sequence.subword_count() == 8);
  CHECK(pair.src_count == 3);
  CHECK(pair.tgt_count == 5);
  CHECK(pair.tgt_offset == src.tokens.size() + 2);
  CHECK(seq.front().id == tok.vocab().specials().bos);
  CHECK(seq[src.tokens.size() + 1].id == tok.vocab().specials().sep);
  CHECK(seq.back().id == tok.vocab().specials().eos);
  for (std::size_t i = 0; i < src.tokens.size(); ++i) CHECK(seq[i + 1] == src.tokens[i]);
  for (std::size_t i = 0; i < tgt.tokens.size(); ++i) {
    CHECK(seq[pair.tgt_offset + i].id == tgt.tokens[i].id);
    CHECK(seq[pair.tgt_offset + i].word_index ==
          tgt.tokens[i].word_index + static_cast<std::int64_t>(pair.tgt_offset));
  }
  CHECK(seq[0].is_special);
  CHECK(seq[4].is_special);
  CHECK(seq[10].is_special);
}

TEST_CASE("concat_pair errors") {
  const GreedySubwordTokenizer tok(make_vocab({"a"}));
  const auto src = tok.tokenize("a a a");
  CHECK_THROWS_AS(concat_pair(src, TokenizedSentence{}, tok.vocab()), ConfigError);
  std::string long_text;
  for (int i = 0; i < 60; ++i) long_text += "a ";
  const auto long_side = tok.tokenize(long_text);
  CHECK_THROWS_AS(concat_pair(long_side, long_side, tok.vocab()), TruncationError);
  CHECK_NOTHROW(concat_pair(long_side, long_side, tok.vocab(), 0, 0));
}

TEST_CASE("property: word_index partition reconstructs the word sequence") {
  const std::vector<std::string> pieces = {"ka", "ma", "la", "k", "m", "l", "a"};
  const GreedySubwordTokenizer tok(make_vocab(pieces));
  CounterRng rng(99);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<std::string> words;
    const auto n = 1 + rng.uniform_below(12);
    for (std::uint64_t w = 0; w < n; ++w) {
      std::string word;
      const auto len = 1 + rng.uniform_below(6);
      for (std::uint64_t c = 0; c < len; ++c) word += "kmlaé"[rng.uniform_below(4)];
      words.push_back(word);
    }
    std::string text;
    for (const auto& w : words) text += w + std::string(1 + rng.uniform_below(3), ' ');
    const auto t = tok.tokenize(text);

    std::vector<std::string> rebuilt;
    std::int64_t last = kNoWord;
    for (const auto& token : t.tokens) {
      CHECK(token.word_index >= last);
      if (token.word_index != last) rebuilt.emplace_back();
      rebuilt.back() += token.surface;
      last = token.word_index;
    }
    CHECK(rebuilt == words);
    CHECK(t.subword_count() == t.tokens.size());
  }
}
