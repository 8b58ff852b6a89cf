#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace lem {

using TokenId = std::int32_t;

// Word index carried by special tokens.
inline constexpr std::int64_t kNoWord = -1;

inline constexpr std::size_t kDefaultMaxSequenceLength = 120;

struct Token {
  TokenId id = 0;
  std::string surface;
  std::int64_t word_index = kNoWord;
  bool is_special = false;

  bool operator==(const Token&) const = default;
};

struct TokenizedSentence {
  std::uint64_t sentence_id = 0;
  std::vector<Token> tokens;

  // Number of non-special tokens (m).
  std::size_t subword_count() const;
  // Number of distinct words referenced by non-special tokens.
  std::size_t word_count() const;
  std::vector<std::size_t> non_special_positions() const;

  // Surfaces joined within a word, words joined by single spaces.
  std::string detokenize() const;

  bool operator==(const TokenizedSentence&) const = default;
};

struct SpecialIds {
  TokenId bos = 0;
  TokenId eos = 0;
  TokenId sep = 0;
  TokenId mask = 0;
  TokenId pad = 0;
  TokenId unk = 0;

  std::vector<TokenId> all() const { return {bos, eos, sep, mask, pad, unk}; }
};

// Immutable token table plus special-id assignments.
class Vocabulary {
 public:
  Vocabulary(std::vector<std::string> tokens, SpecialIds specials,
             std::string continuation_prefix = {});

  // Plain-text vocab (one token per line, line number = id) and a JSON
  // manifest naming the specials, e.g. {"bos": "<s>", "mask": 4, ...}.
  static Vocabulary from_files(const std::filesystem::path& vocab_path,
                               const std::filesystem::path& specials_path);

  std::size_t size() const { return tokens_.size(); }
  const SpecialIds& specials() const { return specials_; }
  const std::string& continuation_prefix() const { return continuation_prefix_; }

  bool contains(std::string_view token) const;
  // Id of `token`, or -1.
  TokenId find(std::string_view token) const;
  const std::string& token(TokenId id) const;
  bool is_special(TokenId id) const;

  // Ids that are not special, ascending; the pool for random replacement.
  const std::vector<TokenId>& regular_ids() const { return regular_ids_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
  SpecialIds specials_;
  std::string continuation_prefix_;
  std::vector<TokenId> regular_ids_;
};

// Sub-word tokenizer adapter. Implementations never let a token span a
// whitespace boundary.
class Tokenizer {
 public:
  virtual ~Tokenizer() = default;

  virtual TokenizedSentence tokenize(std::string_view text,
                                     std::uint64_t sentence_id = 0) const = 0;
  virtual const Vocabulary& vocab() const = 0;
};

// Greedy longest-match over a plain vocabulary. An unmatched code point
// becomes a single unk token carrying that code point as its surface.
class GreedySubwordTokenizer : public Tokenizer {
 public:
  explicit GreedySubwordTokenizer(Vocabulary vocab) : vocab_(std::move(vocab)) {}

  TokenizedSentence tokenize(std::string_view text,
                             std::uint64_t sentence_id = 0) const override;
  const Vocabulary& vocab() const override { return vocab_; }

 private:
  Vocabulary vocab_;
};

// WordPiece model as serialized in a Hugging Face `tokenizer.json`
// (model.type == "WordPiece"). Continuation pieces carry the model's prefix
// ("##"); a word that cannot be fully covered becomes one unk token.
class WordPieceTokenizer : public Tokenizer {
 public:
  WordPieceTokenizer(Vocabulary vocab, std::size_t max_input_chars_per_word = 100)
      : vocab_(std::move(vocab)), max_chars_(max_input_chars_per_word) {}

  // `specials_path` maps bos/eos/sep/mask/pad/unk to token strings or ids.
  static WordPieceTokenizer from_json(const std::filesystem::path& tokenizer_json,
                                      const std::filesystem::path& specials_path);

  TokenizedSentence tokenize(std::string_view text,
                             std::uint64_t sentence_id = 0) const override;
  const Vocabulary& vocab() const override { return vocab_; }

 private:
  Vocabulary vocab_;
  std::size_t max_chars_;
};

// Concatenated translation pair: [bos] src [sep] tgt [eos].
struct TokenizedPair {
  std::uint64_t pair_id = 0;
  TokenizedSentence sequence;
  std::size_t src_count = 0;   // k: non-special source tokens
  std::size_t tgt_count = 0;   // l: non-special target tokens
  std::size_t src_offset = 1;  // position of the first source token
  std::size_t tgt_offset = 0;  // position of the first target token
};

// Target word indexes are shifted by tgt_offset so words stay unique across
// the pair. Throws ConfigError on an empty side and TruncationError when the
// result would exceed `max_length` tokens.
TokenizedPair concat_pair(const TokenizedSentence& src, const TokenizedSentence& tgt,
                          const Vocabulary& vocab, std::uint64_t pair_id = 0,
                          std::size_t max_length = kDefaultMaxSequenceLength);

}  // namespace lem
