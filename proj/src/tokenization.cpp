#include "lem/tokenization.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <json.hpp>

#include "lem/error.hpp"
#include "lem/unicode.hpp"

namespace lem {

namespace {

using json = nlohmann::json;

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

TokenId resolve_special(const json& manifest, const char* key,
                        const std::unordered_map<std::string, TokenId>& index) {
  if (!manifest.contains(key)) {
    throw FormatError(std::string("specials manifest lacks \"") + key + "\"");
  }
  const auto& v = manifest.at(key);
  if (v.is_number_integer()) return v.get<TokenId>();
  if (v.is_string()) {
    const auto it = index.find(v.get<std::string>());
    if (it == index.end()) {
      throw FormatError(std::string("special \"") + key + "\" token '" +
                        v.get<std::string>() + "' is not in the vocabulary");
    }
    return it->second;
  }
  throw FormatError(std::string("special \"") + key + "\" must be a string or id");
}

SpecialIds specials_from_manifest(const json& manifest,
                                  const std::vector<std::string>& tokens) {
  std::unordered_map<std::string, TokenId> index;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    index.emplace(tokens[i], static_cast<TokenId>(i));
  }
  SpecialIds s;
  s.bos = resolve_special(manifest, "bos", index);
  s.eos = resolve_special(manifest, "eos", index);
  s.sep = resolve_special(manifest, "sep", index);
  s.mask = resolve_special(manifest, "mask", index);
  s.pad = resolve_special(manifest, "pad", index);
  s.unk = resolve_special(manifest, "unk", index);
  return s;
}

// Byte offsets of code point starts in `word`, plus word.size().
std::vector<std::size_t> boundaries(std::string_view word) {
  std::vector<std::size_t> b;
  for (const auto& cp : unicode::decode(word)) b.push_back(cp.offset);
  b.push_back(word.size());
  return b;
}

}  // namespace

std::size_t TokenizedSentence::subword_count() const {
  return static_cast<std::size_t>(std::count_if(
      tokens.begin(), tokens.end(), [](const Token& t) { return !t.is_special; }));
}

std::size_t TokenizedSentence::word_count() const {
  std::size_t count = 0;
  std::int64_t last = kNoWord;
  for (const auto& t : tokens) {
    if (t.is_special) continue;
    if (t.word_index != last) {
      ++count;
      last = t.word_index;
    }
  }
  return count;
}

std::vector<std::size_t> TokenizedSentence::non_special_positions() const {
  std::vector<std::size_t> out;
  out.reserve(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (!tokens[i].is_special) out.push_back(i);
  }
  return out;
}

std::string TokenizedSentence::detokenize() const {
  std::string out;
  std::int64_t last = kNoWord;
  for (const auto& t : tokens) {
    if (t.is_special) continue;
    if (last != kNoWord && t.word_index != last) out.push_back(' ');
    out += t.surface;
    last = t.word_index;
  }
  return out;
}

Vocabulary::Vocabulary(std::vector<std::string> tokens, SpecialIds specials,
                       std::string continuation_prefix)
    : tokens_(std::move(tokens)),
      specials_(specials),
      continuation_prefix_(std::move(continuation_prefix)) {
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], static_cast<TokenId>(i)).second) {
      throw FormatError("duplicate vocabulary entry '" + tokens_[i] + "' at id " +
                        std::to_string(i));
    }
  }
  const auto ids = specials_.all();
  const std::set<TokenId> distinct(ids.begin(), ids.end());
  if (distinct.size() != ids.size()) {
    throw FormatError("special token ids must be distinct");
  }
  for (TokenId id : ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
      throw FormatError("special token id " + std::to_string(id) +
                        " outside vocabulary of size " + std::to_string(tokens_.size()));
    }
  }
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!distinct.count(static_cast<TokenId>(i))) {
      regular_ids_.push_back(static_cast<TokenId>(i));
    }
  }
  if (regular_ids_.empty()) throw FormatError("vocabulary has no regular tokens");
}

Vocabulary Vocabulary::from_files(const std::filesystem::path& vocab_path,
                                  const std::filesystem::path& specials_path) {
  std::ifstream in(vocab_path);
  if (!in) throw Error("cannot open " + vocab_path.string());
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    tokens.push_back(line);
  }
  const auto manifest = read_json_file(specials_path);
  auto specials = specials_from_manifest(manifest, tokens);
  std::string prefix = manifest.value("continuation_prefix", std::string{});
  return Vocabulary(std::move(tokens), specials, std::move(prefix));
}

bool Vocabulary::contains(std::string_view token) const { return find(token) >= 0; }

TokenId Vocabulary::find(std::string_view token) const {
  const auto it = index_.find(std::string(token));
  return it == index_.end() ? -1 : it->second;
}

const std::string& Vocabulary::token(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    throw Error("token id " + std::to_string(id) + " out of range");
  }
  return tokens_[static_cast<std::size_t>(id)];
}

bool Vocabulary::is_special(TokenId id) const {
  const auto ids = specials_.all();
  return std::find(ids.begin(), ids.end(), id) != ids.end();
}

TokenizedSentence GreedySubwordTokenizer::tokenize(std::string_view text,
                                                   std::uint64_t sentence_id) const {
  TokenizedSentence out;
  out.sentence_id = sentence_id;
  const auto& prefix = vocab_.continuation_prefix();
  std::string candidate;
  std::int64_t word_index = 0;
  for (const auto word : unicode::split_words(text)) {
    const auto b = boundaries(word);
    std::size_t start = 0;  // index into b
    while (start + 1 < b.size()) {
      TokenId found = -1;
      std::size_t end = b.size() - 1;
      for (; end > start; --end) {
        candidate.assign(start == 0 ? std::string_view{} : std::string_view(prefix));
        candidate.append(word.substr(b[start], b[end] - b[start]));
        const TokenId id = vocab_.find(candidate);
        if (id >= 0 && !vocab_.is_special(id)) {
          found = id;
          break;
        }
      }
      if (found < 0) {
        end = start + 1;
        found = vocab_.specials().unk;
      }
      out.tokens.push_back({found, std::string(word.substr(b[start], b[end] - b[start])),
                            word_index, false});
      start = end;
    }
    ++word_index;
  }
  return out;
}

WordPieceTokenizer WordPieceTokenizer::from_json(
    const std::filesystem::path& tokenizer_json,
    const std::filesystem::path& specials_path) {
  const auto doc = read_json_file(tokenizer_json);
  if (!doc.contains("model") || !doc["model"].is_object()) {
    throw FormatError(tokenizer_json.string() + ": missing \"model\" object");
  }
  const auto& model = doc["model"];
  if (model.value("type", std::string{}) != "WordPiece") {
    throw FormatError(tokenizer_json.string() + ": only WordPiece models are supported");
  }
  const auto& table = model.at("vocab");
  std::vector<std::string> tokens(table.size());
  std::vector<bool> seen(table.size(), false);
  for (const auto& [piece, id_json] : table.items()) {
    const auto id = id_json.get<std::int64_t>();
    if (id < 0 || static_cast<std::size_t>(id) >= tokens.size() ||
        seen[static_cast<std::size_t>(id)]) {
      throw FormatError(tokenizer_json.string() + ": vocabulary ids are not a dense range");
    }
    tokens[static_cast<std::size_t>(id)] = piece;
    seen[static_cast<std::size_t>(id)] = true;
  }
  auto specials = specials_from_manifest(read_json_file(specials_path), tokens);
  Vocabulary vocab(std::move(tokens), specials,
                   model.value("continuing_subword_prefix", std::string("##")));
  return WordPieceTokenizer(std::move(vocab),
                            model.value("max_input_chars_per_word", std::size_t{100}));
}

TokenizedSentence WordPieceTokenizer::tokenize(std::string_view text,
                                               std::uint64_t sentence_id) const {
  TokenizedSentence out;
  out.sentence_id = sentence_id;
  const auto& prefix = vocab_.continuation_prefix();
  std::string candidate;
  std::int64_t word_index = 0;
  for (const auto word : unicode::split_words(text)) {
    const auto b = boundaries(word);
    std::vector<Token> pieces;
    bool bad = b.size() - 1 > max_chars_;
    std::size_t start = 0;
    while (!bad && start + 1 < b.size()) {
      TokenId found = -1;
      std::size_t end = b.size() - 1;
      for (; end > start; --end) {
        candidate.assign(start == 0 ? std::string_view{} : std::string_view(prefix));
        candidate.append(word.substr(b[start], b[end] - b[start]));
        const TokenId id = vocab_.find(candidate);
        if (id >= 0 && !vocab_.is_special(id)) {
          found = id;
          break;
        }
      }
      if (found < 0) {
        bad = true;
        break;
      }
      pieces.push_back({found, std::string(word.substr(b[start], b[end] - b[start])),
                        word_index, false});
      start = end;
    }
    if (bad) {
      out.tokens.push_back({vocab_.specials().unk, std::string(word), word_index, false});
    } else {
      for (auto& p : pieces) out.tokens.push_back(std::move(p));
    }
    ++word_index;
  }
  return out;
}

TokenizedPair concat_pair(const TokenizedSentence& src, const TokenizedSentence& tgt,
                          const Vocabulary& vocab, std::uint64_t pair_id,
                          std::size_t max_length) {
  if (src.tokens.empty() || tgt.tokens.empty()) {
    throw ConfigError("pair " + std::to_string(pair_id) + " has an empty side");
  }
  const std::size_t total = src.tokens.size() + tgt.tokens.size() + 3;
  if (max_length > 0 && total > max_length) {
    throw TruncationError("pair " + std::to_string(pair_id) + " needs " +
                          std::to_string(total) + " tokens, limit is " +
                          std::to_string(max_length));
  }
  const auto& sp = vocab.specials();
  TokenizedPair pair;
  pair.pair_id = pair_id;
  pair.sequence.sentence_id = pair_id;
  pair.src_offset = 1;
  pair.tgt_offset = src.tokens.size() + 2;
  pair.src_count = src.subword_count();
  pair.tgt_count = tgt.subword_count();

  auto& seq = pair.sequence.tokens;
  seq.reserve(total);
  seq.push_back({sp.bos, vocab.token(sp.bos), kNoWord, true});
  seq.insert(seq.end(), src.tokens.begin(), src.tokens.end());
  seq.push_back({sp.sep, vocab.token(sp.sep), kNoWord, true});
  const auto shift = static_cast<std::int64_t>(pair.tgt_offset);
  for (const auto& t : tgt.tokens) {
    Token shifted = t;
    if (!shifted.is_special) shifted.word_index += shift;
    seq.push_back(std::move(shifted));
  }
  seq.push_back({sp.eos, vocab.token(sp.eos), kNoWord, true});
  return pair;
}

}  // namespace lem
