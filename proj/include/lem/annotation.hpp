#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "lem/tokenization.hpp"

namespace lem {

// Declaration order is overlap precedence: NE beats VB beats NN.
enum class EntityLabel : std::uint8_t { kNE = 0, kVB = 1, kNN = 2 };

std::string_view to_string(EntityLabel label);
std::optional<EntityLabel> parse_entity_label(std::string_view text);

struct WordSpan {
  EntityLabel label = EntityLabel::kNE;
  std::size_t word_start = 0;
  std::size_t word_end = 0;  // inclusive

  bool operator==(const WordSpan&) const = default;
};

struct EntitySpan {
  EntityLabel label = EntityLabel::kNE;
  std::size_t word_start = 0;
  std::size_t word_end = 0;
  std::size_t token_start = 0;
  std::size_t token_end = 0;  // inclusive

  std::size_t token_length() const { return token_end - token_start + 1; }
  bool operator==(const EntitySpan&) const = default;
};

struct EntityDictionaryEntry {
  std::uint64_t sentence_id = 0;
  std::vector<EntitySpan> spans;

  bool operator==(const EntityDictionaryEntry&) const = default;
};

enum class TagScheme { kBioNer, kPos };

// Which POS tags count as nouns and verbs for one tagger.
struct TagsetConfig {
  std::set<std::string> noun_tags;
  std::set<std::string> verb_tags;

  static TagsetConfig penn_english();
  // JSON: {"noun": [...], "verb": [...]}
  static TagsetConfig from_json_file(const std::filesystem::path& path);
};

struct TaggedSentence {
  std::vector<std::string> words;
  std::vector<WordSpan> spans;
};

struct TagFileResult {
  std::vector<TaggedSentence> sentences;
  std::vector<std::string> warnings;
};

// CoNLL-style input: `word TAB tag` per line, blank line between sentences.
// A blank line directly after another blank line yields an empty sentence.
TagFileResult parse_tag_stream(std::istream& in, TagScheme scheme,
                               const TagsetConfig& tagset = TagsetConfig::penn_english());
TagFileResult parse_tag_file(const std::filesystem::path& path, TagScheme scheme,
                             const TagsetConfig& tagset = TagsetConfig::penn_english());

// Spans become non-overlapping at token level. Processing order is
// (precedence, token_start, token_end); a later span keeps only the
// contiguous runs of its tokens that are still free, each run becoming its
// own span. Word bounds of the remnants are read from `toks`.
std::vector<EntitySpan> resolve_overlaps(std::vector<EntitySpan> spans,
                                         const TokenizedSentence& toks);

// Maps word spans onto token ranges and resolves overlaps. Throws
// AlignmentError when a span references a word that has no tokens.
EntityDictionaryEntry align_spans(const std::vector<WordSpan>& spans,
                                  const TokenizedSentence& toks);

// Offsets an entry's spans into the coordinates of a concatenated pair.
EntityDictionaryEntry shift_entry(const EntityDictionaryEntry& entry,
                                  std::size_t token_shift, std::size_t word_shift);

}  // namespace lem
