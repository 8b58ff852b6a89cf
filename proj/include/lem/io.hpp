#pragma once

// JSONL readers and writers for the pipeline's interchange files.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "lem/annotation.hpp"
#include "lem/corpus.hpp"
#include "lem/curation.hpp"
#include "lem/masking.hpp"
#include "lem/tokenization.hpp"

namespace lem::io {

std::vector<std::string> read_lines(const std::filesystem::path& path);

std::vector<SentenceRecord> read_records(const std::filesystem::path& path);
void write_records(std::ostream& out, const std::vector<SentenceRecord>& records);
void write_drops(std::ostream& out, const std::vector<DropRecord>& drops);

// {sentence_id, ids, words, specials}; words use -1 for specials.
void write_tokenized(std::ostream& out, const TokenizedSentence& toks);
std::vector<TokenizedSentence> read_tokenized(const std::filesystem::path& path);

// {sentence_id, spans: [{label, ws, we, ts, te}]}
void write_entry(std::ostream& out, const EntityDictionaryEntry& entry);
std::vector<EntityDictionaryEntry> read_dictionary(const std::filesystem::path& path);

// {ids, labels, mode, meta}
void write_masked(std::ostream& out, const MaskedExample& ex, const MaskingConfig& cfg);

// {id, src, tgt}
std::unordered_map<std::uint64_t, PairText> read_pair_texts(const std::filesystem::path& path);

// LID label TSV: line TAB lang TAB confidence (1-based line numbers).
std::map<std::size_t, LidLabel> read_lid_labels(const std::filesystem::path& path);

// Pair manifest TSV: pair_id TAB src_sentence_id TAB tgt_sentence_id.
struct PairRef {
  std::uint64_t pair_id = 0;
  std::uint64_t src_id = 0;
  std::uint64_t tgt_id = 0;
};
std::vector<PairRef> read_pair_refs(const std::filesystem::path& path);

// Writes to a sibling temp file and renames over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace lem::io
