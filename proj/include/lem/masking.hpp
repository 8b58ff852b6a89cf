#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "lem/annotation.hpp"
#include "lem/rng.hpp"
#include "lem/tokenization.hpp"

namespace lem {

enum class BaseMode { kMLM, kTLM };

// "100%NE+100%VB+15%MLM": entity classes sampled first (in any order), then
// the budget fraction and the base objective.
struct MaskingRecipe {
  std::vector<EntityLabel> entity_classes;
  double budget_fraction = 0.15;
  BaseMode base_mode = BaseMode::kMLM;

  bool includes(EntityLabel label) const;
  std::string to_string() const;
  bool operator==(const MaskingRecipe&) const = default;
};

// Throws ParseError carrying the byte offset of the first bad character.
MaskingRecipe parse_recipe(std::string_view text);

enum class Strategy { kLEM, kSubword, kWholeWord, kSpan, kTLMRandom };

std::string_view to_string(Strategy s);
Strategy parse_strategy(std::string_view text);

struct CorruptionRule {
  double p_mask = 0.8;
  double p_random = 0.1;
  double p_keep = 0.1;
};

inline constexpr std::int64_t kDefaultIgnoreIndex = -100;

struct MaskingConfig {
  MaskingRecipe recipe;
  std::size_t tokens_per_entity = 1;
  CorruptionRule corruption;
  Strategy strategy = Strategy::kLEM;
  double span_geometric_p = 0.2;
  std::size_t span_max = 10;
  std::uint64_t seed = 0;
  std::uint64_t epoch = 0;
  std::int64_t ignore_index = kDefaultIgnoreIndex;

  void validate() const;
};

// B = max(1, floor(fraction * m)). Throws ConfigError for m == 0.
std::size_t compute_budget(std::size_t m, double fraction);

enum class SelectionPhase : std::uint8_t {
  kEntity,    // drawn from an entity span, at most k per span
  kFallback,  // remainder drawn from any free non-special token
  kUnit,      // whole word or span baselines
};

struct Selection {
  std::vector<std::size_t> positions;  // ascending
  std::vector<SelectionPhase> phases;  // parallel to positions
  std::size_t budget = 0;
  std::size_t overshoot = 0;  // whole-word/span units only

  std::size_t size() const { return positions.size(); }
};

// Entity-first selection for one sentence. Spans whose label is in the recipe
// are visited in a uniformly shuffled order; each contributes up to k
// uniformly drawn tokens until the budget is met, then the remainder is drawn
// from every free non-special token.
Selection select_positions_lem(const TokenizedSentence& toks,
                               const EntityDictionaryEntry& entry,
                               const MaskingConfig& cfg, CounterRng& rng);

Selection select_positions_baseline(const TokenizedSentence& toks,
                                    const MaskingConfig& cfg, CounterRng& rng);

// LEM over a concatenated pair; entries are in single-sentence coordinates
// and are shifted here. The budget is taken over k + l tokens.
Selection select_positions_pair(const TokenizedPair& pair,
                                const EntityDictionaryEntry& src_entry,
                                const EntityDictionaryEntry& tgt_entry,
                                const MaskingConfig& cfg, CounterRng& rng);

// Truncated geometric span length in words: P(L = l) proportional to
// p (1 - p)^(l - 1) for l in [1, max].
std::size_t sample_span_length(double p, std::size_t max, CounterRng& rng);

enum class MaskMode { kMono, kPara };
enum class Corruption : std::uint8_t { kMask, kRandom, kKeep };

std::string_view to_string(MaskMode mode);

struct MaskedExample {
  std::uint64_t id = 0;  // sentence id or pair id
  MaskMode mode = MaskMode::kMono;
  std::vector<TokenId> input_ids;
  std::vector<std::int64_t> labels;
  std::vector<std::size_t> selected;
  std::vector<Corruption> corruption;  // parallel to selected
  std::size_t tgt_offset = 0;          // para only: first target position

  bool operator==(const MaskedExample&) const = default;
};

// Independent draw per selected position: mask / random regular token /
// keep. Labels hold the original id at selected positions and
// cfg.ignore_index elsewhere.
MaskedExample apply_corruption(const TokenizedSentence& toks, const Selection& selection,
                               const Vocabulary& vocab, const MaskingConfig& cfg,
                               CounterRng& rng);

// [bos] tokens [eos], with the entry moved one position to the right.
TokenizedSentence wrap_sentence(const TokenizedSentence& toks, const Vocabulary& vocab);

// Selection + corruption on streams derived from (seed, epoch, id).
MaskedExample mask_sentence(const TokenizedSentence& toks,
                            const EntityDictionaryEntry& entry, const Vocabulary& vocab,
                            const MaskingConfig& cfg);

MaskedExample mask_pair(const TokenizedPair& pair, const EntityDictionaryEntry& src_entry,
                        const EntityDictionaryEntry& tgt_entry, const Vocabulary& vocab,
                        const MaskingConfig& cfg);

enum class StreamPurpose : std::uint64_t { kSelect = 1, kCorrupt = 2 };

CounterRng example_stream(const MaskingConfig& cfg, MaskMode mode, std::uint64_t id,
                          StreamPurpose purpose);

}  // namespace lem
