#include "lem/masking.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lem/error.hpp"

namespace lem {

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::kLEM: return "lem";
    case Strategy::kSubword: return "subword";
    case Strategy::kWholeWord: return "wholeword";
    case Strategy::kSpan: return "span";
    case Strategy::kTLMRandom: return "tlm";
  }
  return "?";
}

Strategy parse_strategy(std::string_view text) {
  if (text == "lem") return Strategy::kLEM;
  if (text == "subword") return Strategy::kSubword;
  if (text == "wholeword") return Strategy::kWholeWord;
  if (text == "span") return Strategy::kSpan;
  if (text == "tlm") return Strategy::kTLMRandom;
  throw ConfigError("unknown masking strategy '" + std::string(text) + "'");
}

std::string_view to_string(MaskMode mode) {
  return mode == MaskMode::kMono ? "mono" : "para";
}

void MaskingConfig::validate() const {
  if (!(recipe.budget_fraction > 0.0 && recipe.budget_fraction <= 1.0)) {
    throw ConfigError("budget fraction must lie in (0, 1]");
  }
  if (tokens_per_entity < 1 || tokens_per_entity > 4) {
    throw ConfigError("tokens per entity must lie in [1, 4]");
  }
  const auto& c = corruption;
  if (c.p_mask < 0 || c.p_random < 0 || c.p_keep < 0 ||
      std::abs(c.p_mask + c.p_random + c.p_keep - 1.0) > 1e-9) {
    throw ConfigError("corruption probabilities must be non-negative and sum to 1");
  }
  if (!(span_geometric_p > 0.0 && span_geometric_p <= 1.0)) {
    throw ConfigError("span geometric p must lie in (0, 1]");
  }
  if (span_max < 1) throw ConfigError("span_max must be at least 1");
}

std::size_t compute_budget(std::size_t m, double fraction) {
  if (m == 0) throw ConfigError("cannot mask a sequence with no regular tokens");
  const auto raw = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(m)));
  return std::min(m, std::max<std::size_t>(1, raw));
}

namespace {

// Draw-order bookkeeping, sorted into a Selection at the end.
class SelectionBuilder {
 public:
  explicit SelectionBuilder(std::size_t sequence_length) : taken_(sequence_length, false) {}

  bool taken(std::size_t pos) const { return taken_[pos]; }
  std::size_t size() const { return picks_.size(); }

  void add(std::size_t pos, SelectionPhase phase) {
    if (taken_[pos]) return;
    taken_[pos] = true;
    picks_.emplace_back(pos, phase);
  }

  Selection finish(std::size_t budget) {
    std::sort(picks_.begin(), picks_.end());
    Selection s;
    s.budget = budget;
    s.positions.reserve(picks_.size());
    s.phases.reserve(picks_.size());
    for (auto [pos, phase] : picks_) {
      s.positions.push_back(pos);
      s.phases.push_back(phase);
    }
    s.overshoot = picks_.size() > budget ? picks_.size() - budget : 0;
    return s;
  }

 private:
  std::vector<bool> taken_;
  std::vector<std::pair<std::size_t, SelectionPhase>> picks_;
};

void draw_remainder(const std::vector<std::size_t>& regular, std::size_t budget,
                    SelectionBuilder& b, CounterRng& rng) {
  if (b.size() >= budget) return;
  std::vector<std::size_t> pool;
  pool.reserve(regular.size());
  for (auto p : regular) {
    if (!b.taken(p)) pool.push_back(p);
  }
  for (auto p : draw_without_replacement(std::move(pool), budget - b.size(), rng)) {
    b.add(p, SelectionPhase::kFallback);
  }
}

Selection select_entity_first(const TokenizedSentence& toks, std::vector<EntitySpan> spans,
                              std::size_t budget, std::size_t k, CounterRng& rng) {
  // Canonical order first so the shuffle does not depend on input order.
  std::sort(spans.begin(), spans.end(), [](const EntitySpan& a, const EntitySpan& b) {
    return std::pair(a.token_start, a.token_end) < std::pair(b.token_start, b.token_end);
  });
  shuffle(spans, rng);

  SelectionBuilder b(toks.tokens.size());
  for (const auto& span : spans) {
    if (b.size() >= budget) break;
    std::vector<std::size_t> pool;
    for (std::size_t p = span.token_start; p <= span.token_end; ++p) {
      if (!toks.tokens[p].is_special && !b.taken(p)) pool.push_back(p);
    }
    const std::size_t take = std::min({k, pool.size(), budget - b.size()});
    for (auto p : draw_without_replacement(std::move(pool), take, rng)) {
      b.add(p, SelectionPhase::kEntity);
    }
  }
  draw_remainder(toks.non_special_positions(), budget, b, rng);
  return b.finish(budget);
}

std::vector<EntitySpan> recipe_spans(const EntityDictionaryEntry& entry,
                                     const MaskingRecipe& recipe) {
  std::vector<EntitySpan> out;
  for (const auto& s : entry.spans) {
    if (recipe.includes(s.label)) out.push_back(s);
  }
  return out;
}

struct WordUnit {
  std::vector<std::size_t> positions;
  std::size_t segment = 0;
};

// Words in sequence order; segments are runs of regular tokens separated by
// specials, so spans never cross from source into target.
std::vector<WordUnit> word_units(const TokenizedSentence& toks) {
  std::vector<WordUnit> units;
  std::size_t segment = 0;
  bool last_special = true;
  std::int64_t last_word = kNoWord;
  for (std::size_t i = 0; i < toks.tokens.size(); ++i) {
    const auto& t = toks.tokens[i];
    if (t.is_special) {
      if (!last_special && !units.empty()) ++segment;
      last_special = true;
      continue;
    }
    if (last_special || t.word_index != last_word) {
      units.push_back({{}, segment});
    }
    units.back().positions.push_back(i);
    last_special = false;
    last_word = t.word_index;
  }
  return units;
}

}  // namespace

std::size_t sample_span_length(double p, std::size_t max, CounterRng& rng) {
  std::vector<double> cdf(max);
  double acc = 0.0;
  double mass = p;
  for (std::size_t l = 0; l < max; ++l) {
    acc += mass;
    cdf[l] = acc;
    mass *= (1.0 - p);
  }
  const double u = rng.uniform01() * acc;
  for (std::size_t l = 0; l < max; ++l) {
    if (u < cdf[l]) return l + 1;
  }
  return max;
}

Selection select_positions_lem(const TokenizedSentence& toks,
                               const EntityDictionaryEntry& entry,
                               const MaskingConfig& cfg, CounterRng& rng) {
  const std::size_t budget = compute_budget(toks.subword_count(), cfg.recipe.budget_fraction);
  return select_entity_first(toks, recipe_spans(entry, cfg.recipe), budget,
                             cfg.tokens_per_entity, rng);
}

Selection select_positions_baseline(const TokenizedSentence& toks,
                                    const MaskingConfig& cfg, CounterRng& rng) {
  const auto regular = toks.non_special_positions();
  const std::size_t m = regular.size();
  const std::size_t budget = compute_budget(m, cfg.recipe.budget_fraction);
  SelectionBuilder b(toks.tokens.size());

  switch (cfg.strategy) {
    case Strategy::kLEM:
      throw ConfigError("LEM selection needs an entity dictionary");
    case Strategy::kSubword:
    case Strategy::kTLMRandom:
      draw_remainder(regular, budget, b, rng);
      break;
    case Strategy::kWholeWord: {
      auto units = word_units(toks);
      std::vector<std::size_t> order(units.size());
      std::iota(order.begin(), order.end(), 0);
      shuffle(order, rng);
      for (auto u : order) {
        if (b.size() >= budget) break;
        for (auto p : units[u].positions) b.add(p, SelectionPhase::kUnit);
      }
      break;
    }
    case Strategy::kSpan: {
      const auto units = word_units(toks);
      while (b.size() < budget && b.size() < m) {
        const std::size_t len = sample_span_length(cfg.span_geometric_p, cfg.span_max, rng);
        const auto start = static_cast<std::size_t>(rng.uniform_below(units.size()));
        for (std::size_t w = start; w < units.size() && w < start + len; ++w) {
          if (units[w].segment != units[start].segment) break;
          for (auto p : units[w].positions) b.add(p, SelectionPhase::kUnit);
        }
      }
      break;
    }
  }
  return b.finish(budget);
}

Selection select_positions_pair(const TokenizedPair& pair,
                                const EntityDictionaryEntry& src_entry,
                                const EntityDictionaryEntry& tgt_entry,
                                const MaskingConfig& cfg, CounterRng& rng) {
  auto spans = recipe_spans(shift_entry(src_entry, pair.src_offset, 0), cfg.recipe);
  for (const auto& s :
       recipe_spans(shift_entry(tgt_entry, pair.tgt_offset, pair.tgt_offset), cfg.recipe)) {
    spans.push_back(s);
  }
  for (const auto& s : spans) {
    if (s.token_end >= pair.sequence.tokens.size()) {
      throw AlignmentError("entity span outside pair " + std::to_string(pair.pair_id));
    }
  }
  const std::size_t budget =
      compute_budget(pair.src_count + pair.tgt_count, cfg.recipe.budget_fraction);
  return select_entity_first(pair.sequence, std::move(spans), budget,
                             cfg.tokens_per_entity, rng);
}

MaskedExample apply_corruption(const TokenizedSentence& toks, const Selection& selection,
                               const Vocabulary& vocab, const MaskingConfig& cfg,
                               CounterRng& rng) {
  MaskedExample ex;
  ex.id = toks.sentence_id;
  ex.input_ids.reserve(toks.tokens.size());
  for (const auto& t : toks.tokens) ex.input_ids.push_back(t.id);
  ex.labels.assign(toks.tokens.size(), cfg.ignore_index);
  ex.selected = selection.positions;
  ex.corruption.reserve(selection.positions.size());

  const auto& pool = vocab.regular_ids();
  const double mask_cut = cfg.corruption.p_mask;
  const double random_cut = cfg.corruption.p_mask + cfg.corruption.p_random;
  for (auto pos : selection.positions) {
    if (pos >= toks.tokens.size() || toks.tokens[pos].is_special) {
      throw ConfigError("selected position " + std::to_string(pos) +
                        " is not a regular token");
    }
    ex.labels[pos] = toks.tokens[pos].id;
    const double u = rng.uniform01();
    if (u < mask_cut) {
      ex.input_ids[pos] = vocab.specials().mask;
      ex.corruption.push_back(Corruption::kMask);
    } else if (u < random_cut) {
      ex.input_ids[pos] = pool[static_cast<std::size_t>(rng.uniform_below(pool.size()))];
      ex.corruption.push_back(Corruption::kRandom);
    } else {
      ex.corruption.push_back(Corruption::kKeep);
    }
  }
  return ex;
}

TokenizedSentence wrap_sentence(const TokenizedSentence& toks, const Vocabulary& vocab) {
  const auto& sp = vocab.specials();
  TokenizedSentence out;
  out.sentence_id = toks.sentence_id;
  out.tokens.reserve(toks.tokens.size() + 2);
  out.tokens.push_back({sp.bos, vocab.token(sp.bos), kNoWord, true});
  out.tokens.insert(out.tokens.end(), toks.tokens.begin(), toks.tokens.end());
  out.tokens.push_back({sp.eos, vocab.token(sp.eos), kNoWord, true});
  return out;
}

CounterRng example_stream(const MaskingConfig& cfg, MaskMode mode, std::uint64_t id,
                          StreamPurpose purpose) {
  const std::uint64_t seed = CounterRng::finalize(cfg.seed) ^ (cfg.epoch * CounterRng::kGamma);
  const std::uint64_t tag =
      static_cast<std::uint64_t>(purpose) | (mode == MaskMode::kPara ? 0x100u : 0u);
  return CounterRng::stream(seed, id, tag);
}

MaskedExample mask_sentence(const TokenizedSentence& toks,
                            const EntityDictionaryEntry& entry, const Vocabulary& vocab,
                            const MaskingConfig& cfg) {
  cfg.validate();
  auto select_rng = example_stream(cfg, MaskMode::kMono, toks.sentence_id, StreamPurpose::kSelect);
  const Selection sel = cfg.strategy == Strategy::kLEM
                            ? select_positions_lem(toks, entry, cfg, select_rng)
                            : select_positions_baseline(toks, cfg, select_rng);
  auto corrupt_rng =
      example_stream(cfg, MaskMode::kMono, toks.sentence_id, StreamPurpose::kCorrupt);
  auto ex = apply_corruption(toks, sel, vocab, cfg, corrupt_rng);
  ex.mode = MaskMode::kMono;
  return ex;
}

MaskedExample mask_pair(const TokenizedPair& pair, const EntityDictionaryEntry& src_entry,
                        const EntityDictionaryEntry& tgt_entry, const Vocabulary& vocab,
                        const MaskingConfig& cfg) {
  cfg.validate();
  auto select_rng = example_stream(cfg, MaskMode::kPara, pair.pair_id, StreamPurpose::kSelect);
  const Selection sel =
      cfg.strategy == Strategy::kLEM
          ? select_positions_pair(pair, src_entry, tgt_entry, cfg, select_rng)
          : select_positions_baseline(pair.sequence, cfg, select_rng);
  auto corrupt_rng = example_stream(cfg, MaskMode::kPara, pair.pair_id, StreamPurpose::kCorrupt);
  auto ex = apply_corruption(pair.sequence, sel, vocab, cfg, corrupt_rng);
  ex.id = pair.pair_id;
  ex.mode = MaskMode::kPara;
  ex.tgt_offset = pair.tgt_offset;
  return ex;
}

}  // namespace lem
