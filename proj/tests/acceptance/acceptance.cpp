// Acceptance suite for the data pipeline. Prints one PASS/FAIL line per
// criterion and exits non-zero if any fails.

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lem/curation.hpp"
#include "lem/masking.hpp"
#include "lem/mining.hpp"
#include "lem_test_support.hpp"

namespace fs = std::filesystem;
using namespace lem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

struct Check {
  std::string name;
  double time_limit_s;  // 0 = none
  std::function<Outcome()> body;
};

const Vocabulary& vocab() {
  static const Vocabulary v = lem::testing::numbered_vocab(50);
  return v;
}

// Words of 1..max_word_len sub-words adding up to exactly m tokens, wrapped
// in bos/eos.
TokenizedSentence random_sentence(std::size_t m, std::size_t max_word_len, CounterRng& rng,
                                  std::uint64_t id) {
  std::vector<std::size_t> lengths;
  std::size_t total = 0;
  while (total < m) {
    const auto len = std::min<std::size_t>(1 + rng.uniform_below(max_word_len), m - total);
    lengths.push_back(len);
    total += len;
  }
  return wrap_sentence(lem::testing::sentence_from_word_lengths(lengths, id), vocab());
}

// Non-overlapping spans over the non-special positions [1, size-2].
EntityDictionaryEntry random_spans(const TokenizedSentence& s, CounterRng& rng,
                                   std::size_t max_gap, std::size_t max_len) {
  EntityDictionaryEntry e{s.sentence_id, {}};
  const std::size_t last = s.tokens.size() - 2;
  for (std::size_t p = 1 + rng.uniform_below(max_gap + 1); p <= last;) {
    const auto end = std::min(last, p + rng.uniform_below(max_len));
    e.spans.push_back({static_cast<EntityLabel>(rng.uniform_below(3)), 0, 0, p, end});
    p = end + 1 + rng.uniform_below(max_gap + 1);
  }
  return e;
}

MaskingConfig config_for(Strategy s, std::uint64_t seed, std::size_t k = 1) {
  MaskingConfig cfg;
  cfg.strategy = s;
  cfg.seed = seed;
  cfg.tokens_per_entity = k;
  cfg.recipe.entity_classes = {EntityLabel::kNE, EntityLabel::kVB, EntityLabel::kNN};
  return cfg;
}

// Largest token count of any unit the strategy can add at once.
std::size_t max_unit_size(const TokenizedSentence& s, Strategy strategy, std::size_t span_max) {
  std::vector<std::size_t> word_len;
  for (const auto& t : s.tokens) {
    if (t.is_special) continue;
    const auto w = static_cast<std::size_t>(t.word_index);
    if (word_len.size() <= w) word_len.resize(w + 1, 0);
    ++word_len[w];
  }
  const std::size_t window = strategy == Strategy::kSpan ? span_max : 1;
  std::size_t best = 0;
  for (std::size_t i = 0; i < word_len.size(); ++i) {
    std::size_t sum = 0;
    for (std::size_t j = i; j < std::min(word_len.size(), i + window); ++j) sum += word_len[j];
    best = std::max(best, sum);
  }
  return best;
}

Outcome budget_exactness() {
  Outcome o;
  CounterRng rng(1001);
  std::size_t checked = 0;
  for (std::uint64_t id = 0; id < 1000; ++id) {
    const std::size_t m = 2 + rng.uniform_below(199);
    const auto s = random_sentence(m, 4, rng, id);
    const auto entry = random_spans(s, rng, 4, 3);
    const std::size_t b = compute_budget(m, 0.15);
    for (auto strategy : {Strategy::kLEM, Strategy::kSubword, Strategy::kTLMRandom,
                          Strategy::kWholeWord, Strategy::kSpan}) {
      const auto cfg = config_for(strategy, rng.next_u64());
      const auto ex = mask_sentence(s, entry, vocab(), cfg);
      const std::size_t n = ex.selected.size();
      ++checked;
      if (strategy == Strategy::kWholeWord || strategy == Strategy::kSpan) {
        const auto hi = std::min(m, b + max_unit_size(s, strategy, cfg.span_max) - 1);
        if (n < b || n > hi) {
          o.fail(std::string(to_string(strategy)) + " m=" + std::to_string(m) +
                 " selected " + std::to_string(n));
        }
      } else if (n != b) {
        o.fail(std::string(to_string(strategy)) + " m=" + std::to_string(m) + " selected " +
               std::to_string(n) + " != " + std::to_string(b));
      }
      for (auto p : ex.selected) {
        if (s.tokens[p].is_special) o.fail("special position selected");
      }
    }
  }
  if (o.pass) o.detail = std::to_string(checked) + " maskings";
  return o;
}

Outcome entity_dominance() {
  Outcome o;
  CounterRng rng(2002);
  std::size_t sentences = 0;
  while (sentences < 500) {
    const std::size_t m = 10 + rng.uniform_below(191);
    const auto s = random_sentence(m, 3, rng, sentences);
    const auto entry = random_spans(s, rng, 2, 3);
    const std::size_t b = compute_budget(m, 0.15);
    std::size_t entity_tokens = 0;
    for (const auto& sp : entry.spans) entity_tokens += sp.token_length();
    if (entry.spans.size() < b || entity_tokens < b) continue;
    ++sentences;

    const auto cfg = config_for(Strategy::kLEM, rng.next_u64(), 1);
    const auto sel_rng_seed = rng.next_u64();
    CounterRng sel_rng(sel_rng_seed);
    const auto sel = select_positions_lem(s, entry, cfg, sel_rng);
    std::vector<std::size_t> per_span(entry.spans.size(), 0);
    for (std::size_t i = 0; i < sel.size(); ++i) {
      if (sel.phases[i] != SelectionPhase::kEntity) o.fail("fallback position used");
      bool inside = false;
      for (std::size_t j = 0; j < entry.spans.size(); ++j) {
        const auto& sp = entry.spans[j];
        if (sel.positions[i] >= sp.token_start && sel.positions[i] <= sp.token_end) {
          inside = true;
          ++per_span[j];
        }
      }
      if (!inside) o.fail("position " + std::to_string(sel.positions[i]) + " outside spans");
    }
    if (*std::max_element(per_span.begin(), per_span.end()) > 1) o.fail("span used twice");

    // the public entry point agrees
    const auto ex = mask_sentence(s, entry, vocab(), cfg);
    for (auto p : ex.selected) {
      const bool inside = std::any_of(entry.spans.begin(), entry.spans.end(), [&](const auto& sp) {
        return p >= sp.token_start && p <= sp.token_end;
      });
      if (!inside) o.fail("mask_sentence selected outside spans");
    }
  }
  if (o.pass) o.detail = "500 sentences";
  return o;
}

Outcome corruption_split() {
  Outcome o;
  CounterRng rng(3003);
  std::array<double, 3> counts{};
  double total = 0;
  std::uint64_t id = 0;
  while (total < 100000) {
    const auto s = random_sentence(20 + rng.uniform_below(181), 3, rng, id++);
    const auto entry = random_spans(s, rng, 3, 3);
    const auto ex = mask_sentence(s, entry, vocab(), config_for(Strategy::kLEM, 42));
    for (std::size_t i = 0; i < ex.selected.size(); ++i) {
      const auto p = ex.selected[i];
      const auto c = ex.corruption[i];
      counts[static_cast<std::size_t>(c)] += 1;
      total += 1;
      if (ex.labels[p] != s.tokens[p].id) o.fail("label differs from original id");
      if (c == Corruption::kMask && ex.input_ids[p] != vocab().specials().mask) o.fail("mask id");
      if (c == Corruption::kKeep && ex.input_ids[p] != s.tokens[p].id) o.fail("keep changed id");
      if (c == Corruption::kRandom && vocab().is_special(ex.input_ids[p])) o.fail("special as random");
    }
  }
  const std::array<double, 3> expected = {0.8, 0.1, 0.1};
  double chi2 = 0;
  std::ostringstream d;
  d.precision(4);
  d << static_cast<std::size_t>(total) << " positions, fractions";
  for (std::size_t c = 0; c < 3; ++c) {
    const double f = counts[c] / total;
    d << ' ' << f;
    if (std::abs(f - expected[c]) > 0.01) o.fail("fraction off by more than 0.01");
    const double e = expected[c] * total;
    chi2 += (counts[c] - e) * (counts[c] - e) / e;
  }
  const double p = lem::testing::chi_square_survival(chi2, 2);
  d << ", chi2 p=" << p;
  if (p <= 0.001) o.fail("chi-square p <= 0.001");
  if (o.pass) o.detail = d.str();
  return o;
}

Outcome tokens_per_entity() {
  Outcome o;
  std::ostringstream d;
  d.precision(5);
  for (std::size_t k = 1; k <= 4; ++k) {
    CounterRng rng(4000 + k);
    double measured = 0;
    double expected = 0;
    std::size_t spans = 0;
    std::uint64_t id = 0;
    while (spans < 10000) {
      const auto s = random_sentence(160 + rng.uniform_below(41), 1, rng, id++);
      // at most six spans of <= 6 tokens: sum of min(k, size) <= 24 <= B
      EntityDictionaryEntry entry{s.sentence_id, {}};
      std::size_t p = 1 + rng.uniform_below(10);
      for (int n = 0; n < 6; ++n) {
        const std::size_t len = 1 + rng.uniform_below(6);
        entry.spans.push_back({EntityLabel::kNE, 0, 0, p, p + len - 1});
        p += len + 1 + rng.uniform_below(15);
      }
      const auto cfg = config_for(Strategy::kLEM, 0, k);
      CounterRng sel_rng(rng.next_u64());
      const auto sel = select_positions_lem(s, entry, cfg, sel_rng);
      for (const auto& sp : entry.spans) {
        std::size_t picked = 0;
        for (std::size_t i = 0; i < sel.size(); ++i) {
          if (sel.phases[i] == SelectionPhase::kEntity && sel.positions[i] >= sp.token_start &&
              sel.positions[i] <= sp.token_end) {
            ++picked;
          }
        }
        measured += static_cast<double>(picked);
        expected += static_cast<double>(std::min(k, sp.token_length()));
        ++spans;
      }
    }
    measured /= static_cast<double>(spans);
    expected /= static_cast<double>(spans);
    d << (k > 1 ? ", " : "") << "k=" << k << " " << measured << " vs " << expected;
    if (std::abs(measured - expected) > 1e-2) o.fail("k=" + std::to_string(k) + " mean off");
  }
  if (o.pass) o.detail = d.str();
  return o;
}

using PairSet = std::set<std::pair<std::size_t, std::size_t>>;

PairSet mined_set(const EmbeddingMatrix& x, const EmbeddingMatrix& y, lem::Criterion c,
                  std::size_t block) {
  MiningConfig cfg;
  cfg.k_neighbors = 4;
  cfg.criterion = c;
  cfg.block_rows = block;
  PairSet out;
  for (const auto& p : mine(x, y, cfg).pairs) out.emplace(p.src_row, p.tgt_row);
  return out;
}

Outcome mining_oracle() {
  Outcome o;
  CounterRng rng(5005);
  std::size_t pairs = 0;
  for (int inst = 0; inst < 20; ++inst) {
    const std::size_t n = 20 + rng.uniform_below(181);
    const std::size_t m = 20 + rng.uniform_below(181);
    const std::size_t d = 2 + rng.uniform_below(31);
    const std::size_t block = inst % 2 == 0 ? 0 : 1 + rng.uniform_below(64);
    const auto x = l2_normalize(lem::testing::random_matrix(n, d, rng.next_u64()));
    const auto y = l2_normalize(lem::testing::random_matrix(m, d, rng.next_u64()));
    const auto oracle = lem::testing::brute_force_mining(x, y, 4);
    const auto fw = mined_set(x, y, lem::Criterion::kForward, block);
    const auto bw = mined_set(x, y, lem::Criterion::kBackward, block);
    const auto in = mined_set(x, y, lem::Criterion::kIntersection, block);
    const std::string where = "instance " + std::to_string(inst);
    if (fw != oracle.forward) o.fail(where + ": FW differs");
    if (bw != oracle.backward) o.fail(where + ": BW differs");
    if (in != oracle.intersection) o.fail(where + ": IN differs");
    PairSet both;
    std::set_intersection(fw.begin(), fw.end(), bw.begin(), bw.end(),
                          std::inserter(both, both.begin()));
    if (in != both) o.fail(where + ": IN != FW and BW");
    pairs += in.size();
  }
  if (o.pass) o.detail = "20 instances, " + std::to_string(pairs) + " IN pairs";
  return o;
}

Outcome recall_counts() {
  // Ten sources on their own axes. Each true translation shares the axis
  // plus a private offset; sources 0, 1 and 2 also get a planted distractor
  // that is closer than the translation.
  const std::size_t d = 16;
  auto axis = [&](std::vector<std::pair<std::size_t, float>> parts) {
    std::vector<float> v(d, 0.0f);
    for (auto [i, w] : parts) v[i] = w;
    return v;
  };
  std::vector<float> xs;
  std::vector<float> ys;
  std::vector<std::uint64_t> xid;
  std::vector<std::uint64_t> yid;
  for (std::size_t i = 0; i < 10; ++i) {
    auto v = axis({{i, 1.0f}});
    xs.insert(xs.end(), v.begin(), v.end());
    xid.push_back(i);
    auto t = axis({{i, 1.0f}, {10 + i % 6, 0.5f}});
    ys.insert(ys.end(), t.begin(), t.end());
    yid.push_back(100 + i);
  }
  for (std::size_t i = 0; i < 3; ++i) {
    auto t = axis({{i, 1.0f}, {15, 0.1f}});
    ys.insert(ys.end(), t.begin(), t.end());
    yid.push_back(200 + i);
  }
  const auto x = l2_normalize(EmbeddingMatrix(10, d, xs, xid));
  const auto y = l2_normalize(EmbeddingMatrix(13, d, ys, yid));
  std::vector<std::pair<std::uint64_t, std::uint64_t>> gold;
  for (std::uint64_t i = 0; i < 10; ++i) gold.emplace_back(i, 100 + i);
  const GoldAlignment g(gold);

  Outcome o;
  std::ostringstream det;
  // FW: sources 0-2 go to their distractors (7/10). BW: every translation
  // maps back to its source (10/10). IN keeps the FW choice (7/10).
  const std::array<std::pair<lem::Criterion, double>, 3> hand = {
      {{lem::Criterion::kForward, 7.0 / 10}, {lem::Criterion::kBackward, 10.0 / 10},
       {lem::Criterion::kIntersection, 7.0 / 10}}};
  for (auto [c, want] : hand) {
    MiningConfig cfg;
    cfg.criterion = c;
    const double r = recall(mine(x, y, cfg), g);
    det << to_string(c) << "=" << r << ' ';
    if (r != want) o.fail(std::string(to_string(c)) + " recall " + std::to_string(r));
  }
  // a gold set with two wrong references: 8/10 under BW
  auto shifted = gold;
  shifted[8].second = 109;
  shifted[9].second = 108;
  MiningConfig bw;
  bw.criterion = lem::Criterion::kBackward;
  const double r = recall(mine(x, y, bw), GoldAlignment(shifted));
  det << "bw(shuffled gold)=" << r;
  if (r != 0.8) o.fail("shuffled gold recall " + std::to_string(r));
  if (o.pass) o.detail = det.str();
  return o;
}

std::vector<std::string> read_lines(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

Outcome curation_prefix() {
  Outcome o;
  const auto dir = fs::temp_directory_path() / "lem_accept_curation";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto x = l2_normalize(lem::testing::random_matrix(1000, 24, 7001, 5000));
  auto yraw = lem::testing::random_matrix(1000, 24, 7002, 5000);
  std::vector<float> mixed = yraw.data();
  for (std::size_t i = 0; i < mixed.size(); ++i) mixed[i] = 0.6f * mixed[i] + x.data()[i];
  const auto y = l2_normalize(EmbeddingMatrix(1000, 24, mixed, yraw.ids()));
  const auto ranked = rank_pairs(score_pairs(x, y));
  for (std::size_t i = 1; i < ranked.size(); ++i) {
    if (ranked[i - 1].score < ranked[i].score) o.fail("not descending at rank " + std::to_string(i));
  }
  std::unordered_map<std::uint64_t, PairText> texts;
  for (auto id : x.ids()) texts[id] = {"src " + std::to_string(id), "tgt " + std::to_string(id)};
  const auto a = export_top_n(ranked, 100, texts, dir / "top100", "h");
  const auto b = export_top_n(ranked, 1000, texts, dir / "top1000", "h");
  for (const auto& [small, large] : {std::pair{a.src, b.src}, std::pair{a.tgt, b.tgt}}) {
    const auto s = read_lines(small);
    const auto l = read_lines(large);
    if (s.size() != 100 || l.size() != 1000 || !std::equal(s.begin(), s.end(), l.begin())) {
      o.fail("top-100 is not a prefix of top-1000");
    }
  }
  // manifest scores re-read exactly
  std::ifstream in(b.manifest);
  const auto manifest = nlohmann::json::parse(in);
  const auto rescored = rank_pairs(score_pairs(x, y));
  for (std::size_t i = 0; i < 1000; ++i) {
    const auto& e = manifest.at("pairs").at(i);
    if (e.at("pair_id").get<std::uint64_t>() != rescored[i].pair_id ||
        e.at("score").get<double>() != rescored[i].score) {
      o.fail("manifest score differs at rank " + std::to_string(i + 1));
      break;
    }
  }
  fs::remove_all(dir);
  if (o.pass) o.detail = "1000 pairs";
  return o;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(LEM_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism() {
  Outcome o;
  const auto toy = fs::path(LEM_DATA_DIR) / "toy";
  const auto dir = fs::temp_directory_path() / "lem_accept_pipeline";
  auto t = [&](const char* f) { return (toy / f).string(); };
  auto w = [&](const char* f) { return (dir / f).string(); };
  const std::string voc = " --vocab " + t("vocab.txt") + " --specials " + t("specials.json");
  const std::string emb = " --src-emb " + t("src.emb") + " --tgt-emb " + t("tgt.emb");
  const std::vector<std::string> steps = {
      "clean --in " + t("en.txt") + " --lang en --out " + w("en.jsonl"),
      "clean --in " + t("xx.txt") + " --lang xx --out " + w("xx.jsonl"),
      "tokenize --in " + w("en.jsonl") + " --out " + w("en.tok") + voc,
      "tokenize --in " + w("xx.jsonl") + " --out " + w("xx.tok") + voc,
      "annotate --tokens " + w("en.tok") + " --ner " + t("en.ner.conll") + " --pos " +
          t("en.pos.conll") + " --out " + w("en.dict"),
      "annotate --tokens " + w("xx.tok") + " --ner " + t("xx.ner.conll") + " --out " + w("xx.dict"),
      "mask --tokens " + w("en.tok") + " --dict " + w("en.dict") + voc +
          " --recipe 100%NE+100%VB+100%NN+15%MLM --seed 99 --out " + w("mono.jsonl"),
      "mask --mode para --tokens " + w("en.tok") + " --dict " + w("en.dict") + " --tgt-tokens " +
          w("xx.tok") + " --tgt-dict " + w("xx.dict") + " --pairs " + t("pairs.tsv") + voc +
          " --recipe 100%NE+15%TLM --seed 99 --out " + w("para.jsonl"),
      "mask --tokens " + w("en.tok") + voc +
          " --strategy span --recipe 15%MLM --seed 99 --out " + w("span.jsonl"),
      "mine" + emb + " --gold " + t("gold.tsv") + " --report " + w("mine.json"),
      "curate" + emb + " --pairs " + t("pairs.jsonl") + " --top 20 --out-prefix " + w("top"),
      "report --mining " + w("mine.json") + " --curation " + w("top.manifest.json") + " --out " +
          w("summary.json"),
  };
  const std::vector<const char*> compared = {"mono.jsonl", "para.jsonl", "span.jsonl",
                                             "mine.json", "top.src", "top.tgt",
                                             "top.manifest.json", "summary.json"};
  std::vector<std::string> first;
  for (int round = 0; round < 2; ++round) {
    fs::remove_all(dir);
    fs::create_directories(dir);
    for (const auto& step : steps) {
      if (run_cli(step) != 0) {
        o.fail("step failed: " + step.substr(0, step.find(' ')));
        return o;
      }
    }
    for (std::size_t i = 0; i < compared.size(); ++i) {
      const auto bytes = slurp(dir / compared[i]);
      if (bytes.empty()) o.fail(std::string(compared[i]) + " is empty");
      if (round == 0) {
        first.push_back(bytes);
      } else if (bytes != first[i]) {
        o.fail(std::string(compared[i]) + " differs between runs");
      }
    }
  }
  fs::remove_all(dir);
  if (o.pass) o.detail = std::to_string(compared.size()) + " artifacts byte-identical";
  return o;
}

}  // namespace

int main() {
  const std::vector<Check> criteria = {
      {"masking budget exactness", 5, budget_exactness},
      {"entity-priority dominance", 0, entity_dominance},
      {"corruption split 80/10/10", 10, corruption_split},
      {"tokens-per-entity mechanics", 0, tokens_per_entity},
      {"mining oracle equivalence", 30, mining_oracle},
      {"recall hand counts", 0, recall_counts},
      {"curation order and prefix", 0, curation_prefix},
      {"pipeline determinism", 0, determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto& c = criteria[i];
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.body();
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.time_limit_s > 0 && secs >= c.time_limit_s) {
      o.fail("took " + std::to_string(secs) + " s, limit " + std::to_string(c.time_limit_s));
    }
    char timing[32];
    std::snprintf(timing, sizeof timing, "%.2fs", secs);
    std::cout << (o.pass ? "PASS" : "FAIL") << "  [" << i + 1 << "] " << c.name << " ("
              << timing << ")  " << o.detail << std::endl;
    failures += o.pass ? 0 : 1;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
