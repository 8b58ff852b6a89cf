// Command-line front end for the masking and evaluation pipeline.
//
// Exit status: 0 success, 1 runtime failure, 2 usage or parse error,
// 3 manifest hash mismatch.

#include <algorithm>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lem/annotation.hpp"
#include "lem/corpus.hpp"
#include "lem/curation.hpp"
#include "lem/embeddings.hpp"
#include "lem/error.hpp"
#include "lem/io.hpp"
#include "lem/manifest.hpp"
#include "lem/masking.hpp"
#include "lem/mining.hpp"
#include "lem/tokenization.hpp"

namespace {

using json = nlohmann::json;

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;
constexpr int kExitHash = 3;

struct StageIo {
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
};

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw lem::Error("cannot open " + path + " for writing");
  return out;
}

void write_json(const std::string& path, const json& doc) {
  auto out = open_out(path);
  out << doc.dump(2) << '\n';
}

struct TokenizerOptions {
  std::string vocab;
  std::string specials;
  std::string hf_tokenizer;

  void add_to(CLI::App* cmd) {
    auto* v = cmd->add_option("--vocab", vocab, "Plain vocabulary file, one token per line");
    auto* h = cmd->add_option("--hf-tokenizer", hf_tokenizer,
                              "WordPiece tokenizer.json (Hugging Face format)");
    v->excludes(h);
    cmd->add_option("--specials", specials, "JSON manifest of special tokens")->required();
  }

  std::unique_ptr<lem::Tokenizer> load() const {
    if (!hf_tokenizer.empty()) {
      return std::make_unique<lem::WordPieceTokenizer>(
          lem::WordPieceTokenizer::from_json(hf_tokenizer, specials));
    }
    if (vocab.empty()) throw lem::ConfigError("one of --vocab or --hf-tokenizer is required");
    return std::make_unique<lem::GreedySubwordTokenizer>(
        lem::Vocabulary::from_files(vocab, specials));
  }

  std::vector<std::string> files() const {
    std::vector<std::string> out{specials};
    out.push_back(hf_tokenizer.empty() ? vocab : hf_tokenizer);
    return out;
  }
};

// ---------------------------------------------------------------- clean

struct CleanCmd {
  std::string in, out, lang, blocklist, lid_labels, drop_log;
  double min_ratio = 0.6;
  double lid_threshold = 0.5;
  bool segment = false;
  bool keep_html = false;
  bool keep_urls = false;

  void setup(CLI::App* cmd) {
    cmd->add_option("--in", in, "Raw text, one sentence or document per line")->required();
    cmd->add_option("--out", out, "Cleaned JSONL {id, lang, text}")->required();
    cmd->add_option("--lang", lang, "Language tag of the input")->required();
    cmd->add_option("--min-ratio", min_ratio, "Minimum letter ratio")->capture_default_str();
    cmd->add_option("--blocklist", blocklist, "Keyword blocklist, one per line");
    cmd->add_option("--lid-labels", lid_labels, "TSV: line TAB lang TAB confidence");
    cmd->add_option("--lid-threshold", lid_threshold)->capture_default_str();
    cmd->add_option("--drop-log", drop_log, "JSONL {id, reason} of dropped sentences");
    cmd->add_flag("--segment", segment, "Split each line into sentences first");
    cmd->add_flag("--keep-html", keep_html);
    cmd->add_flag("--keep-urls", keep_urls);
  }

  StageIo io() const {
    StageIo s{{in}, {out}};
    if (!blocklist.empty()) s.inputs.push_back(blocklist);
    if (!lid_labels.empty()) s.inputs.push_back(lid_labels);
    if (!drop_log.empty()) s.outputs.push_back(drop_log);
    return s;
  }

  void run() const {
    lem::CleaningConfig cfg;
    cfg.min_text_ratio = min_ratio;
    cfg.drop_html = !keep_html;
    cfg.drop_urls = !keep_urls;
    if (!blocklist.empty()) {
      for (auto& kw : lem::io::read_lines(blocklist)) {
        if (!kw.empty()) cfg.keyword_blocklist.push_back(std::move(kw));
      }
    }
    std::optional<lem::LidFilter> lid;
    if (!lid_labels.empty()) lid = lem::LidFilter{lem::io::read_lid_labels(lid_labels), lid_threshold};

    const auto result = lem::clean_lines(lem::io::read_lines(in), lang, cfg,
                                         lid ? &*lid : nullptr, segment);
    auto o = open_out(out);
    lem::io::write_records(o, result.kept);
    if (!drop_log.empty()) {
      auto d = open_out(drop_log);
      lem::io::write_drops(d, result.dropped);
    }
    std::cerr << "clean: kept " << result.kept.size() << ", dropped " << result.dropped.size()
              << '\n';
  }
};

// ---------------------------------------------------------------- stack

struct StackCmd {
  std::string src, tgt, out;
  bool keep_ids = false;

  void setup(CLI::App* cmd) {
    cmd->add_option("--src", src, "Source-language JSONL")->required();
    cmd->add_option("--tgt", tgt, "Target-language JSONL")->required();
    cmd->add_option("--out", out)->required();
    cmd->add_flag("--keep-ids", keep_ids,
                  "Do not shift target ids past the source ids (masking streams are keyed by id)");
  }
  StageIo io() const { return {{src, tgt}, {out}}; }

  void run() const {
    const auto s = lem::io::read_records(src);
    auto t = lem::io::read_records(tgt);
    if (!keep_ids) {
      std::uint64_t offset = 0;
      for (const auto& r : s) offset = std::max(offset, r.id + 1);
      for (auto& r : t) r.id += offset;
    }
    auto o = open_out(out);
    lem::io::write_records(o, lem::build_mono_stack(s, t));
  }
};

// ---------------------------------------------------------------- sample

struct SampleCmd {
  std::string in, out;
  std::size_t n = 0;
  std::uint64_t seed = 0;

  void setup(CLI::App* cmd) {
    cmd->add_option("--in", in)->required();
    cmd->add_option("--out", out)->required();
    cmd->add_option("--n", n, "Number of sentences")->required();
    cmd->add_option("--seed", seed)->envname("LEM_SEED")->capture_default_str();
  }
  StageIo io() const { return {{in}, {out}}; }

  void run() const {
    auto o = open_out(out);
    lem::io::write_records(o, lem::sample_n(lem::io::read_records(in), n, seed));
  }
};

// ---------------------------------------------------------------- tokenize

struct TokenizeCmd {
  std::string in, out;
  TokenizerOptions tok;

  void setup(CLI::App* cmd) {
    cmd->add_option("--in", in, "Cleaned JSONL")->required();
    cmd->add_option("--out", out, "Tokenized JSONL")->required();
    tok.add_to(cmd);
  }
  StageIo io() const {
    StageIo s{{in}, {out}};
    for (auto& f : tok.files()) s.inputs.push_back(f);
    return s;
  }

  void run() const {
    const auto tokenizer = tok.load();
    auto o = open_out(out);
    for (const auto& rec : lem::io::read_records(in)) {
      lem::io::write_tokenized(o, tokenizer->tokenize(rec.text, rec.id));
    }
  }
};

// ---------------------------------------------------------------- annotate

struct AnnotateCmd {
  std::string tokens, out, ner, pos, tagset;

  void setup(CLI::App* cmd) {
    cmd->add_option("--tokens", tokens, "Tokenized JSONL")->required();
    cmd->add_option("--out", out, "Entity dictionary JSONL")->required();
    cmd->add_option("--ner", ner, "BIO NER tag file (CoNLL)");
    cmd->add_option("--pos", pos, "POS tag file (CoNLL)");
    cmd->add_option("--tagset", tagset, "JSON {noun:[...], verb:[...]}; Penn tags by default");
  }
  StageIo io() const {
    StageIo s{{tokens}, {out}};
    for (const auto* f : {&ner, &pos, &tagset}) {
      if (!f->empty()) s.inputs.push_back(*f);
    }
    return s;
  }

  void run() const {
    if (ner.empty() && pos.empty()) throw lem::ConfigError("annotate needs --ner and/or --pos");
    const auto toks = lem::io::read_tokenized(tokens);
    const auto tags = tagset.empty() ? lem::TagsetConfig::penn_english()
                                     : lem::TagsetConfig::from_json_file(tagset);
    std::vector<const lem::TagFileResult*> sources;
    lem::TagFileResult ner_result;
    lem::TagFileResult pos_result;
    if (!ner.empty()) {
      ner_result = lem::parse_tag_file(ner, lem::TagScheme::kBioNer, tags);
      sources.push_back(&ner_result);
    }
    if (!pos.empty()) {
      pos_result = lem::parse_tag_file(pos, lem::TagScheme::kPos, tags);
      sources.push_back(&pos_result);
    }
    for (const auto* src : sources) {
      for (const auto& w : src->warnings) std::cerr << "annotate: warning: " << w << '\n';
      if (src->sentences.size() != toks.size()) {
        throw lem::AlignmentError("tag file has " + std::to_string(src->sentences.size()) +
                                  " sentences, tokenized input has " +
                                  std::to_string(toks.size()));
      }
    }
    auto o = open_out(out);
    for (std::size_t i = 0; i < toks.size(); ++i) {
      std::vector<lem::WordSpan> spans;
      for (const auto* src : sources) {
        const auto& sent = src->sentences[i];
        if (sent.words.size() != toks[i].word_count()) {
          throw lem::AlignmentError("sentence " + std::to_string(toks[i].sentence_id) + ": " +
                                    std::to_string(sent.words.size()) + " tagged words vs " +
                                    std::to_string(toks[i].word_count()) + " tokenized words");
        }
        spans.insert(spans.end(), sent.spans.begin(), sent.spans.end());
      }
      lem::io::write_entry(o, lem::align_spans(spans, toks[i]));
    }
  }
};

// ---------------------------------------------------------------- mask

struct MaskCmd {
  std::string tokens, dict, tgt_tokens, tgt_dict, pairs, out;
  std::string strategy = "lem";
  std::string recipe = "100%NE+15%MLM";
  std::string mode = "mono";
  std::size_t k = 1;
  std::uint64_t seed = 0;
  std::uint64_t epoch = 0;
  std::int64_t ignore_index = lem::kDefaultIgnoreIndex;
  std::size_t max_len = lem::kDefaultMaxSequenceLength;
  double p_mask = 0.8, p_random = 0.1, p_keep = 0.1;
  double span_p = 0.2;
  std::size_t span_max = 10;
  bool no_wrap = false;
  bool skip_long = false;
  TokenizerOptions tok;

  void setup(CLI::App* cmd) {
    cmd->add_option("--tokens", tokens, "Tokenized JSONL (source side in para mode)")->required();
    cmd->add_option("--dict", dict, "Entity dictionary JSONL");
    cmd->add_option("--tgt-tokens", tgt_tokens, "Target tokenized JSONL (para)");
    cmd->add_option("--tgt-dict", tgt_dict, "Target entity dictionary JSONL (para)");
    cmd->add_option("--pairs", pairs, "TSV pair_id TAB src_id TAB tgt_id (para)");
    cmd->add_option("--out", out, "Masked-example JSONL")->required();
    cmd->add_option("--strategy", strategy, "lem|subword|wholeword|span|tlm")->capture_default_str();
    cmd->add_option("--recipe", recipe)->capture_default_str();
    cmd->add_option("--mode", mode, "mono|para")->check(CLI::IsMember({"mono", "para"}))->capture_default_str();
    cmd->add_option("--k", k, "Tokens masked per entity")->capture_default_str();
    cmd->add_option("--seed", seed)->envname("LEM_SEED")->capture_default_str();
    cmd->add_option("--epoch", epoch)->capture_default_str();
    cmd->add_option("--ignore-index", ignore_index)->capture_default_str();
    cmd->add_option("--max-len", max_len, "Pair length limit, 0 = none")->capture_default_str();
    cmd->add_option("--p-mask", p_mask)->capture_default_str();
    cmd->add_option("--p-random", p_random)->capture_default_str();
    cmd->add_option("--p-keep", p_keep)->capture_default_str();
    cmd->add_option("--span-p", span_p)->capture_default_str();
    cmd->add_option("--span-max", span_max)->capture_default_str();
    cmd->add_flag("--no-wrap", no_wrap, "Mono mode: do not add bos/eos");
    cmd->add_flag("--skip-long", skip_long, "Para mode: skip over-long pairs instead of failing");
    tok.add_to(cmd);
  }

  StageIo io() const {
    StageIo s{{tokens}, {out}};
    for (const auto* f : {&dict, &tgt_tokens, &tgt_dict, &pairs}) {
      if (!f->empty()) s.inputs.push_back(*f);
    }
    for (auto& f : tok.files()) s.inputs.push_back(f);
    return s;
  }

  lem::MaskingConfig config() const {
    lem::MaskingConfig cfg;
    cfg.recipe = lem::parse_recipe(recipe);
    cfg.strategy = lem::parse_strategy(strategy);
    cfg.tokens_per_entity = k;
    cfg.corruption = {p_mask, p_random, p_keep};
    cfg.span_geometric_p = span_p;
    cfg.span_max = span_max;
    cfg.seed = seed;
    cfg.epoch = epoch;
    cfg.ignore_index = ignore_index;
    cfg.validate();
    const bool para = mode == "para";
    if (para != (cfg.recipe.base_mode == lem::BaseMode::kTLM)) {
      throw lem::ConfigError("recipe objective " + recipe + " does not match --mode " + mode);
    }
    return cfg;
  }

  static std::map<std::uint64_t, lem::EntityDictionaryEntry> index_entries(
      const std::string& path) {
    std::map<std::uint64_t, lem::EntityDictionaryEntry> out;
    if (path.empty()) return out;
    for (auto& e : lem::io::read_dictionary(path)) out[e.sentence_id] = std::move(e);
    return out;
  }

  static const lem::EntityDictionaryEntry& entry_for(
      const std::map<std::uint64_t, lem::EntityDictionaryEntry>& entries, std::uint64_t id,
      bool required, const lem::EntityDictionaryEntry& empty) {
    const auto it = entries.find(id);
    if (it != entries.end()) return it->second;
    if (required) {
      throw lem::AlignmentError("no entity dictionary entry for sentence " + std::to_string(id));
    }
    return empty;
  }

  void run() const {
    const auto cfg = config();
    const auto tokenizer = tok.load();
    const auto& vocab = tokenizer->vocab();
    const bool lem_strategy = cfg.strategy == lem::Strategy::kLEM;
    if (lem_strategy && dict.empty()) throw lem::ConfigError("--strategy lem needs --dict");
    const lem::EntityDictionaryEntry empty;
    const auto src_entries = index_entries(dict);
    auto o = open_out(out);

    if (mode == "mono") {
      for (const auto& toks : lem::io::read_tokenized(tokens)) {
        auto entry = entry_for(src_entries, toks.sentence_id, lem_strategy, empty);
        if (no_wrap) {
          lem::io::write_masked(o, lem::mask_sentence(toks, entry, vocab, cfg), cfg);
        } else {
          entry = lem::shift_entry(entry, 1, 0);
          lem::io::write_masked(
              o, lem::mask_sentence(lem::wrap_sentence(toks, vocab), entry, vocab, cfg), cfg);
        }
      }
      return;
    }

    if (tgt_tokens.empty()) throw lem::ConfigError("para mode needs --tgt-tokens");
    if (lem_strategy && tgt_dict.empty()) throw lem::ConfigError("para LEM needs --tgt-dict");
    const auto src = lem::io::read_tokenized(tokens);
    const auto tgt = lem::io::read_tokenized(tgt_tokens);
    const auto tgt_entries = index_entries(tgt_dict);

    std::vector<lem::io::PairRef> refs;
    if (!pairs.empty()) {
      refs = lem::io::read_pair_refs(pairs);
    } else {
      if (src.size() != tgt.size()) {
        throw lem::AlignmentError("source and target token files differ in length; pass --pairs");
      }
      for (std::size_t i = 0; i < src.size(); ++i) {
        refs.push_back({i, src[i].sentence_id, tgt[i].sentence_id});
      }
    }
    std::map<std::uint64_t, const lem::TokenizedSentence*> src_by_id;
    std::map<std::uint64_t, const lem::TokenizedSentence*> tgt_by_id;
    for (const auto& s : src) src_by_id[s.sentence_id] = &s;
    for (const auto& t : tgt) tgt_by_id[t.sentence_id] = &t;

    std::size_t skipped = 0;
    for (const auto& ref : refs) {
      const auto s = src_by_id.find(ref.src_id);
      const auto t = tgt_by_id.find(ref.tgt_id);
      if (s == src_by_id.end() || t == tgt_by_id.end()) {
        throw lem::AlignmentError("pair " + std::to_string(ref.pair_id) +
                                  " references a missing sentence");
      }
      lem::TokenizedPair pair;
      try {
        pair = lem::concat_pair(*s->second, *t->second, vocab, ref.pair_id, max_len);
      } catch (const lem::TruncationError& e) {
        if (!skip_long) throw;
        std::cerr << "mask: skipping " << e.what() << '\n';
        ++skipped;
        continue;
      }
      const auto& se = entry_for(src_entries, ref.src_id, lem_strategy, empty);
      const auto& te = entry_for(tgt_entries, ref.tgt_id, lem_strategy, empty);
      lem::io::write_masked(o, lem::mask_pair(pair, se, te, vocab, cfg), cfg);
    }
    if (skipped > 0) std::cerr << "mask: skipped " << skipped << " over-long pairs\n";
  }
};

// ---------------------------------------------------------------- mine

struct MineCmd {
  std::string src_emb, tgt_emb, gold, report;
  std::size_t k = 4;
  std::size_t block_rows = 0;
  std::string criterion = "in";

  void setup(CLI::App* cmd) {
    cmd->add_option("--src-emb", src_emb)->required();
    cmd->add_option("--tgt-emb", tgt_emb)->required();
    cmd->add_option("--k", k, "Neighbourhood size of the margin")->capture_default_str();
    cmd->add_option("--criterion", criterion, "fw|bw|in")->check(CLI::IsMember({"fw", "bw", "in"}))->capture_default_str();
    cmd->add_option("--gold", gold, "TSV src_id TAB tgt_id");
    cmd->add_option("--report", report, "JSON report")->required();
    cmd->add_option("--block-rows", block_rows, "Rows per similarity block, 0 = full matrix");
  }
  StageIo io() const {
    StageIo s{{src_emb, tgt_emb}, {report}};
    if (!gold.empty()) s.inputs.push_back(gold);
    return s;
  }

  void run() const {
    const auto x = lem::read_embeddings(src_emb);
    const auto y = lem::read_embeddings(tgt_emb);
    lem::MiningConfig cfg;
    cfg.k_neighbors = k;
    cfg.criterion = lem::parse_criterion(criterion);
    cfg.block_rows = block_rows;
    auto result = lem::mine(x, y, cfg);
    if (!gold.empty()) result.recall = lem::recall(result, lem::GoldAlignment::read_tsv(gold));

    json pairs_json = json::array();
    for (const auto& p : result.pairs) {
      pairs_json.push_back({{"src", p.src_id}, {"tgt", p.tgt_id}, {"score", p.score}});
    }
    write_json(report, {{"criterion", std::string(lem::to_string(cfg.criterion))},
                        {"k", k},
                        {"n_src", x.rows()},
                        {"n_tgt", y.rows()},
                        {"recall", result.recall ? json(*result.recall) : json(nullptr)},
                        {"pairs", std::move(pairs_json)}});
    std::cout << lem::to_string(cfg.criterion) << ": " << result.pairs.size() << " pairs";
    if (result.recall) std::cout << ", recall " << *result.recall;
    std::cout << '\n';
  }
};

// ---------------------------------------------------------------- curate

struct CurateCmd {
  std::string pairs, src_emb, tgt_emb, out_prefix;
  std::size_t top = 50000;
  bool margin = false;
  std::size_t k = 4;

  void setup(CLI::App* cmd) {
    cmd->add_option("--pairs", pairs, "JSONL {id, src, tgt}")->required();
    cmd->add_option("--src-emb", src_emb)->required();
    cmd->add_option("--tgt-emb", tgt_emb)->required();
    cmd->add_option("--top", top)->capture_default_str();
    cmd->add_option("--out-prefix", out_prefix)->required();
    cmd->add_flag("--margin", margin, "Rank by ratio margin instead of cosine");
    cmd->add_option("--k", k, "Margin neighbourhood size")->capture_default_str();
  }
  StageIo io() const {
    return {{pairs, src_emb, tgt_emb},
            {out_prefix + ".src", out_prefix + ".tgt", out_prefix + ".manifest.json"}};
  }

  void run(const std::string& config_hash) const {
    const auto x = lem::read_embeddings(src_emb);
    const auto y = lem::read_embeddings(tgt_emb);
    auto scores = margin ? lem::score_pairs_margin(x, y, k) : lem::score_pairs(x, y);
    const auto ranked = lem::rank_pairs(std::move(scores));
    const auto n = std::min(top, ranked.size());
    if (top > ranked.size()) {
      std::cerr << "curate: only " << ranked.size() << " pairs available, exporting all\n";
    }
    lem::export_top_n(ranked, n, lem::io::read_pair_texts(pairs), out_prefix, config_hash);
  }
};

// ---------------------------------------------------------------- report

struct ReportCmd {
  std::vector<std::string> mining;
  std::vector<std::string> curation;
  std::string out;

  void setup(CLI::App* cmd) {
    cmd->add_option("--mining", mining, "Mining report JSON files");
    cmd->add_option("--curation", curation, "Curation manifest JSON files");
    cmd->add_option("--out", out, "Summary JSON")->required();
  }
  StageIo io() const {
    StageIo s{{}, {out}};
    s.inputs.insert(s.inputs.end(), mining.begin(), mining.end());
    s.inputs.insert(s.inputs.end(), curation.begin(), curation.end());
    return s;
  }

  static json load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw lem::Error("cannot open " + path);
    try {
      return json::parse(in);
    } catch (const json::parse_error& e) {
      throw lem::FormatError(path + ": " + e.what());
    }
  }

  void run() const {
    json summary = {{"mining", json::array()}, {"curation", json::array()}};
    std::cout << std::left << std::setw(40) << "file" << std::setw(10) << "criterion"
              << std::setw(6) << "k" << std::setw(8) << "pairs" << "recall\n";
    for (const auto& path : mining) {
      const auto doc = load(path);
      summary["mining"].push_back({{"file", path},
                                   {"criterion", doc.at("criterion")},
                                   {"k", doc.at("k")},
                                   {"pairs", doc.at("pairs").size()},
                                   {"recall", doc.at("recall")}});
      std::cout << std::setw(40) << path << std::setw(10)
                << doc.at("criterion").get<std::string>() << std::setw(6)
                << doc.at("k").get<std::size_t>() << std::setw(8) << doc.at("pairs").size()
                << (doc.at("recall").is_null() ? std::string("-") : doc.at("recall").dump())
                << '\n';
    }
    if (!curation.empty()) {
      std::cout << '\n' << std::setw(40) << "file" << std::setw(8) << "top" << std::setw(8)
                << "total" << "score range\n";
    }
    for (const auto& path : curation) {
      const auto doc = load(path);
      const auto& pairs = doc.at("pairs");
      json entry = {{"file", path}, {"top", doc.at("top")}, {"total", doc.at("total")}};
      std::cout << std::setw(40) << path << std::setw(8) << doc.at("top").dump() << std::setw(8)
                << doc.at("total").dump();
      if (!pairs.empty()) {
        entry["max_score"] = pairs.front().at("score");
        entry["min_score"] = pairs.back().at("score");
        std::cout << pairs.back().at("score").get<double>() << " .. "
                  << pairs.front().at("score").get<double>();
      }
      std::cout << '\n';
      summary["curation"].push_back(std::move(entry));
    }
    write_json(out, summary);
  }
};

// ---------------------------------------------------------------- embcheck

struct EmbcheckCmd {
  std::string file;

  void setup(CLI::App* cmd) { cmd->add_option("file", file, "Embedding file")->required(); }

  int run() const {
    const auto c = lem::check_embeddings(file);
    std::cout << "rows " << c.rows << "\ndim " << c.dim << "\nnormalized "
              << (c.normalized ? "yes" : "no") << "\nmax_norm_deviation " << c.max_norm_deviation
              << "\nzero_rows " << c.zero_rows << '\n';
    if (!c.metadata.empty()) std::cout << "metadata " << c.metadata << '\n';
    if (c.normalized && c.max_norm_deviation > lem::kUnitNormTolerance) return kExitRuntime;
    return 0;
  }
};

// Snapshot of every option given to a subcommand, for the manifest.
std::map<std::string, std::string> config_snapshot(const CLI::App* cmd) {
  std::map<std::string, std::string> out;
  for (const auto* opt : cmd->get_options()) {
    if (opt->get_name() == "--help" || opt->count() == 0) continue;
    std::string joined;
    for (const auto& r : opt->results()) {
      if (!joined.empty()) joined += ',';
      joined += r;
    }
    out[opt->get_name()] = joined;
  }
  return out;
}

std::string config_hash(const std::map<std::string, std::string>& config) {
  return lem::sha256_hex(json(config).dump());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Linguistic entity masking toolkit"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML/INI file mirroring the command-line flags");
  std::string manifest_path;
  app.add_option("--manifest", manifest_path, "Pipeline manifest JSON to check and update");
  app.set_version_flag("--version", std::string(lem::kToolVersion));

  CleanCmd clean;
  StackCmd stack;
  SampleCmd sample;
  TokenizeCmd tokenize;
  AnnotateCmd annotate;
  MaskCmd mask;
  MineCmd mine;
  CurateCmd curate;
  ReportCmd report;
  EmbcheckCmd embcheck;

  struct Entry {
    CLI::App* cmd;
    std::function<StageIo()> io;
    std::function<int(const std::map<std::string, std::string>&)> run;
  };
  std::vector<Entry> entries;
  auto add = [&](auto& c, const char* name, const char* help) -> Entry& {
    auto* sub = app.add_subcommand(name, help);
    c.setup(sub);
    entries.push_back({sub, [&c] { return c.io(); }, {}});
    return entries.back();
  };
  add(clean, "clean", "Filter noisy sentences").run = [&](auto&) { clean.run(); return 0; };
  add(stack, "stack", "Concatenate source then target monolingual corpora").run =
      [&](auto&) { stack.run(); return 0; };
  add(sample, "sample", "Seeded sample without replacement").run = [&](auto&) { sample.run(); return 0; };
  add(tokenize, "tokenize", "Sub-word tokenize a cleaned corpus").run =
      [&](auto&) { tokenize.run(); return 0; };
  add(annotate, "annotate", "Build the entity dictionary from tag files").run =
      [&](auto&) { annotate.run(); return 0; };
  add(mask, "mask", "Generate masked training examples").run = [&](auto&) { mask.run(); return 0; };
  add(mine, "mine", "Margin-based bitext mining").run = [&](auto&) { mine.run(); return 0; };
  add(curate, "curate", "Rank parallel pairs and export the top N").run =
      [&](const auto& cfg) { curate.run(config_hash(cfg)); return 0; };
  add(report, "report", "Summarize mining and curation outputs").run =
      [&](auto&) { report.run(); return 0; };
  {
    auto* sub = app.add_subcommand("embcheck", "Validate an embedding file");
    embcheck.setup(sub);
    entries.push_back({sub, [&] { return StageIo{{embcheck.file}, {}}; },
                       [&](auto&) { return embcheck.run(); }});
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  for (auto& entry : entries) {
    if (!entry.cmd->parsed()) continue;
    const std::string name = entry.cmd->get_name();
    try {
      const auto cfg = config_snapshot(entry.cmd);
      const auto stage_io = entry.io();
      const bool track = !manifest_path.empty() && !stage_io.outputs.empty();
      lem::PipelineManifest manifest;
      if (track) {
        manifest = lem::PipelineManifest::load(manifest_path);
        manifest.verify_inputs(stage_io.inputs);
        if (manifest.up_to_date(name, cfg, stage_io.inputs, stage_io.outputs)) {
          std::cerr << name << ": up to date\n";
          return 0;
        }
      }
      const int code = entry.run(cfg);
      if (code == 0 && track) {
        manifest.record(lem::make_stage_record(name, cfg, stage_io.inputs, stage_io.outputs));
        manifest.save(manifest_path);
      }
      return code;
    } catch (const lem::HashMismatchError& e) {
      std::cerr << name << ": " << e.what() << '\n';
      return kExitHash;
    } catch (const lem::ParseError& e) {
      std::cerr << name << ": parse error: " << e.what() << '\n';
      return kExitUsage;
    } catch (const lem::ConfigError& e) {
      std::cerr << name << ": " << e.what() << '\n';
      return kExitUsage;
    } catch (const std::exception& e) {
      std::cerr << name << ": " << e.what() << '\n';
      return kExitRuntime;
    }
  }
  return kExitUsage;
}
