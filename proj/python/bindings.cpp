#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstring>

#include "lem/annotation.hpp"
#include "lem/corpus.hpp"
#include "lem/curation.hpp"
#include "lem/embeddings.hpp"
#include "lem/error.hpp"
#include "lem/manifest.hpp"
#include "lem/masking.hpp"
#include "lem/mining.hpp"
#include "lem/tokenization.hpp"

namespace py = pybind11;
using namespace lem;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

EmbeddingMatrix matrix_from_numpy(FloatArray data, std::vector<std::uint64_t> ids,
                                  bool normalized) {
  if (data.ndim() != 2) throw ConfigError("embeddings must be a 2-d array");
  const auto rows = static_cast<std::size_t>(data.shape(0));
  const auto dim = static_cast<std::size_t>(data.shape(1));
  std::vector<float> flat(data.data(), data.data() + rows * dim);
  return EmbeddingMatrix(rows, dim, std::move(flat), std::move(ids), normalized);
}

py::array_t<float> matrix_to_numpy(const EmbeddingMatrix& m) {
  py::array_t<float> out({m.rows(), m.dim()});
  if (!m.data().empty()) {
    std::memcpy(out.mutable_data(), m.data().data(), m.data().size() * sizeof(float));
  }
  return out;
}

std::vector<std::string> label_names(const std::vector<EntityLabel>& labels) {
  std::vector<std::string> out;
  for (auto l : labels) out.emplace_back(to_string(l));
  return out;
}

}  // namespace

PYBIND11_MODULE(_lem, m) {
  m.doc() = "Entity-aware masking, margin mining and curation for low-resource bitext";

  // errors: everything derives from LemError so callers can catch one type
  auto& base = py::register_exception<Error>(m, "LemError", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<FormatError>(m, "FormatError", base.ptr());
  py::register_exception<AlignmentError>(m, "AlignmentError", base.ptr());
  py::register_exception<InsufficientDataError>(m, "InsufficientDataError", base.ptr());
  py::register_exception<TruncationError>(m, "TruncationError", base.ptr());
  py::register_exception<HashMismatchError>(m, "HashMismatchError", base.ptr());

  // corpus
  py::class_<SentenceRecord>(m, "SentenceRecord")
      .def(py::init<std::uint64_t, std::string, std::string>(), py::arg("id"), py::arg("lang"),
           py::arg("text"))
      .def_readwrite("id", &SentenceRecord::id)
      .def_readwrite("lang", &SentenceRecord::lang)
      .def_readwrite("text", &SentenceRecord::text)
      .def("__eq__", [](const SentenceRecord& a, const SentenceRecord& b) { return a == b; })
      .def("__repr__", [](const SentenceRecord& r) {
        return "SentenceRecord(" + std::to_string(r.id) + ", '" + r.lang + "', '" + r.text + "')";
      });

  m.def("text_ratio", &text_ratio, py::arg("sentence"));
  m.def("segment_sentences", &segment_sentences, py::arg("document"), py::arg("lang"));
  m.def(
      "clean_lines",
      [](const std::vector<std::string>& lines, const std::string& lang, double min_ratio,
         std::vector<std::string> blocklist, bool drop_html, bool drop_urls, bool segment) {
        CleaningConfig cfg{min_ratio, std::move(blocklist), drop_html, drop_urls};
        auto result = clean_lines(lines, lang, cfg, nullptr, segment);
        std::vector<std::pair<std::uint64_t, std::string>> dropped;
        for (const auto& d : result.dropped) dropped.emplace_back(d.id, to_string(d.reason));
        return py::make_tuple(result.kept, dropped);
      },
      py::arg("lines"), py::arg("lang"), py::arg("min_ratio") = 0.6,
      py::arg("blocklist") = std::vector<std::string>{}, py::arg("drop_html") = true,
      py::arg("drop_urls") = true, py::arg("segment") = false,
      "Returns (kept records, [(id, reason)]).");
  m.def("sample_n", &sample_n, py::arg("corpus"), py::arg("n"), py::arg("seed"));
  m.def("build_mono_stack", &build_mono_stack, py::arg("src"), py::arg("tgt"));

  // tokenization
  py::class_<Token>(m, "Token")
      .def_readonly("id", &Token::id)
      .def_readonly("surface", &Token::surface)
      .def_readonly("word_index", &Token::word_index)
      .def_readonly("is_special", &Token::is_special);

  py::class_<TokenizedSentence>(m, "TokenizedSentence")
      .def_readonly("sentence_id", &TokenizedSentence::sentence_id)
      .def_readonly("tokens", &TokenizedSentence::tokens)
      .def_property_readonly("ids",
                             [](const TokenizedSentence& s) {
                               std::vector<TokenId> ids;
                               for (const auto& t : s.tokens) ids.push_back(t.id);
                               return ids;
                             })
      .def("subword_count", &TokenizedSentence::subword_count)
      .def("word_count", &TokenizedSentence::word_count)
      .def("detokenize", &TokenizedSentence::detokenize)
      .def("__len__", [](const TokenizedSentence& s) { return s.tokens.size(); });

  py::class_<SpecialIds>(m, "SpecialIds")
      .def_readonly("bos", &SpecialIds::bos)
      .def_readonly("eos", &SpecialIds::eos)
      .def_readonly("sep", &SpecialIds::sep)
      .def_readonly("mask", &SpecialIds::mask)
      .def_readonly("pad", &SpecialIds::pad)
      .def_readonly("unk", &SpecialIds::unk);

  py::class_<Vocabulary>(m, "Vocabulary")
      .def_static("from_files", &Vocabulary::from_files, py::arg("vocab"), py::arg("specials"))
      .def("__len__", &Vocabulary::size)
      .def_property_readonly("specials", &Vocabulary::specials)
      .def("find", &Vocabulary::find)
      .def("token", &Vocabulary::token)
      .def("is_special", &Vocabulary::is_special);

  py::class_<GreedySubwordTokenizer>(m, "GreedySubwordTokenizer")
      .def(py::init<Vocabulary>(), py::arg("vocab"))
      .def("tokenize", &GreedySubwordTokenizer::tokenize, py::arg("text"),
           py::arg("sentence_id") = 0);

  py::class_<WordPieceTokenizer>(m, "WordPieceTokenizer")
      .def_static("from_json", &WordPieceTokenizer::from_json, py::arg("tokenizer_json"),
                  py::arg("specials"))
      .def("tokenize", &WordPieceTokenizer::tokenize, py::arg("text"),
           py::arg("sentence_id") = 0);

  py::class_<TokenizedPair>(m, "TokenizedPair")
      .def_readonly("pair_id", &TokenizedPair::pair_id)
      .def_readonly("sequence", &TokenizedPair::sequence)
      .def_readonly("src_count", &TokenizedPair::src_count)
      .def_readonly("tgt_count", &TokenizedPair::tgt_count)
      .def_readonly("tgt_offset", &TokenizedPair::tgt_offset);
  m.def("concat_pair", &concat_pair, py::arg("src"), py::arg("tgt"), py::arg("vocab"),
        py::arg("pair_id") = 0, py::arg("max_length") = kDefaultMaxSequenceLength);
  m.def("wrap_sentence", &wrap_sentence, py::arg("tokens"), py::arg("vocab"));

  // annotation
  py::enum_<EntityLabel>(m, "EntityLabel")
      .value("NE", EntityLabel::kNE)
      .value("VB", EntityLabel::kVB)
      .value("NN", EntityLabel::kNN);
  py::enum_<TagScheme>(m, "TagScheme")
      .value("BIO_NER", TagScheme::kBioNer)
      .value("POS", TagScheme::kPos);

  py::class_<WordSpan>(m, "WordSpan")
      .def(py::init<EntityLabel, std::size_t, std::size_t>(), py::arg("label"),
           py::arg("word_start"), py::arg("word_end"))
      .def_readonly("label", &WordSpan::label)
      .def_readonly("word_start", &WordSpan::word_start)
      .def_readonly("word_end", &WordSpan::word_end);

  py::class_<EntitySpan>(m, "EntitySpan")
      .def(py::init<EntityLabel, std::size_t, std::size_t, std::size_t, std::size_t>(),
           py::arg("label"), py::arg("word_start"), py::arg("word_end"), py::arg("token_start"),
           py::arg("token_end"))
      .def_readonly("label", &EntitySpan::label)
      .def_readonly("word_start", &EntitySpan::word_start)
      .def_readonly("word_end", &EntitySpan::word_end)
      .def_readonly("token_start", &EntitySpan::token_start)
      .def_readonly("token_end", &EntitySpan::token_end)
      .def("__repr__", [](const EntitySpan& s) {
        return std::string(to_string(s.label)) + "[" + std::to_string(s.token_start) + ":" +
               std::to_string(s.token_end) + "]";
      });

  py::class_<EntityDictionaryEntry>(m, "EntityDictionaryEntry")
      .def(py::init<>())
      .def(py::init<std::uint64_t, std::vector<EntitySpan>>(), py::arg("sentence_id"),
           py::arg("spans"))
      .def_readwrite("sentence_id", &EntityDictionaryEntry::sentence_id)
      .def_readwrite("spans", &EntityDictionaryEntry::spans);

  py::class_<TaggedSentence>(m, "TaggedSentence")
      .def_readonly("words", &TaggedSentence::words)
      .def_readonly("spans", &TaggedSentence::spans);
  m.def(
      "parse_tag_file",
      [](const std::filesystem::path& path, TagScheme scheme) {
        auto r = parse_tag_file(path, scheme);
        return py::make_tuple(r.sentences, r.warnings);
      },
      py::arg("path"), py::arg("scheme"), "Returns (sentences, warnings); Penn tags for POS.");
  m.def("align_spans", &align_spans, py::arg("spans"), py::arg("tokens"));

  // masking
  py::enum_<BaseMode>(m, "BaseMode").value("MLM", BaseMode::kMLM).value("TLM", BaseMode::kTLM);
  py::class_<MaskingRecipe>(m, "MaskingRecipe")
      .def_property_readonly("entity_classes",
                             [](const MaskingRecipe& r) { return label_names(r.entity_classes); })
      .def_readonly("budget_fraction", &MaskingRecipe::budget_fraction)
      .def_readonly("base_mode", &MaskingRecipe::base_mode)
      .def("__str__", &MaskingRecipe::to_string);
  m.def("parse_recipe", &parse_recipe, py::arg("text"));
  m.def("compute_budget", &compute_budget, py::arg("m"), py::arg("fraction") = 0.15);

  py::class_<MaskedExample>(m, "MaskedExample")
      .def_readonly("id", &MaskedExample::id)
      .def_readonly("input_ids", &MaskedExample::input_ids)
      .def_readonly("labels", &MaskedExample::labels)
      .def_readonly("selected", &MaskedExample::selected)
      .def_readonly("tgt_offset", &MaskedExample::tgt_offset)
      .def_property_readonly("corruption", [](const MaskedExample& e) {
        std::vector<std::string> out;
        for (auto c : e.corruption) {
          out.emplace_back(c == Corruption::kMask ? "mask" : c == Corruption::kRandom ? "random" : "keep");
        }
        return out;
      });

  auto make_config = [](const std::string& recipe, const std::string& strategy, std::size_t k,
                        std::uint64_t seed, std::uint64_t epoch, std::int64_t ignore_index) {
    MaskingConfig cfg;
    cfg.recipe = parse_recipe(recipe);
    cfg.strategy = parse_strategy(strategy);
    cfg.tokens_per_entity = k;
    cfg.seed = seed;
    cfg.epoch = epoch;
    cfg.ignore_index = ignore_index;
    cfg.validate();
    return cfg;
  };
  m.def(
      "mask_sentence",
      [make_config](const TokenizedSentence& toks, const EntityDictionaryEntry& entry,
                    const Vocabulary& vocab, const std::string& recipe,
                    const std::string& strategy, std::size_t k, std::uint64_t seed,
                    std::uint64_t epoch, std::int64_t ignore_index) {
        return mask_sentence(toks, entry, vocab,
                             make_config(recipe, strategy, k, seed, epoch, ignore_index));
      },
      py::arg("tokens"), py::arg("entry"), py::arg("vocab"), py::arg("recipe") = "100%NE+15%MLM",
      py::arg("strategy") = "lem", py::arg("k") = 1, py::arg("seed") = 0, py::arg("epoch") = 0,
      py::arg("ignore_index") = kDefaultIgnoreIndex,
      "Tokens must already carry their special markers (see wrap_sentence).");
  m.def(
      "mask_pair",
      [make_config](const TokenizedPair& pair, const EntityDictionaryEntry& src_entry,
                    const EntityDictionaryEntry& tgt_entry, const Vocabulary& vocab,
                    const std::string& recipe, std::size_t k, std::uint64_t seed,
                    std::uint64_t epoch, std::int64_t ignore_index) {
        return mask_pair(pair, src_entry, tgt_entry, vocab,
                         make_config(recipe, "lem", k, seed, epoch, ignore_index));
      },
      py::arg("pair"), py::arg("src_entry"), py::arg("tgt_entry"), py::arg("vocab"),
      py::arg("recipe") = "100%NE+15%TLM", py::arg("k") = 1, py::arg("seed") = 0,
      py::arg("epoch") = 0, py::arg("ignore_index") = kDefaultIgnoreIndex);

  // embeddings
  py::class_<EmbeddingMatrix>(m, "EmbeddingMatrix")
      .def(py::init(&matrix_from_numpy), py::arg("data"), py::arg("ids"),
           py::arg("normalized") = false)
      .def_property_readonly("rows", &EmbeddingMatrix::rows)
      .def_property_readonly("dim", &EmbeddingMatrix::dim)
      .def_property_readonly("normalized", &EmbeddingMatrix::normalized)
      .def_property_readonly("ids", &EmbeddingMatrix::ids)
      .def_property_readonly("metadata", &EmbeddingMatrix::metadata)
      .def("set_metadata", &EmbeddingMatrix::set_metadata)
      .def("to_numpy", &matrix_to_numpy);
  m.def("l2_normalize", &l2_normalize, py::arg("matrix"));
  m.def("read_embeddings", py::overload_cast<const std::filesystem::path&>(&read_embeddings),
        py::arg("path"));
  m.def("write_embeddings",
        py::overload_cast<const std::filesystem::path&, const EmbeddingMatrix&>(&write_embeddings),
        py::arg("path"), py::arg("matrix"));

  // mining
  py::class_<MinedPair>(m, "MinedPair")
      .def_readonly("src_row", &MinedPair::src_row)
      .def_readonly("tgt_row", &MinedPair::tgt_row)
      .def_readonly("src_id", &MinedPair::src_id)
      .def_readonly("tgt_id", &MinedPair::tgt_id)
      .def_readonly("score", &MinedPair::score);
  py::class_<MiningResult>(m, "MiningResult")
      .def_readonly("pairs", &MiningResult::pairs)
      .def_readonly("k_neighbors", &MiningResult::k_neighbors)
      .def_property_readonly("criterion",
                             [](const MiningResult& r) { return std::string(to_string(r.criterion)); });
  m.def(
      "mine",
      [](const EmbeddingMatrix& src, const EmbeddingMatrix& tgt, std::size_t k,
         const std::string& criterion, std::size_t block_rows) {
        MiningConfig cfg;
        cfg.k_neighbors = k;
        cfg.criterion = parse_criterion(criterion);
        cfg.block_rows = block_rows;
        py::gil_scoped_release release;
        return mine(src, tgt, cfg);
      },
      py::arg("src"), py::arg("tgt"), py::arg("k") = 4, py::arg("criterion") = "in",
      py::arg("block_rows") = 0);
  m.def("margin_score", &margin_score, py::arg("src_row"), py::arg("tgt_row"), py::arg("src"),
        py::arg("tgt"), py::arg("k") = 4);
  m.def(
      "recall",
      [](const MiningResult& r, std::vector<std::pair<std::uint64_t, std::uint64_t>> gold) {
        return recall(r, GoldAlignment(std::move(gold)));
      },
      py::arg("result"), py::arg("gold"));

  // curation
  py::class_<RankedPair>(m, "RankedPair")
      .def_readonly("pair_id", &RankedPair::pair_id)
      .def_readonly("score", &RankedPair::score)
      .def_readonly("rank", &RankedPair::rank);
  m.def(
      "rank_pairs",
      [](const EmbeddingMatrix& src, const EmbeddingMatrix& tgt, bool margin, std::size_t k) {
        return rank_pairs(margin ? score_pairs_margin(src, tgt, k) : score_pairs(src, tgt));
      },
      py::arg("src"), py::arg("tgt"), py::arg("margin") = false, py::arg("k") = 4,
      "Scores aligned rows and ranks them, best first.");
  m.def(
      "export_top_n",
      [](const std::vector<RankedPair>& ranked, std::size_t n,
         const std::unordered_map<std::uint64_t, std::pair<std::string, std::string>>& texts,
         const std::filesystem::path& prefix, const std::string& config_hash) {
        std::unordered_map<std::uint64_t, PairText> t;
        for (const auto& [id, st] : texts) t.emplace(id, PairText{st.first, st.second});
        const auto files = export_top_n(ranked, n, t, prefix, config_hash);
        return py::make_tuple(files.src, files.tgt, files.manifest);
      },
      py::arg("ranked"), py::arg("n"), py::arg("texts"), py::arg("prefix"),
      py::arg("config_hash") = "");

  m.def("sha256_file", &sha256_file, py::arg("path"));
  m.attr("__version__") = std::string(kToolVersion);
}
