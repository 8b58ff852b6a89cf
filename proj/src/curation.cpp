#include "lem/curation.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "lem/error.hpp"
#include "lem/mining.hpp"

namespace lem {

namespace {

void require_aligned(const EmbeddingMatrix& src, const EmbeddingMatrix& tgt) {
  if (!src.normalized() || !tgt.normalized()) {
    throw ConfigError("curation needs L2-normalized embeddings");
  }
  if (src.rows() != tgt.rows()) {
    throw AlignmentError("source has " + std::to_string(src.rows()) + " rows, target has " +
                         std::to_string(tgt.rows()));
  }
  if (src.dim() != tgt.dim()) throw AlignmentError("embedding dimensions differ");
  for (std::size_t i = 0; i < src.rows(); ++i) {
    if (src.ids()[i] != tgt.ids()[i]) {
      throw AlignmentError("row " + std::to_string(i) + " pairs source id " +
                           std::to_string(src.ids()[i]) + " with target id " +
                           std::to_string(tgt.ids()[i]));
    }
  }
}

}  // namespace

std::vector<PairScore> score_pairs(const EmbeddingMatrix& src, const EmbeddingMatrix& tgt) {
  require_aligned(src, tgt);
  std::vector<PairScore> out;
  out.reserve(src.rows());
  for (std::size_t i = 0; i < src.rows(); ++i) {
    out.push_back({src.ids()[i], dot(src.row(i), tgt.row(i))});
  }
  return out;
}

std::vector<PairScore> score_pairs_margin(const EmbeddingMatrix& src,
                                          const EmbeddingMatrix& tgt, std::size_t k) {
  require_aligned(src, tgt);
  const MarginScorer scorer(src, tgt, k);
  std::vector<PairScore> out;
  out.reserve(src.rows());
  for (std::size_t i = 0; i < src.rows(); ++i) out.push_back({src.ids()[i], scorer.score(i, i)});
  return out;
}

std::vector<RankedPair> rank_pairs(std::vector<PairScore> scores) {
  std::sort(scores.begin(), scores.end(), [](const PairScore& a, const PairScore& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.pair_id < b.pair_id;
  });
  std::vector<RankedPair> out;
  out.reserve(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out.push_back({scores[i].pair_id, scores[i].score, i + 1});
  }
  return out;
}

ExportedFiles export_top_n(const std::vector<RankedPair>& ranked, std::size_t n,
                           const std::unordered_map<std::uint64_t, PairText>& texts,
                           const std::filesystem::path& prefix,
                           const std::string& config_hash) {
  if (n > ranked.size()) {
    throw InsufficientDataError("asked for the top " + std::to_string(n) + " of " +
                                std::to_string(ranked.size()) + " ranked pairs");
  }
  ExportedFiles files{prefix.string() + ".src", prefix.string() + ".tgt",
                      prefix.string() + ".manifest.json"};
  std::ofstream src(files.src, std::ios::binary | std::ios::trunc);
  std::ofstream tgt(files.tgt, std::ios::binary | std::ios::trunc);
  if (!src || !tgt) throw Error("cannot open export files under " + prefix.string());

  nlohmann::json pairs = nlohmann::json::array();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = ranked[i];
    const auto it = texts.find(r.pair_id);
    if (it == texts.end()) {
      throw AlignmentError("no text for pair id " + std::to_string(r.pair_id));
    }
    src << it->second.src << '\n';
    tgt << it->second.tgt << '\n';
    pairs.push_back({{"pair_id", r.pair_id}, {"rank", r.rank}, {"score", r.score}});
  }
  nlohmann::json manifest = {{"top", n},
                             {"total", ranked.size()},
                             {"config_hash", config_hash},
                             {"pairs", std::move(pairs)}};
  std::ofstream man(files.manifest, std::ios::binary | std::ios::trunc);
  if (!man) throw Error("cannot open " + files.manifest.string());
  man << manifest.dump(1) << '\n';
  return files;
}

}  // namespace lem
