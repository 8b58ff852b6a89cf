#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "lem/embeddings.hpp"

namespace lem {

struct PairScore {
  std::uint64_t pair_id = 0;
  double score = 0.0;
};

struct RankedPair {
  std::uint64_t pair_id = 0;
  double score = 0.0;
  std::size_t rank = 0;  // 1-based

  bool operator==(const RankedPair&) const = default;
};

// Cosine of row i of src with row i of tgt. Both matrices must be normalized
// and carry the same ids in the same order (AlignmentError otherwise).
std::vector<PairScore> score_pairs(const EmbeddingMatrix& src, const EmbeddingMatrix& tgt);

// Ratio-margin score of each aligned pair against the full matrices.
std::vector<PairScore> score_pairs_margin(const EmbeddingMatrix& src,
                                          const EmbeddingMatrix& tgt, std::size_t k);

// Descending score, ties by ascending pair id.
std::vector<RankedPair> rank_pairs(std::vector<PairScore> scores);

struct PairText {
  std::string src;
  std::string tgt;
};

struct ExportedFiles {
  std::filesystem::path src;
  std::filesystem::path tgt;
  std::filesystem::path manifest;
};

// Writes <prefix>.src, <prefix>.tgt (line i of both is rank i+1) and
// <prefix>.manifest.json. Throws InsufficientDataError if n > ranked.size()
// and AlignmentError when a pair id has no text.
ExportedFiles export_top_n(const std::vector<RankedPair>& ranked, std::size_t n,
                           const std::unordered_map<std::uint64_t, PairText>& texts,
                           const std::filesystem::path& prefix,
                           const std::string& config_hash);

}  // namespace lem
