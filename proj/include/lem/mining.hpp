#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string_view>
#include <utility>
#include <vector>

#include "lem/embeddings.hpp"

namespace lem {

enum class Criterion { kForward, kBackward, kIntersection };
enum class MarginVariant { kRatio };

std::string_view to_string(Criterion c);
Criterion parse_criterion(std::string_view text);

struct MiningConfig {
  std::size_t k_neighbors = 4;
  Criterion criterion = Criterion::kIntersection;
  MarginVariant margin = MarginVariant::kRatio;
  // Rows per block for the similarity pass; 0 materializes the full matrix.
  std::size_t block_rows = 0;

  void validate(std::size_t n_src, std::size_t n_tgt) const;
};

// 1-1 reference alignment as (src_id, tgt_id) sentence-id pairs.
class GoldAlignment {
 public:
  GoldAlignment() = default;
  // Throws FormatError when an id appears twice on either side.
  explicit GoldAlignment(std::vector<std::pair<std::uint64_t, std::uint64_t>> pairs);

  // TSV: src_id TAB tgt_id per line.
  static GoldAlignment read_tsv(const std::filesystem::path& path);

  const std::set<std::pair<std::uint64_t, std::uint64_t>>& pairs() const { return pairs_; }
  std::size_t size() const { return pairs_.size(); }

 private:
  std::set<std::pair<std::uint64_t, std::uint64_t>> pairs_;
};

struct MinedPair {
  std::size_t src_row = 0;
  std::size_t tgt_row = 0;
  std::uint64_t src_id = 0;
  std::uint64_t tgt_id = 0;
  double score = 0.0;

  bool operator==(const MinedPair&) const = default;
};

struct MiningResult {
  Criterion criterion = Criterion::kIntersection;
  std::size_t k_neighbors = 0;
  std::vector<MinedPair> pairs;  // sorted by (src_row, tgt_row)
  std::optional<double> recall;
};

// Ratio-margin scorer over two normalized matrices. The denominator is
// sum_{z in NNk(x,Y)} cos(x,z)/(2k) + sum_{z in NNk(y,X)} cos(y,z)/(2k), with
// neighbour cosines summed in descending order.
class MarginScorer {
 public:
  MarginScorer(const EmbeddingMatrix& src, const EmbeddingMatrix& tgt, std::size_t k,
               std::size_t block_rows = 0);

  // -infinity when the denominator is not positive.
  double score(std::size_t src_row, std::size_t tgt_row) const;
  double score_with_cosine(double cosine, std::size_t src_row, std::size_t tgt_row) const;

  // Sum of the k largest cosines for each row, descending order.
  const std::vector<double>& src_neighbour_sums() const { return src_sums_; }
  const std::vector<double>& tgt_neighbour_sums() const { return tgt_sums_; }

 private:
  const EmbeddingMatrix& src_;
  const EmbeddingMatrix& tgt_;
  std::size_t k_;
  std::vector<double> src_sums_;
  std::vector<double> tgt_sums_;
};

double margin_score(std::size_t src_row, std::size_t tgt_row, const EmbeddingMatrix& src,
                    const EmbeddingMatrix& tgt, std::size_t k);

// Forward/backward best matches by margin (ties to the lower row index) and
// their intersection. Requires normalized, non-empty matrices.
MiningResult mine(const EmbeddingMatrix& src, const EmbeddingMatrix& tgt,
                  const MiningConfig& cfg);

// Both directions at once; forward and backward argmax per row (npos when no
// candidate has a positive denominator).
struct Retrieval {
  std::vector<std::size_t> forward;   // per src row
  std::vector<std::size_t> backward;  // per tgt row
  std::vector<double> forward_score;
  std::vector<double> backward_score;
};
inline constexpr std::size_t kNoMatch = static_cast<std::size_t>(-1);

Retrieval retrieve(const EmbeddingMatrix& src, const EmbeddingMatrix& tgt,
                   const MiningConfig& cfg);

// |retrieved ∩ gold| / |gold| over sentence ids. Throws ConfigError on empty gold.
double recall(const MiningResult& result, const GoldAlignment& gold);

}  // namespace lem
