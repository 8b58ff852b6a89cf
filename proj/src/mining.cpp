#include "lem/mining.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <unordered_set>

#include "lem/error.hpp"

namespace lem {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Keeps the k largest values seen; sum() adds them in descending order.
class TopK {
 public:
  explicit TopK(std::size_t k) : k_(k) { values_.reserve(k + 1); }

  void push(double v) {
    if (values_.size() == k_ && v <= values_.back()) return;
    values_.insert(std::upper_bound(values_.begin(), values_.end(), v, std::greater<>()), v);
    if (values_.size() > k_) values_.pop_back();
  }

  double sum() const {
    double acc = 0.0;
    for (double v : values_) acc += v;
    return acc;
  }

 private:
  std::size_t k_;
  std::vector<double> values_;
};

void require_normalized(const EmbeddingMatrix& m, const char* side) {
  if (!m.normalized()) {
    throw ConfigError(std::string(side) + " embeddings must be L2-normalized");
  }
}

// Calls fn(i, j, cosine) for every pair, row block by row block.
template <typename Fn>
void for_each_cosine(const EmbeddingMatrix& src, const EmbeddingMatrix& tgt,
                     std::size_t block_rows, Fn&& fn) {
  const std::size_t n = src.rows();
  const std::size_t m = tgt.rows();
  const std::size_t block = block_rows == 0 ? n : block_rows;
  std::vector<double> sims;
  for (std::size_t begin = 0; begin < n; begin += block) {
    const std::size_t end = std::min(n, begin + block);
    sims.assign((end - begin) * m, 0.0);
    for (std::size_t i = begin; i < end; ++i) {
      for (std::size_t j = 0; j < m; ++j) sims[(i - begin) * m + j] = dot(src.row(i), tgt.row(j));
    }
    for (std::size_t i = begin; i < end; ++i) {
      for (std::size_t j = 0; j < m; ++j) fn(i, j, sims[(i - begin) * m + j]);
    }
  }
}

}  // namespace

std::string_view to_string(Criterion c) {
  switch (c) {
    case Criterion::kForward: return "fw";
    case Criterion::kBackward: return "bw";
    case Criterion::kIntersection: return "in";
  }
  return "?";
}

Criterion parse_criterion(std::string_view text) {
  if (text == "fw" || text == "FW") return Criterion::kForward;
  if (text == "bw" || text == "BW") return Criterion::kBackward;
  if (text == "in" || text == "IN") return Criterion::kIntersection;
  throw ConfigError("unknown mining criterion '" + std::string(text) + "'");
}

void MiningConfig::validate(std::size_t n_src, std::size_t n_tgt) const {
  if (k_neighbors < 1) throw ConfigError("k_neighbors must be at least 1");
  if (k_neighbors >= std::min(n_src, n_tgt)) {
    throw ConfigError("k_neighbors (" + std::to_string(k_neighbors) +
                      ") must be smaller than both matrix row counts");
  }
}

GoldAlignment::GoldAlignment(std::vector<std::pair<std::uint64_t, std::uint64_t>> pairs) {
  std::unordered_set<std::uint64_t> src_seen;
  std::unordered_set<std::uint64_t> tgt_seen;
  for (const auto& [s, t] : pairs) {
    if (!src_seen.insert(s).second || !tgt_seen.insert(t).second) {
      throw FormatError("gold alignment is not 1-1 at (" + std::to_string(s) + ", " +
                        std::to_string(t) + ")");
    }
    pairs_.emplace(s, t);
  }
}

GoldAlignment GoldAlignment::read_tsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<std::pair<std::uint64_t, std::uint64_t>> pairs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    std::uint64_t s = 0;
    std::uint64_t t = 0;
    std::istringstream ss(line.substr(0, tab == std::string::npos ? 0 : tab));
    std::istringstream ts(tab == std::string::npos ? "" : line.substr(tab + 1));
    if (tab == std::string::npos || !(ss >> s) || !(ts >> t)) {
      throw ParseError("gold line " + std::to_string(line_no) + " is not 'src TAB tgt'",
                       line_no);
    }
    pairs.emplace_back(s, t);
  }
  return GoldAlignment(std::move(pairs));
}

MarginScorer::MarginScorer(const EmbeddingMatrix& src, const EmbeddingMatrix& tgt,
                           std::size_t k, std::size_t block_rows)
    : src_(src), tgt_(tgt), k_(k) {
  require_normalized(src, "source");
  require_normalized(tgt, "target");
  if (src.dim() != tgt.dim()) throw ConfigError("embedding dimensions differ");
  MiningConfig{k}.validate(src.rows(), tgt.rows());

  std::vector<TopK> src_top(src.rows(), TopK(k));
  std::vector<TopK> tgt_top(tgt.rows(), TopK(k));
  for_each_cosine(src, tgt, block_rows, [&](std::size_t i, std::size_t j, double c) {
    src_top[i].push(c);
    tgt_top[j].push(c);
  });
  src_sums_.reserve(src.rows());
  tgt_sums_.reserve(tgt.rows());
  for (const auto& t : src_top) src_sums_.push_back(t.sum());
  for (const auto& t : tgt_top) tgt_sums_.push_back(t.sum());
}

double MarginScorer::score_with_cosine(double cosine, std::size_t src_row,
                                       std::size_t tgt_row) const {
  const double two_k = 2.0 * static_cast<double>(k_);
  const double denom = src_sums_[src_row] / two_k + tgt_sums_[tgt_row] / two_k;
  if (!(denom > 0.0)) return kNegInf;
  return cosine / denom;
}

double MarginScorer::score(std::size_t src_row, std::size_t tgt_row) const {
  return score_with_cosine(dot(src_.row(src_row), tgt_.row(tgt_row)), src_row, tgt_row);
}

double margin_score(std::size_t src_row, std::size_t tgt_row, const EmbeddingMatrix& src,
                    const EmbeddingMatrix& tgt, std::size_t k) {
  return MarginScorer(src, tgt, k).score(src_row, tgt_row);
}

Retrieval retrieve(const EmbeddingMatrix& src, const EmbeddingMatrix& tgt,
                   const MiningConfig& cfg) {
  if (src.empty() || tgt.empty()) throw ConfigError("cannot mine empty embedding matrices");
  cfg.validate(src.rows(), tgt.rows());
  const MarginScorer scorer(src, tgt, cfg.k_neighbors, cfg.block_rows);

  Retrieval r;
  r.forward.assign(src.rows(), kNoMatch);
  r.backward.assign(tgt.rows(), kNoMatch);
  r.forward_score.assign(src.rows(), kNegInf);
  r.backward_score.assign(tgt.rows(), kNegInf);
  // Rows and columns are visited in ascending order, so a strict comparison
  // keeps the lowest index on ties.
  for_each_cosine(src, tgt, cfg.block_rows, [&](std::size_t i, std::size_t j, double c) {
    const double s = scorer.score_with_cosine(c, i, j);
    if (s == kNegInf) return;
    if (s > r.forward_score[i]) {
      r.forward_score[i] = s;
      r.forward[i] = j;
    }
    if (s > r.backward_score[j]) {
      r.backward_score[j] = s;
      r.backward[j] = i;
    }
  });
  return r;
}

MiningResult mine(const EmbeddingMatrix& src, const EmbeddingMatrix& tgt,
                  const MiningConfig& cfg) {
  const auto r = retrieve(src, tgt, cfg);
  MiningResult result;
  result.criterion = cfg.criterion;
  result.k_neighbors = cfg.k_neighbors;
  auto emit = [&](std::size_t i, std::size_t j, double score) {
    result.pairs.push_back({i, j, src.ids()[i], tgt.ids()[j], score});
  };
  switch (cfg.criterion) {
    case Criterion::kForward:
      for (std::size_t i = 0; i < src.rows(); ++i) {
        if (r.forward[i] != kNoMatch) emit(i, r.forward[i], r.forward_score[i]);
      }
      break;
    case Criterion::kBackward:
      for (std::size_t j = 0; j < tgt.rows(); ++j) {
        if (r.backward[j] != kNoMatch) emit(r.backward[j], j, r.backward_score[j]);
      }
      break;
    case Criterion::kIntersection:
      for (std::size_t i = 0; i < src.rows(); ++i) {
        const auto j = r.forward[i];
        if (j != kNoMatch && r.backward[j] == i) emit(i, j, r.forward_score[i]);
      }
      break;
  }
  std::sort(result.pairs.begin(), result.pairs.end(), [](const MinedPair& a, const MinedPair& b) {
    return std::pair(a.src_row, a.tgt_row) < std::pair(b.src_row, b.tgt_row);
  });
  return result;
}

double recall(const MiningResult& result, const GoldAlignment& gold) {
  if (gold.size() == 0) throw ConfigError("recall needs a non-empty gold alignment");
  std::size_t hits = 0;
  for (const auto& p : result.pairs) hits += gold.pairs().count({p.src_id, p.tgt_id});
  return static_cast<double>(hits) / static_cast<double>(gold.size());
}

}  // namespace lem
