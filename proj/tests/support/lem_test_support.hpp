#pragma once

// Fixtures and independent reference implementations shared by the tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "lem/annotation.hpp"
#include "lem/embeddings.hpp"
#include "lem/rng.hpp"
#include "lem/tokenization.hpp"

namespace lem::testing {

// ids: 0 <pad>, 1 <s>, 2 </s>, 3 <sep>, 4 <mask>, 5 <unk>, then `regular`.
inline Vocabulary make_vocab(const std::vector<std::string>& regular,
                             std::string continuation_prefix = {}) {
  std::vector<std::string> tokens = {"<pad>", "<s>", "</s>", "<sep>", "<mask>", "<unk>"};
  tokens.insert(tokens.end(), regular.begin(), regular.end());
  return Vocabulary(std::move(tokens), SpecialIds{1, 2, 3, 4, 0, 5},
                    std::move(continuation_prefix));
}

inline Vocabulary numbered_vocab(std::size_t regular_count) {
  std::vector<std::string> regular;
  for (std::size_t i = 0; i < regular_count; ++i) regular.push_back("t" + std::to_string(i));
  return make_vocab(regular);
}

// A sentence whose words have the given sub-word counts. Token ids cycle
// through the regular range of numbered_vocab(50).
inline TokenizedSentence sentence_from_word_lengths(const std::vector<std::size_t>& lengths,
                                                    std::uint64_t id = 0) {
  TokenizedSentence s;
  s.sentence_id = id;
  TokenId next = 6;
  for (std::size_t w = 0; w < lengths.size(); ++w) {
    for (std::size_t t = 0; t < lengths[w]; ++t) {
      s.tokens.push_back({next, "p", static_cast<std::int64_t>(w), false});
      next = next >= 55 ? 6 : next + 1;
    }
  }
  return s;
}

inline TokenizedSentence single_token_words(std::size_t m, std::uint64_t id = 0) {
  return sentence_from_word_lengths(std::vector<std::size_t>(m, 1), id);
}

inline EmbeddingMatrix random_matrix(std::size_t rows, std::size_t dim, std::uint64_t seed,
                                     std::uint64_t id_base = 0) {
  CounterRng rng(seed);
  std::vector<float> data(rows * dim);
  for (auto& v : data) v = static_cast<float>(rng.uniform01() * 2.0 - 1.0);
  std::vector<std::uint64_t> ids(rows);
  for (std::size_t i = 0; i < rows; ++i) ids[i] = id_base + i;
  return EmbeddingMatrix(rows, dim, std::move(data), std::move(ids));
}

// O(n^2) margin retrieval written from the definition: full cosine table,
// neighbour lists sorted descending, argmax with lowest-index ties.
struct BruteForceMining {
  std::set<std::pair<std::size_t, std::size_t>> forward;
  std::set<std::pair<std::size_t, std::size_t>> backward;
  std::set<std::pair<std::size_t, std::size_t>> intersection;
  std::vector<std::vector<double>> margin;
};

inline BruteForceMining brute_force_mining(const EmbeddingMatrix& x, const EmbeddingMatrix& y,
                                           std::size_t k) {
  const std::size_t n = x.rows();
  const std::size_t m = y.rows();
  std::vector<std::vector<double>> cos(n, std::vector<double>(m));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      double acc = 0.0;
      for (std::size_t d = 0; d < x.dim(); ++d) {
        acc += static_cast<double>(x.row(i)[d]) * static_cast<double>(y.row(j)[d]);
      }
      cos[i][j] = acc;
    }
  }
  auto topk_sum = [k](std::vector<double> v) {
    std::sort(v.begin(), v.end(), std::greater<>());
    double s = 0.0;
    for (std::size_t t = 0; t < k; ++t) s += v[t];
    return s;
  };
  std::vector<double> sx(n);
  std::vector<double> sy(m);
  for (std::size_t i = 0; i < n; ++i) sx[i] = topk_sum(cos[i]);
  for (std::size_t j = 0; j < m; ++j) {
    std::vector<double> col(n);
    for (std::size_t i = 0; i < n; ++i) col[i] = cos[i][j];
    sy[j] = topk_sum(col);
  }
  BruteForceMining out;
  const double neg_inf = -std::numeric_limits<double>::infinity();
  out.margin.assign(n, std::vector<double>(m));
  const double two_k = 2.0 * static_cast<double>(k);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double denom = sx[i] / two_k + sy[j] / two_k;
      out.margin[i][j] = denom > 0.0 ? cos[i][j] / denom : neg_inf;
    }
  }
  std::vector<std::size_t> fw(n, SIZE_MAX);
  std::vector<std::size_t> bw(m, SIZE_MAX);
  for (std::size_t i = 0; i < n; ++i) {
    double best = neg_inf;
    for (std::size_t j = 0; j < m; ++j) {
      if (out.margin[i][j] != neg_inf && out.margin[i][j] > best) {
        best = out.margin[i][j];
        fw[i] = j;
      }
    }
    if (fw[i] != SIZE_MAX) out.forward.emplace(i, fw[i]);
  }
  for (std::size_t j = 0; j < m; ++j) {
    double best = neg_inf;
    for (std::size_t i = 0; i < n; ++i) {
      if (out.margin[i][j] != neg_inf && out.margin[i][j] > best) {
        best = out.margin[i][j];
        bw[j] = i;
      }
    }
    if (bw[j] != SIZE_MAX) out.backward.emplace(bw[j], j);
  }
  for (const auto& p : out.forward) {
    if (out.backward.count(p)) out.intersection.insert(p);
  }
  return out;
}

// Upper-tail chi-square probability via boost, for the statistical tests.
double chi_square_survival(double statistic, double dof);

}  // namespace lem::testing

#include <boost/math/distributions/chi_squared.hpp>

inline double lem::testing::chi_square_survival(double statistic, double dof) {
  const boost::math::chi_squared_distribution<double> dist(dof);
  return boost::math::cdf(boost::math::complement(dist, statistic));
}
