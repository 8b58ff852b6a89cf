#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace lem {

inline constexpr double kUnitNormTolerance = 1e-4;

// Row-major n x d float matrix of sentence vectors keyed by sentence id.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;
  // Throws FormatError when sizes disagree, ids repeat, or a matrix flagged
  // normalized has a row whose norm is off by more than kUnitNormTolerance.
  EmbeddingMatrix(std::size_t rows, std::size_t dim, std::vector<float> data,
                  std::vector<std::uint64_t> ids, bool normalized = false);

  std::size_t rows() const { return rows_; }
  std::size_t dim() const { return dim_; }
  bool normalized() const { return normalized_; }
  bool empty() const { return rows_ == 0; }

  std::span<const float> row(std::size_t i) const {
    return {data_.data() + i * dim_, dim_};
  }
  const std::vector<float>& data() const { return data_; }
  const std::vector<std::uint64_t>& ids() const { return ids_; }

  // Free-form JSON stored in the optional trailer, e.g. {"pooling":"mean"}.
  const std::string& metadata() const { return metadata_; }
  void set_metadata(std::string json) { metadata_ = std::move(json); }

  bool operator==(const EmbeddingMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t dim_ = 0;
  std::vector<float> data_;
  std::vector<std::uint64_t> ids_;
  bool normalized_ = false;
  std::string metadata_;
};

// Mean of the rows of `token_vectors` (t x dim) whose mask entry is false.
std::vector<float> mean_pool(std::span<const float> token_vectors, std::size_t dim,
                             std::span<const bool> is_special);

// Throws Error naming the first zero row.
EmbeddingMatrix l2_normalize(const EmbeddingMatrix& m);

// Dot product accumulated in double, left to right.
double dot(std::span<const float> a, std::span<const float> b);

// Binary layout (little-endian):
//   "LEMEMB01" | u32 n | u32 d | u8 normalized | f32[n*d] | u64[n] ids
//   [ "LEMMETA1" | u32 len | len bytes of UTF-8 JSON ]
void write_embeddings(std::ostream& out, const EmbeddingMatrix& m);
void write_embeddings(const std::filesystem::path& path, const EmbeddingMatrix& m);
EmbeddingMatrix read_embeddings(std::istream& in);
EmbeddingMatrix read_embeddings(const std::filesystem::path& path);

struct EmbeddingCheck {
  std::size_t rows = 0;
  std::size_t dim = 0;
  bool normalized = false;
  double max_norm_deviation = 0.0;  // |norm - 1| over rows
  std::size_t zero_rows = 0;
  std::string metadata;
};

// Reads and validates the file (header, payload, ids, norms).
EmbeddingCheck check_embeddings(const std::filesystem::path& path);

}  // namespace lem
