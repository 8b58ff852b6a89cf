#include "lem/embeddings.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include "lem/error.hpp"

namespace lem {

namespace {

constexpr std::array<char, 8> kMagic = {'L', 'E', 'M', 'E', 'M', 'B', '0', '1'};
constexpr std::array<char, 8> kMetaMagic = {'L', 'E', 'M', 'M', 'E', 'T', 'A', '1'};

template <typename T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
  return v;
}

template <typename T>
void put(std::ostream& out, T v) {
  v = to_little(v);
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::istream& in, const char* what) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) {
    throw FormatError(std::string("embedding file truncated while reading ") + what);
  }
  return to_little(v);
}

double row_norm(std::span<const float> r) { return std::sqrt(dot(r, r)); }

}  // namespace

EmbeddingMatrix::EmbeddingMatrix(std::size_t rows, std::size_t dim, std::vector<float> data,
                                 std::vector<std::uint64_t> ids, bool normalized)
    : rows_(rows), dim_(dim), data_(std::move(data)), ids_(std::move(ids)),
      normalized_(normalized) {
  if (data_.size() != rows_ * dim_) {
    throw FormatError("embedding data has " + std::to_string(data_.size()) +
                      " values, expected " + std::to_string(rows_ * dim_));
  }
  if (ids_.size() != rows_) throw FormatError("embedding ids do not match row count");
  std::unordered_set<std::uint64_t> seen;
  for (auto id : ids_) {
    if (!seen.insert(id).second) {
      throw FormatError("duplicate embedding id " + std::to_string(id));
    }
  }
  if (normalized_) {
    for (std::size_t i = 0; i < rows_; ++i) {
      if (std::abs(row_norm(row(i)) - 1.0) > kUnitNormTolerance) {
        throw FormatError("row " + std::to_string(i) + " is flagged normalized but is not unit length");
      }
    }
  }
}

double dot(std::span<const float> a, std::span<const float> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  }
  return acc;
}

std::vector<float> mean_pool(std::span<const float> token_vectors, std::size_t dim,
                             std::span<const bool> is_special) {
  if (dim == 0 || token_vectors.size() != is_special.size() * dim) {
    throw Error("token vector shape does not match the specials mask");
  }
  std::vector<double> acc(dim, 0.0);
  std::size_t count = 0;
  for (std::size_t t = 0; t < is_special.size(); ++t) {
    if (is_special[t]) continue;
    for (std::size_t j = 0; j < dim; ++j) acc[j] += token_vectors[t * dim + j];
    ++count;
  }
  if (count == 0) throw Error("mean pooling needs at least one non-special token");
  std::vector<float> out(dim);
  for (std::size_t j = 0; j < dim; ++j) {
    out[j] = static_cast<float>(acc[j] / static_cast<double>(count));
  }
  return out;
}

EmbeddingMatrix l2_normalize(const EmbeddingMatrix& m) {
  std::vector<float> data = m.data();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const double norm = row_norm(m.row(i));
    if (norm == 0.0) throw Error("cannot normalize zero row " + std::to_string(i));
    for (std::size_t j = 0; j < m.dim(); ++j) {
      auto& v = data[i * m.dim() + j];
      v = static_cast<float>(static_cast<double>(v) / norm);
    }
  }
  EmbeddingMatrix out(m.rows(), m.dim(), std::move(data), m.ids(), true);
  out.set_metadata(m.metadata());
  return out;
}

void write_embeddings(std::ostream& out, const EmbeddingMatrix& m) {
  if (m.rows() > UINT32_MAX || m.dim() > UINT32_MAX) {
    throw FormatError("embedding matrix too large for the file header");
  }
  out.write(kMagic.data(), kMagic.size());
  put<std::uint32_t>(out, static_cast<std::uint32_t>(m.rows()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(m.dim()));
  put<std::uint8_t>(out, m.normalized() ? 1 : 0);
  for (float v : m.data()) put<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
  for (auto id : m.ids()) put<std::uint64_t>(out, id);
  if (!m.metadata().empty()) {
    out.write(kMetaMagic.data(), kMetaMagic.size());
    put<std::uint32_t>(out, static_cast<std::uint32_t>(m.metadata().size()));
    out.write(m.metadata().data(), static_cast<std::streamsize>(m.metadata().size()));
  }
  if (!out) throw Error("failed to write embedding data");
}

void write_embeddings(const std::filesystem::path& path, const EmbeddingMatrix& m) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  write_embeddings(out, m);
}

EmbeddingMatrix read_embeddings(std::istream& in) {
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size())) throw FormatError("embedding file truncated in magic");
  if (magic != kMagic) throw FormatError("bad embedding magic (expected LEMEMB01)");
  const auto n = get<std::uint32_t>(in, "row count");
  const auto d = get<std::uint32_t>(in, "dimension");
  const auto flag = get<std::uint8_t>(in, "normalized flag");
  if (flag > 1) throw FormatError("normalized flag must be 0 or 1");

  std::vector<float> data(static_cast<std::size_t>(n) * d);
  for (auto& v : data) v = std::bit_cast<float>(get<std::uint32_t>(in, "payload"));
  std::vector<std::uint64_t> ids(n);
  for (auto& id : ids) id = get<std::uint64_t>(in, "ids");

  std::string metadata;
  std::array<char, 8> meta_magic{};
  in.read(meta_magic.data(), meta_magic.size());
  if (in.gcount() != 0) {
    if (in.gcount() != static_cast<std::streamsize>(meta_magic.size()) ||
        meta_magic != kMetaMagic) {
      throw FormatError("unexpected bytes after embedding ids");
    }
    in.clear();
    const auto len = get<std::uint32_t>(in, "metadata length");
    metadata.resize(len);
    if (!in.read(metadata.data(), len)) throw FormatError("embedding metadata truncated");
    if (in.peek() != std::char_traits<char>::eof()) {
      throw FormatError("unexpected bytes after embedding metadata");
    }
  }
  EmbeddingMatrix m(n, d, std::move(data), std::move(ids), flag == 1);
  m.set_metadata(std::move(metadata));
  return m;
}

EmbeddingMatrix read_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return read_embeddings(in);
}

EmbeddingCheck check_embeddings(const std::filesystem::path& path) {
  const auto m = read_embeddings(path);
  EmbeddingCheck c;
  c.rows = m.rows();
  c.dim = m.dim();
  c.normalized = m.normalized();
  c.metadata = m.metadata();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const double norm = row_norm(m.row(i));
    if (norm == 0.0) ++c.zero_rows;
    c.max_norm_deviation = std::max(c.max_norm_deviation, std::abs(norm - 1.0));
  }
  return c;
}

}  // namespace lem
