#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace sonify {

enum class Execution { sequential, parallel };

/// N x D row-major float matrix with one unique id per row.
///
/// Immutable after construction. Construction validates ids, dimensions and
/// finiteness; with normalize_rows each row is scaled to unit L2 norm.
class EmbeddingMatrix {
 public:
  static constexpr double kNormTolerance = 1e-4;

  EmbeddingMatrix() = default;
  EmbeddingMatrix(std::size_t rows, std::size_t dim, std::vector<float> data, std::vector<std::string> ids,
                  std::string encoder_tag, bool normalize_rows);

  std::size_t rows() const { return rows_; }
  std::size_t dim() const { return dim_; }
  bool normalized() const { return normalized_; }
  const std::string& encoder_tag() const { return encoder_tag_; }
  const std::vector<std::string>& ids() const { return ids_; }
  const std::string& id(std::size_t row) const { return ids_[row]; }
  std::span<const float> data() const { return data_; }
  std::span<const float> row(std::size_t r) const { return std::span<const float>(data_).subspan(r * dim_, dim_); }
  std::optional<std::size_t> find(const std::string& id) const;

  /// L2 norms captured at construction (all ~1 when normalized).
  double row_norm(std::size_t r) const { return norms_[r]; }

 private:
  std::size_t rows_ = 0;
  std::size_t dim_ = 0;
  std::vector<float> data_;
  std::vector<std::string> ids_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<double> norms_;
  std::string encoder_tag_;
  bool normalized_ = false;
};

/// Similarity of one query against every pool row.
struct ScoreVector {
  std::vector<double> scores;
  std::string query_id;
};

struct LoadOptions {
  /// Rows are L2-normalized on load unless this is false (feature matrices
  /// for Frechet statistics must keep their scale).
  bool normalize_rows = true;
};

// SEMB v1, little-endian:
//   "SEMB" | version u32 = 1 | N u64 | D u32 | flags u32 (bit0 = normalized)
//   | encoder_tag: u16 length + UTF-8 | N ids: u16 length + UTF-8 | N*D f32
inline constexpr std::uint32_t kSembVersion = 1;
inline constexpr std::uint32_t kSembFlagNormalized = 1u;

EmbeddingMatrix parse_embeddings(std::span<const std::uint8_t> bytes, const LoadOptions& opts = {});
EmbeddingMatrix load_embeddings(const std::filesystem::path& path, const LoadOptions& opts = {});
std::vector<std::uint8_t> serialize_embeddings(const EmbeddingMatrix& m);
void save_embeddings(const std::filesystem::path& path, const EmbeddingMatrix& m);

/// Cosine similarity of `query` against every row, clamped to [-1, 1].
/// Throws InvalidArgument on dimension mismatch or a zero query.
ScoreVector cosine_sim(std::span<const float> query, const EmbeddingMatrix& pool,
                       Execution exec = Execution::parallel);

/// One ScoreVector per query row, in query order. Parallel execution splits
/// across queries.
std::vector<ScoreVector> cosine_sim_batch(const EmbeddingMatrix& queries, const EmbeddingMatrix& pool,
                                          Execution exec = Execution::parallel);

namespace reference {
/// Naive double-precision cosine loop.
ScoreVector cosine_sim(std::span<const float> query, const EmbeddingMatrix& pool);
}  // namespace reference

}  // namespace sonify
