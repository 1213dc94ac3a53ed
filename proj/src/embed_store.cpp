#include "sonify/embed_store.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "sonify/error.hpp"
#include "sonify/kernels.hpp"
#include "sonify/wav.hpp"

namespace sonify {
namespace {

bool valid_utf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t len = c < 0x80 ? 1 : (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xE ? 3 : (c >> 3) == 0x1E ? 4 : 0;
    if (len == 0 || i + len > s.size()) return false;
    for (std::size_t k = 1; k < len; ++k)
      if ((static_cast<unsigned char>(s[i + k]) >> 6) != 0x2) return false;
    i += len;
  }
  return true;
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> b) : bytes_(b) {}

  template <typename T>
  T read(const char* what) {
    need(sizeof(T), what);
    T v{};
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(static_cast<T>(bytes_[pos_ + i]) << (8 * i));
    pos_ += sizeof(T);
    return v;
  }

  std::string read_string(const char* what) {
    const auto len = read<std::uint16_t>(what);
    need(len, what);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), len);
    pos_ += len;
    if (!valid_utf8(s)) throw FormatError(std::string("invalid UTF-8 in ") + what);
    return s;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }
  const std::uint8_t* cursor() const { return bytes_.data() + pos_; }

 private:
  void need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n) throw FormatError(std::string("truncated SEMB file while reading ") + what);
  }
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

template <typename T>
void put(std::vector<std::uint8_t>& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

void put_string(std::vector<std::uint8_t>& out, const std::string& s) {
  if (s.size() > 0xFFFF) throw InvalidArgument("string longer than 65535 bytes: " + s.substr(0, 32) + "...");
  put<std::uint16_t>(out, static_cast<std::uint16_t>(s.size()));
  out.insert(out.end(), s.begin(), s.end());
}

}  // namespace

EmbeddingMatrix::EmbeddingMatrix(std::size_t rows, std::size_t dim, std::vector<float> data,
                                 std::vector<std::string> ids, std::string encoder_tag, bool normalize_rows)
    : rows_(rows), dim_(dim), data_(std::move(data)), ids_(std::move(ids)), encoder_tag_(std::move(encoder_tag)) {
  if (rows_ == 0 || dim_ == 0) throw FormatError("embedding matrix must have N >= 1 and D >= 1");
  if (data_.size() != rows_ * dim_) throw FormatError("payload size mismatch");
  if (ids_.size() != rows_) throw FormatError("id count does not match row count");
  index_.reserve(rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    if (!index_.emplace(ids_[r], r).second) throw FormatError("duplicate ID '" + ids_[r] + "'");
  for (std::size_t i = 0; i < data_.size(); ++i)
    if (!std::isfinite(data_[i]))
      throw FormatError("non-finite value at row " + std::to_string(i / dim_) + ", column " +
                        std::to_string(i % dim_));

  norms_.resize(rows_);
  bool unit = true;
  for (std::size_t r = 0; r < rows_; ++r) {
    double acc = 0.0;
    for (float v : row(r)) acc += static_cast<double>(v) * v;
    norms_[r] = std::sqrt(acc);
    if (std::abs(norms_[r] - 1.0) > kNormTolerance) unit = false;
  }
  if (normalize_rows && !unit) {
    for (std::size_t r = 0; r < rows_; ++r) {
      if (norms_[r] == 0.0) throw FormatError("zero-norm row " + std::to_string(r) + " cannot be normalized");
      const double inv = 1.0 / norms_[r];
      float* p = data_.data() + r * dim_;
      for (std::size_t i = 0; i < dim_; ++i) p[i] = static_cast<float>(p[i] * inv);
      double acc = 0.0;
      for (std::size_t i = 0; i < dim_; ++i) acc += static_cast<double>(p[i]) * p[i];
      norms_[r] = std::sqrt(acc);
    }
    unit = true;
  }
  normalized_ = unit;
}

std::optional<std::size_t> EmbeddingMatrix::find(const std::string& id) const {
  const auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

EmbeddingMatrix parse_embeddings(std::span<const std::uint8_t> bytes, const LoadOptions& opts) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), "SEMB", 4) != 0) throw FormatError("bad magic (expected SEMB)");
  Reader in(bytes.subspan(4));
  const auto version = in.read<std::uint32_t>("version");
  if (version != kSembVersion) throw FormatError("unsupported SEMB version " + std::to_string(version));
  const auto n = in.read<std::uint64_t>("row count");
  const auto d = in.read<std::uint32_t>("dimension");
  const auto flags = in.read<std::uint32_t>("flags");
  if (n == 0 || d == 0) throw FormatError("SEMB header declares an empty matrix");
  std::string tag = in.read_string("encoder tag");

  // Each id needs at least its 2-byte length prefix.
  if (n > in.remaining() / 2) throw FormatError("payload size mismatch");
  std::vector<std::string> ids;
  ids.reserve(static_cast<std::size_t>(n));
  for (std::uint64_t i = 0; i < n; ++i) ids.push_back(in.read_string("id table"));

  const std::uint64_t floats = n * d;
  if (floats > in.remaining() / 4 || in.remaining() != floats * 4) throw FormatError("payload size mismatch");
  std::vector<float> data(static_cast<std::size_t>(floats));
  const std::uint8_t* p = in.cursor();
  for (std::size_t i = 0; i < data.size(); ++i, p += 4) {
    const std::uint32_t u = static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
                            (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
    std::memcpy(&data[i], &u, 4);
  }

  if (flags & kSembFlagNormalized) {
    for (std::size_t r = 0; r < n; ++r) {
      double acc = 0.0;
      for (std::size_t i = 0; i < d; ++i) acc += static_cast<double>(data[r * d + i]) * data[r * d + i];
      if (std::abs(std::sqrt(acc) - 1.0) > EmbeddingMatrix::kNormTolerance)
        throw FormatError("file flagged normalized but row " + std::to_string(r) + " is not unit length");
    }
  }
  return EmbeddingMatrix(static_cast<std::size_t>(n), d, std::move(data), std::move(ids), std::move(tag),
                         opts.normalize_rows);
}

EmbeddingMatrix load_embeddings(const std::filesystem::path& path, const LoadOptions& opts) {
  const auto bytes = read_file(path);
  try {
    return parse_embeddings(bytes, opts);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> serialize_embeddings(const EmbeddingMatrix& m) {
  std::vector<std::uint8_t> out;
  out.reserve(32 + m.rows() * (m.dim() * 4 + 16));
  for (char c : {'S', 'E', 'M', 'B'}) out.push_back(static_cast<std::uint8_t>(c));
  put<std::uint32_t>(out, kSembVersion);
  put<std::uint64_t>(out, m.rows());
  put<std::uint32_t>(out, static_cast<std::uint32_t>(m.dim()));
  put<std::uint32_t>(out, m.normalized() ? kSembFlagNormalized : 0u);
  put_string(out, m.encoder_tag());
  for (const auto& id : m.ids()) put_string(out, id);
  for (float v : m.data()) {
    std::uint32_t u;
    std::memcpy(&u, &v, 4);
    put<std::uint32_t>(out, u);
  }
  return out;
}

void save_embeddings(const std::filesystem::path& path, const EmbeddingMatrix& m) {
  write_file_atomic(path, serialize_embeddings(m));
}

namespace {

std::vector<float> unit_query(std::span<const float> query, const EmbeddingMatrix& pool) {
  if (query.size() != pool.dim())
    throw InvalidArgument("dimension mismatch: query has " + std::to_string(query.size()) + ", pool has " +
                          std::to_string(pool.dim()));
  double acc = 0.0;
  for (float v : query) {
    if (!std::isfinite(v)) throw InvalidArgument("query has non-finite entries");
    acc += static_cast<double>(v) * v;
  }
  if (acc == 0.0) throw InvalidArgument("zero query vector");
  const double inv = 1.0 / std::sqrt(acc);
  std::vector<float> q(query.size());
  for (std::size_t i = 0; i < q.size(); ++i) q[i] = static_cast<float>(query[i] * inv);
  return q;
}

double finish_score(double dot, const EmbeddingMatrix& pool, std::size_t r) {
  double s = pool.normalized() ? dot : (pool.row_norm(r) > 0.0 ? dot / pool.row_norm(r) : 0.0);
  return std::clamp(s, -1.0, 1.0);
}

}  // namespace

ScoreVector cosine_sim(std::span<const float> query, const EmbeddingMatrix& pool, Execution exec) {
  const auto q = unit_query(query, pool);
  std::vector<float> dots(pool.rows());
  if (exec == Execution::parallel)
    kernels::dot_rows_parallel(q.data(), pool.data().data(), pool.rows(), pool.dim(), dots.data());
  else
    kernels::dot_rows_serial(q.data(), pool.data().data(), pool.rows(), pool.dim(), dots.data());
  ScoreVector out;
  out.scores.resize(pool.rows());
  for (std::size_t r = 0; r < pool.rows(); ++r) out.scores[r] = finish_score(dots[r], pool, r);
  return out;
}

std::vector<ScoreVector> cosine_sim_batch(const EmbeddingMatrix& queries, const EmbeddingMatrix& pool,
                                          Execution exec) {
  if (queries.dim() != pool.dim()) throw InvalidArgument("dimension mismatch between queries and pool");
  std::vector<ScoreVector> out(queries.rows());
  const auto n = static_cast<std::int64_t>(queries.rows());
#pragma omp parallel for schedule(dynamic) if (exec == Execution::parallel)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    out[idx] = cosine_sim(queries.row(idx), pool, Execution::sequential);
    out[idx].query_id = queries.id(idx);
  }
  return out;
}

ScoreVector reference::cosine_sim(std::span<const float> query, const EmbeddingMatrix& pool) {
  if (query.size() != pool.dim()) throw InvalidArgument("dimension mismatch");
  double qn = 0.0;
  for (float v : query) qn += static_cast<double>(v) * v;
  if (qn == 0.0) throw InvalidArgument("zero query vector");
  qn = std::sqrt(qn);
  std::vector<double> dots(pool.rows());
  kernels::dot_rows_reference(query.data(), pool.data().data(), pool.rows(), pool.dim(), dots.data());
  ScoreVector out;
  out.scores.resize(pool.rows());
  for (std::size_t r = 0; r < pool.rows(); ++r) {
    double rn = 0.0;
    for (float v : pool.row(r)) rn += static_cast<double>(v) * v;
    out.scores[r] = rn == 0.0 ? 0.0 : std::clamp(dots[r] / (qn * std::sqrt(rn)), -1.0, 1.0);
  }
  return out;
}

}  // namespace sonify
