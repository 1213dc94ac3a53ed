#include "sonify/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "sonify/error.hpp"

namespace sonify {

double mean_paired_cosine(const EmbeddingMatrix& a, const EmbeddingMatrix& b) {
  if (a.dim() != b.dim()) throw InvalidArgument("dimension mismatch");
  if (a.rows() != b.rows()) throw InvalidArgument("ID misalignment: row counts differ");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto j = b.find(a.id(i));
    if (!j) throw InvalidArgument("ID misalignment: '" + a.id(i) + "' missing from second matrix");
    const auto x = a.row(i);
    const auto y = b.row(*j);
    double dot = 0.0;
    for (std::size_t d = 0; d < x.size(); ++d) dot += static_cast<double>(x[d]) * y[d];
    const double denom = a.row_norm(i) * b.row_norm(*j);
    sum += denom > 0.0 ? std::clamp(dot / denom, -1.0, 1.0) : 0.0;
  }
  return sum / static_cast<double>(a.rows());
}

GaussianStats gaussian_stats(const EmbeddingMatrix& features) {
  const std::size_t n = features.rows();
  if (n < 2) throw InvalidArgument("gaussian_stats needs at least 2 rows");
  const auto d = static_cast<Eigen::Index>(features.dim());
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), d);
  for (std::size_t r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < d; ++c) x(static_cast<Eigen::Index>(r), c) = features.row(r)[static_cast<std::size_t>(c)];
  GaussianStats s;
  s.n = n;
  s.mean = x.colwise().mean().transpose();
  const Eigen::MatrixXd centered = x.rowwise() - s.mean.transpose();
  s.cov = (centered.transpose() * centered) / static_cast<double>(n - 1);
  return s;
}

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m) {
  const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  if (eig.info() != Eigen::Success) throw Error("eigendecomposition failed");
  const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
}

double frechet_distance(const GaussianStats& a, const GaussianStats& b) {
  const auto d = a.mean.size();
  if (b.mean.size() != d || a.cov.rows() != d || a.cov.cols() != d || b.cov.rows() != d || b.cov.cols() != d)
    throw InvalidArgument("dimension mismatch");
  if (!a.mean.allFinite() || !b.mean.allFinite() || !a.cov.allFinite() || !b.cov.allFinite())
    throw InvalidArgument("non-finite Gaussian statistics");

  const Eigen::MatrixXd sa = 0.5 * (a.cov + a.cov.transpose());
  const Eigen::MatrixXd sb = 0.5 * (b.cov + b.cov.transpose());
  const Eigen::MatrixXd ra = psd_sqrt(sa);
  const Eigen::MatrixXd inner = ra * sb * ra;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (inner + inner.transpose()), Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw Error("eigendecomposition failed");
  const double tr_sqrt = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();

  const double d2 = (a.mean - b.mean).squaredNorm() + sa.trace() + sb.trace() - 2.0 * tr_sqrt;
  return std::max(0.0, d2);
}

namespace {

double squared_distance(const std::vector<float>& x, const std::vector<float>& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double diff = static_cast<double>(x[i]) - y[i];
    s += diff * diff;
  }
  return s;
}

std::size_t classify(const std::vector<float>& query, const std::vector<std::vector<float>>& refs, std::size_t k) {
  std::vector<std::pair<double, std::size_t>> dist(refs.size());
  for (std::size_t j = 0; j < refs.size(); ++j) dist[j] = {squared_distance(query, refs[j]), j};
  const std::size_t kk = std::min(k, refs.size());
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(kk), dist.end());
  if (kk == 1) return dist.front().second;
  // Every reference is its own class, so the vote is over the kk labels.
  std::vector<std::size_t> votes(refs.size(), 0);
  std::size_t best = dist.front().second;
  for (std::size_t i = 0; i < kk; ++i) {
    const std::size_t label = dist[i].second;
    if (++votes[label] > votes[best]) best = label;
  }
  return best;
}

}  // namespace

LoudnessStudyResult knn_loudness_study(std::span<const AudioChunk> items, const Embedder& embedder,
                                       std::span<const double> gains_db, std::size_t k, Execution exec) {
  if (items.empty()) throw InvalidArgument("empty item set");
  if (k == 0) throw InvalidArgument("k must be >= 1");

  std::vector<std::vector<float>> refs;
  refs.reserve(items.size());
  for (const auto& item : items) {
    auto e = embedder(item);
    if (e.empty()) throw InvalidArgument("embedder returned an empty vector");
    if (!refs.empty() && e.size() != refs.front().size()) throw InvalidArgument("embedder output size varies");
    if (embedder(item) != e) throw InvalidArgument("non-deterministic embedder: two calls disagree");
    refs.push_back(std::move(e));
  }

  LoudnessStudyResult res;
  res.gains_db.assign(gains_db.begin(), gains_db.end());
  res.accuracy.assign(gains_db.size(), 0.0);
  const auto n_gains = static_cast<std::int64_t>(gains_db.size());
#pragma omp parallel for schedule(dynamic) if (exec == Execution::parallel)
  for (std::int64_t gi = 0; gi < n_gains; ++gi) {
    const double scale = std::pow(10.0, gains_db[static_cast<std::size_t>(gi)] / 20.0);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < items.size(); ++i) {
      AudioChunk scaled = items[i];
      for (float& v : scaled.samples) v = static_cast<float>(static_cast<double>(v) * scale);
      if (classify(embedder(scaled), refs, k) == i) ++correct;
    }
    res.accuracy[static_cast<std::size_t>(gi)] = static_cast<double>(correct) / static_cast<double>(items.size());
  }
  return res;
}

std::vector<double> parse_gain_grid(const std::string& spec) {
  std::vector<double> parts;
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ':')) {
    try {
      std::size_t used = 0;
      parts.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw InvalidArgument("invalid gain grid '" + spec + "'");
    }
  }
  if (parts.size() != 3) throw InvalidArgument("gain grid must be start:step:stop, got '" + spec + "'");
  const double start = parts[0], step = parts[1], stop = parts[2];
  if (!(step > 0.0) || stop < start) throw InvalidArgument("gain grid needs step > 0 and stop >= start");
  std::vector<double> grid;
  const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  for (std::size_t i = 0; i < count; ++i) grid.push_back(start + step * static_cast<double>(i));
  return grid;
}

Embedder raw_prefix_embedder(std::size_t n) {
  return [n](const AudioChunk& c) {
    std::vector<float> v(n, 0.0f);
    std::copy_n(c.samples.begin(), std::min(n, c.samples.size()), v.begin());
    return v;
  };
}

Embedder l2_normalized(Embedder inner) {
  return [inner = std::move(inner)](const AudioChunk& c) {
    auto v = inner(c);
    double s = 0.0;
    for (float x : v) s += static_cast<double>(x) * x;
    if (s > 0.0) {
      const double inv = 1.0 / std::sqrt(s);
      for (float& x : v) x = static_cast<float>(x * inv);
    }
    return v;
  };
}

}  // namespace sonify
