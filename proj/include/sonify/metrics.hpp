#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "sonify/audio.hpp"
#include "sonify/embed_store.hpp"

namespace sonify {

/// Mean cosine similarity between rows paired by id. Both matrices must hold
/// the same id set and dimension.
double mean_paired_cosine(const EmbeddingMatrix& a, const EmbeddingMatrix& b);

/// Audio-image similarity: audio embeddings against generated-image embeddings.
inline double ais(const EmbeddingMatrix& audio, const EmbeddingMatrix& image) {
  return mean_paired_cosine(audio, image);
}

/// Image-image similarity: generated against ground-truth image embeddings.
inline double iis(const EmbeddingMatrix& generated, const EmbeddingMatrix& ground_truth) {
  return mean_paired_cosine(generated, ground_truth);
}

struct GaussianStats {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  std::size_t n = 0;
};

/// Sample mean and unbiased covariance; needs at least two rows.
GaussianStats gaussian_stats(const EmbeddingMatrix& features);

/// Squared Frechet distance between Gaussians,
///   |mu_a - mu_b|^2 + tr(S_a) + tr(S_b) - 2 tr((S_a S_b)^{1/2}).
/// The trace term is evaluated as tr((A^{1/2} S_b A^{1/2})^{1/2}) with A = S_a,
/// using symmetric eigendecompositions with eigenvalues floored at zero.
double frechet_distance(const GaussianStats& a, const GaussianStats& b);

/// Symmetric PSD square root, negative eigenvalues floored at zero.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m);

using Embedder = std::function<std::vector<float>(const AudioChunk&)>;

struct LoudnessStudyResult {
  std::vector<double> gains_db;
  std::vector<double> accuracy;
};

/// Loudness retention of an embedding space. Each item is its own class; the
/// reference set is the items' embeddings at 0 dB. For every gain the items
/// are scaled by 10^(g/20), embedded and classified by k-nearest reference
/// (Euclidean, majority vote, ties to the nearer neighbour).
///
/// The embedder must be deterministic and, with parallel execution,
/// callable from several threads.
LoudnessStudyResult knn_loudness_study(std::span<const AudioChunk> items, const Embedder& embedder,
                                       std::span<const double> gains_db, std::size_t k = 1,
                                       Execution exec = Execution::parallel);

/// "start:step:stop" inclusive grid, e.g. "-30:3:6".
std::vector<double> parse_gain_grid(const std::string& spec);

/// First `n` samples, unchanged (a linear, loudness-sensitive embedder).
Embedder raw_prefix_embedder(std::size_t n = 256);

/// Wraps an embedder with L2 normalization of its output.
Embedder l2_normalized(Embedder inner);

}  // namespace sonify
