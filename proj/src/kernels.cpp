#include "sonify/kernels.hpp"

#include <algorithm>
#include <cstdint>

namespace sonify::kernels {
namespace {

constexpr std::size_t kLanes = 16;
constexpr std::int64_t kRowBlock = 256;

float dot_plain(const float* a, const float* b, std::size_t dim) noexcept {
  float acc[kLanes] = {};
  std::size_t i = 0;
  for (; i + kLanes <= dim; i += kLanes)
    for (std::size_t l = 0; l < kLanes; ++l) acc[l] += a[i + l] * b[i + l];
  for (std::size_t w = kLanes / 2; w > 0; w /= 2)
    for (std::size_t l = 0; l < w; ++l) acc[l] += acc[l + w];
  float s = acc[0];
  for (; i < dim; ++i) s += a[i] * b[i];
  return s;
}

float dot_compensated(const float* a, const float* b, std::size_t dim) noexcept {
  float sum[kLanes] = {};
  float comp[kLanes] = {};
  std::size_t i = 0;
  for (; i + kLanes <= dim; i += kLanes) {
    for (std::size_t l = 0; l < kLanes; ++l) {
      const float y = a[i + l] * b[i + l] - comp[l];
      const float t = sum[l] + y;
      comp[l] = (t - sum[l]) - y;
      sum[l] = t;
    }
  }
  float s = 0.0f, c = 0.0f;
  auto add = [&](float v) {
    const float y = v - c;
    const float t = s + y;
    c = (t - s) - y;
    s = t;
  };
  for (std::size_t l = 0; l < kLanes; ++l) add(sum[l] - comp[l]);
  for (; i < dim; ++i) add(a[i] * b[i]);
  return s;
}

}  // namespace

float dot(const float* a, const float* b, std::size_t dim) noexcept {
  return dim > kCompensatedDim ? dot_compensated(a, b, dim) : dot_plain(a, b, dim);
}

void dot_rows_serial(const float* query, const float* rows, std::size_t n, std::size_t dim, float* out) noexcept {
  for (std::size_t r = 0; r < n; ++r) out[r] = dot(query, rows + r * dim, dim);
}

void dot_rows_parallel(const float* query, const float* rows, std::size_t n, std::size_t dim, float* out) noexcept {
  const auto blocks = (static_cast<std::int64_t>(n) + kRowBlock - 1) / kRowBlock;
#pragma omp parallel for schedule(static)
  for (std::int64_t b = 0; b < blocks; ++b) {
    const auto begin = static_cast<std::size_t>(b * kRowBlock);
    const std::size_t end = std::min(n, begin + static_cast<std::size_t>(kRowBlock));
    for (std::size_t r = begin; r < end; ++r) out[r] = dot(query, rows + r * dim, dim);
  }
}

void dot_rows_reference(const float* query, const float* rows, std::size_t n, std::size_t dim,
                        double* out) noexcept {
  for (std::size_t r = 0; r < n; ++r) {
    double acc = 0.0;
    for (std::size_t i = 0; i < dim; ++i) acc += static_cast<double>(query[i]) * rows[r * dim + i];
    out[r] = acc;
  }
}

}  // namespace sonify::kernels
