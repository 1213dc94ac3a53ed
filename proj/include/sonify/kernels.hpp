#pragma once

#include <cstddef>

// Similarity kernels. Each parallel kernel has a serial counterpart with the
// same arithmetic, plus a naive double-precision reference used by tests.

namespace sonify::kernels {

/// Above this dimension the per-lane sums use compensated summation.
inline constexpr std::size_t kCompensatedDim = 1024;

/// Single dot product with 32-bit lane accumulators.
float dot(const float* a, const float* b, std::size_t dim) noexcept;

/// out[r] = dot(query, rows + r * dim) for r in [0, n).
void dot_rows_serial(const float* query, const float* rows, std::size_t n, std::size_t dim, float* out) noexcept;

/// Same result as dot_rows_serial, rows split across OpenMP threads.
void dot_rows_parallel(const float* query, const float* rows, std::size_t n, std::size_t dim, float* out) noexcept;

/// Naive scalar loop accumulating in double.
void dot_rows_reference(const float* query, const float* rows, std::size_t n, std::size_t dim,
                        double* out) noexcept;

}  // namespace sonify::kernels
