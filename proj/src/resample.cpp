#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <vector>

#include "sonify/audio.hpp"
#include "sonify/error.hpp"

// Polyphase windowed-sinc resampler.
//
// Kernel: Kaiser-windowed sinc with 32 zero crossings on each side of the
// center (64-tap support at the filter rate), beta = 8.6, cutoff at 0.94 of
// the lower of the two Nyquist frequencies. Each phase's weights are
// normalized to unit sum so DC passes exactly.

namespace sonify {
namespace {

constexpr double kZeroCrossings = 32.0;
constexpr double kKaiserBeta = 8.6;
constexpr double kRolloff = 0.94;

double bessel_i0(double x) {
  double sum = 1.0;
  double term = 1.0;
  const double q = x * x / 4.0;
  for (int k = 1; k < 64; ++k) {
    term *= q / (static_cast<double>(k) * k);
    sum += term;
    if (term < sum * 1e-17) break;
  }
  return sum;
}

class PolyphaseKernel {
 public:
  PolyphaseKernel(std::uint64_t up, std::uint64_t down) : phases_(up) {
    const double cutoff = kRolloff * std::min(1.0, static_cast<double>(up) / static_cast<double>(down));
    const double support = kZeroCrossings / cutoff;
    half_ = static_cast<std::ptrdiff_t>(std::ceil(support));
    taps_ = static_cast<std::size_t>(2 * half_ + 2);
    weights_.resize(phases_ * taps_);
    const double i0_beta = bessel_i0(kKaiserBeta);

    for (std::uint64_t p = 0; p < phases_; ++p) {
      const double frac = static_cast<double>(p) / static_cast<double>(phases_);
      double* w = &weights_[p * taps_];
      double sum = 0.0;
      for (std::size_t t = 0; t < taps_; ++t) {
        const double x = static_cast<double>(static_cast<std::ptrdiff_t>(t) - half_) - frac;
        const double u = x / support;
        double v = 0.0;
        if (std::abs(u) < 1.0) {
          const double arg = std::numbers::pi * cutoff * x;
          const double sinc = x == 0.0 ? 1.0 : std::sin(arg) / arg;
          v = cutoff * sinc * bessel_i0(kKaiserBeta * std::sqrt(1.0 - u * u)) / i0_beta;
        }
        w[t] = v;
        sum += v;
      }
      for (std::size_t t = 0; t < taps_; ++t) w[t] /= sum;
    }
  }

  const double* phase(std::uint64_t p) const { return &weights_[p * taps_]; }
  std::size_t taps() const { return taps_; }
  std::ptrdiff_t half() const { return half_; }

 private:
  std::uint64_t phases_;
  std::ptrdiff_t half_ = 0;
  std::size_t taps_ = 0;
  std::vector<double> weights_;
};

}  // namespace

std::vector<float> resample(std::span<const float> input, int input_rate, int target_rate) {
  if (input_rate <= 0) throw InvalidArgument("input_rate must be positive");
  if (target_rate <= 0) throw InvalidArgument("target_rate must be positive");
  if (input_rate == target_rate) return {input.begin(), input.end()};

  const auto g = std::gcd(static_cast<std::uint64_t>(input_rate), static_cast<std::uint64_t>(target_rate));
  const std::uint64_t up = static_cast<std::uint64_t>(target_rate) / g;
  const std::uint64_t down = static_cast<std::uint64_t>(input_rate) / g;
  const auto n_in = static_cast<std::uint64_t>(input.size());
  const std::uint64_t n_out = (n_in * up + down / 2) / down;

  const PolyphaseKernel kernel(up, down);
  const auto n = static_cast<std::ptrdiff_t>(n_in);
  std::vector<float> out(n_out);

#pragma omp parallel for schedule(static) if (n_out > 65536)
  for (std::int64_t j = 0; j < static_cast<std::int64_t>(n_out); ++j) {
    const std::uint64_t pos = static_cast<std::uint64_t>(j) * down;
    const auto base = static_cast<std::ptrdiff_t>(pos / up);
    const double* w = kernel.phase(pos % up);
    const std::ptrdiff_t first = base - kernel.half();
    double acc = 0.0;
    for (std::size_t t = 0; t < kernel.taps(); ++t) {
      const std::ptrdiff_t idx = first + static_cast<std::ptrdiff_t>(t);
      if (idx >= 0 && idx < n) acc += w[t] * input[static_cast<std::size_t>(idx)];
    }
    out[static_cast<std::size_t>(j)] = static_cast<float>(acc);
  }
  return out;
}

}  // namespace sonify
