#include <catch_amalgamated.hpp>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "sonify/error.hpp"
#include "sonify/loudness.hpp"

using namespace sonify;
using Catch::Matchers::WithinAbs;

namespace {
AudioChunk tone_chunk(double freq, double amp) { return fixtures::make_chunk(fixtures::sine(freq, amp, 16000, 80000)); }
}  // namespace

TEST_CASE("997 Hz sine reference levels") {
  const auto full = measure_integrated_lufs(tone_chunk(997.0, 1.0));
  REQUIRE_FALSE(full.is_silence);
  CHECK_THAT(full.value, WithinAbs(-3.01, 0.1));
  const auto minus20 = measure_integrated_lufs(tone_chunk(997.0, 0.1));
  CHECK_THAT(minus20.value, WithinAbs(-23.01, 0.1));
}

TEST_CASE("loudness is consistent across sample rates") {
  for (int rate : {8000, 16000, 44100, 48000}) {
    const auto v = integrated_loudness(fixtures::sine(997.0, 0.1, rate, static_cast<std::size_t>(rate) * 3), rate);
    CHECK_THAT(v.value, WithinAbs(-23.01, 0.1));
  }
}

TEST_CASE("K-weighting boosts high frequencies and cuts lows") {
  const double lo = measure_integrated_lufs(tone_chunk(40.0, 0.1)).value;
  const double mid = measure_integrated_lufs(tone_chunk(997.0, 0.1)).value;
  const double hi = measure_integrated_lufs(tone_chunk(6000.0, 0.1)).value;
  CHECK(lo < mid - 1.0);
  CHECK(hi > mid + 3.0);
}

TEST_CASE("a gain shift moves loudness by the same number of dB") {
  const auto x = fixtures::noise(5, 0.3, 80000);
  const double base = integrated_loudness(x, 16000).value;
  for (double g : {-12.0, -6.0, 3.0}) {
    std::vector<float> y(x.size());
    apply_gain(x, y, std::pow(10.0, g / 20.0));
    CHECK_THAT(integrated_loudness(y, 16000).value - base, WithinAbs(g, 1e-3));
  }
}

TEST_CASE("silence and sub-block signals report the sentinel") {
  const auto s = measure_integrated_lufs(fixtures::make_chunk(std::vector<float>(80000, 0.0f)));
  CHECK(s.is_silence);
  CHECK(std::isinf(s.value));
  CHECK(integrated_loudness(std::vector<float>(1000, 0.5f), 16000).is_silence);
  CHECK(integrated_loudness(std::vector<float>(80000, 1e-6f), 16000).is_silence);
  CHECK_THROWS_AS(gain_to_target(s, -23.0), SilenceError);
}

TEST_CASE("relative gate ignores quiet passages") {
  auto x = fixtures::sine(997.0, 0.1, 16000, 80000);
  const double loud_only = integrated_loudness(std::span(x).first(40000), 16000).value;
  for (std::size_t i = 40000; i < 80000; ++i) x[i] *= 0.001f;  // -60 dB, below both gates
  // 22 fully loud blocks plus three boundary blocks holding 3/4, 1/2 and 1/4 of the power.
  const double expected = loud_only + 10.0 * std::log10(23.5 / 25.0);
  CHECK_THAT(integrated_loudness(x, 16000).value, WithinAbs(expected, 0.02));
}

TEST_CASE("measure_integrated_lufs checks chunk format") {
  CHECK_THROWS_AS(measure_integrated_lufs(fixtures::make_chunk(std::vector<float>(100))), InvalidArgument);
  CHECK_THROWS_AS(measure_integrated_lufs(fixtures::make_chunk(std::vector<float>(80000), "s", 0, 0, 8000)),
                  InvalidArgument);
}

TEST_CASE("gain arithmetic") {
  const auto g = gain_to_target(LufsValue::of(-29.02), -23.0);
  CHECK_THAT(g.gain_db, WithinAbs(6.02, 1e-12));
  CHECK_THAT(g.linear_scale, WithinAbs(1.9999, 1e-3));
  std::vector<float> in{0.25f, -0.5f}, out(2);
  apply_gain(in, out, g.linear_scale);
  CHECK(out[0] == static_cast<float>(0.25 * g.linear_scale));
  CHECK(out[1] == static_cast<float>(-0.5 * g.linear_scale));
}

TEST_CASE("normalization round trip on random chunks") {
  Rng rng(99);
  for (int i = 0; i < 20; ++i) {
    const double amp = 0.01 + 0.5 * rng.uniform01();
    auto c = i % 2 ? tone_chunk(100.0 + 4000.0 * rng.uniform01(), amp)
                   : fixtures::make_chunk(fixtures::noise(rng.next(), amp, 80000));
    const auto [norm, g] = normalize_to_lufs(c, -23.0);
    CHECK_THAT(measure_integrated_lufs(norm).value, WithinAbs(-23.0, 0.1));
    for (std::size_t s = 0; s < 80000; s += 997)
      REQUIRE(norm.samples[s] == static_cast<float>(double(c.samples[s]) * g.linear_scale));
  }
}

TEST_CASE("normalization keeps padding exactly zero") {
  auto c = fixtures::make_chunk(fixtures::noise(8, 0.2, 80000), "p", 0, 30000);
  std::fill(c.samples.end() - 30000, c.samples.end(), 0.0f);
  const auto [norm, g] = normalize_to_lufs(c, -23.0);
  for (std::size_t i = 50000; i < 80000; ++i) REQUIRE(norm.samples[i] == 0.0f);
  CHECK(norm.pad_samples == 30000);
}
