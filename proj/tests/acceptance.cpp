// Acceptance checks 1-12. Prints one PASS/FAIL line per criterion; the exit
// status is non-zero when any hard criterion fails.

#include <omp.h>
#include <spdlog/spdlog.h>

#include <chrono>
#include <fmt/format.h>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <thread>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "sonify/concepts.hpp"
#include "sonify/hash.hpp"
#include "sonify/loudness.hpp"
#include "sonify/metrics.hpp"
#include "sonify/mixer.hpp"
#include "sonify/pipeline.hpp"
#include "sonify/retrieval.hpp"

using namespace sonify;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
  bool soft = false;
};

/// Collects failed checks; the first few messages go into the report line.
class Checker {
 public:
  void require(bool ok, const std::string& what) {
    ++checks_;
    if (ok) return;
    ++failures_;
    if (failures_ <= 3) msgs_ += (msgs_.empty() ? "" : "; ") + what;
  }
  bool ok() const { return failures_ == 0; }
  std::string summary(const std::string& good) const {
    if (ok()) return good;
    return fmt::format("{} of {} checks failed: {}", failures_, checks_, msgs_);
  }
  Outcome outcome(const std::string& good) const { return {ok(), summary(good)}; }

 private:
  std::size_t checks_ = 0, failures_ = 0;
  std::string msgs_;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

// 1
Outcome chunking() {
  Checker c;
  const auto src = fixtures::noise(1, 0.5, 34 * 16000);
  const auto chunks = chunk(fixtures::mono_clip(src, 16000, "clip34"), 5.0);
  c.require(chunks.size() == 7, fmt::format("{} chunks", chunks.size()));
  if (chunks.size() == 7) {
    for (std::size_t i = 0; i < 6; ++i) c.require(chunks[i].pad_samples == 0, "unexpected padding");
    c.require(chunks[6].pad_samples == 16000, fmt::format("last pad {}", chunks[6].pad_samples));
    bool zeros = true;
    for (std::size_t i = 64000; i < 80000; ++i) zeros &= chunks[6].samples[i] == 0.0f;
    c.require(zeros, "pad region not zero");
    std::vector<float> joined;
    for (const auto& ch : chunks) joined.insert(joined.end(), ch.content().begin(), ch.content().end());
    c.require(joined == src, "content changed");
  }
  return c.outcome("7 chunks, last padded by 16000 zeros");
}

// 2
Outcome lufs_conformance() {
  Checker c;
  const auto full = measure_integrated_lufs(fixtures::make_chunk(fixtures::sine(997.0, 1.0, 16000, 80000)));
  const auto m20 = measure_integrated_lufs(fixtures::make_chunk(fixtures::sine(997.0, 0.1, 16000, 80000)));
  const auto sil = measure_integrated_lufs(fixtures::make_chunk(std::vector<float>(80000, 0.0f)));
  c.require(!full.is_silence && std::abs(full.value + 3.01) <= 0.1, fmt::format("full scale {:.3f}", full.value));
  c.require(!m20.is_silence && std::abs(m20.value + 23.01) <= 0.1, fmt::format("-20 dBFS {:.3f}", m20.value));
  c.require(sil.is_silence && std::isinf(sil.value) && sil.value < 0, "silence not flagged");
  return c.outcome(fmt::format("full scale {:.3f} LUFS, -20 dBFS {:.3f} LUFS, silence sentinel", full.value, m20.value));
}

// 3
Outcome normalization_round_trip() {
  Checker c;
  Rng rng(3);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const double amp = 0.005 + 0.6 * rng.uniform01();
    AudioChunk x = (i % 2 == 0) ? fixtures::make_chunk(fixtures::sine(60.0 + 6000.0 * rng.uniform01(), amp, 16000, 80000))
                                : fixtures::make_chunk(fixtures::noise(rng.next(), amp, 80000));
    const auto measured = measure_integrated_lufs(x);
    const auto [y, gain] = normalize_to_lufs(x, -23.0);
    const double scale = std::pow(10.0, (-23.0 - measured.value) / 20.0);
    bool exact = true;
    for (std::size_t s = 0; s < y.samples.size(); ++s) exact &= y.samples[s] == static_cast<float>(double(x.samples[s]) * scale);
    c.require(exact, fmt::format("chunk {} not scaled by exactly 10^(G/20)", i));
    const double err = std::abs(measure_integrated_lufs(y).value + 23.0);
    worst = std::max(worst, err);
    c.require(err <= 0.1, fmt::format("chunk {} re-measures {:.3f} LU off", i, err));
  }
  return c.outcome(fmt::format("50 chunks, worst deviation {:.4f} LU, sample scaling exact", worst));
}

// 4
Outcome retrieval_oracle() {
  Checker c;
  const auto pool = fixtures::random_matrix(1000, 64, 40, "chunk");
  const auto queries = fixtures::random_matrix(100, 64, 41, "q", false);
  double cos_err = 0.0, ssr_err = 0.0, lb_err = 0.0;
  for (auto policy : {TiePolicy::inclusive, TiePolicy::strict}) {
    RetrievalConfig cfg;
    cfg.top_k = 50;
    cfg.tie_policy = policy;
    for (std::size_t qi = 0; qi < 100; ++qi) {
      const auto q = queries.row(qi);
      const auto raw = cosine_sim(q, pool);
      const auto ref_cos = oracle::cosine(q, pool.data(), 64);
      for (std::size_t r = 0; r < 1000; ++r) cos_err = std::max(cos_err, std::abs(raw.scores[r] - ref_cos[r]));

      const auto engine_ssr = ssr(raw).scores;
      std::vector<double> ref_ssr(1000);
      for (std::size_t r = 0; r < 1000; ++r) {
        ref_ssr[r] = oracle::ssr(raw.scores[r]);
        ssr_err = std::max(ssr_err, std::abs(engine_ssr[r] - ref_ssr[r]));
      }
      const double lb = dynamic_threshold(engine_ssr, 50);
      const double ref_lb = oracle::top_k_mean(ref_ssr, 50);
      lb_err = std::max(lb_err, std::abs(lb - ref_lb));
      const auto ref_set = oracle::eligible(ref_ssr, ref_lb, policy == TiePolicy::strict);
      const auto set = eligible_set(engine_ssr, lb, policy);
      c.require(set == ref_set, fmt::format("eligible set differs for query {}", qi));

      Rng r1(qi), r2(qi);
      const auto m = match_from_scores(queries.id(qi), raw, pool, cfg, r1);
      const SoundingConcept sc{queries.id(qi), "img", "obj", "desc", "vlm"};
      const auto full = get_matched_audio(sc, q, pool, cfg, r2);
      c.require(m == full, "end-to-end match differs from staged match");
      c.require(std::binary_search(ref_set.begin(), ref_set.end(), m.chunk_row),
                fmt::format("query {} sampled outside the eligible set", qi));
      c.require(m.eligible_count == ref_set.size() && std::abs(m.threshold_lb - ref_lb) <= 1e-9,
                "reported lb / eligible count differ");
    }
  }
  c.require(ssr_err <= 1e-9, fmt::format("ssr error {:.2e}", ssr_err));
  c.require(lb_err <= 1e-9, fmt::format("lb error {:.2e}", lb_err));
  c.require(cos_err <= 1e-5, fmt::format("cosine error {:.2e}", cos_err));
  return c.outcome(fmt::format("200 query/policy runs; max |ssr| err {:.1e}, |lb| err {:.1e}, cosine err {:.1e}; sets equal",
                               ssr_err, lb_err, cos_err));
}

// 5
Outcome ssr_threshold_properties() {
  Checker c;
  c.require(ssr(0.0) == 0.0 && ssr(1.0) == 1.0 && ssr(-1.0) == -1.0, "fixed points");
  Rng rng(5);
  std::vector<double> xs(2000);
  for (auto& x : xs) x = 2.0 * rng.uniform01() - 1.0;
  std::sort(xs.begin(), xs.end());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    c.require(ssr(-xs[i]) == -ssr(xs[i]), "not odd");
    if (i > 0) c.require(ssr(xs[i]) >= ssr(xs[i - 1]), "not monotone");
    c.require(std::abs(ssr(xs[i])) >= std::abs(xs[i]), "does not expand toward +-1");
  }
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> s(300);
    for (auto& x : s) x = ssr(2.0 * rng.uniform01() - 1.0);
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k <= s.size(); ++k) {
      const double lb = dynamic_threshold(s, k);
      c.require(lb <= prev, fmt::format("lb increased at k={}", k));
      prev = lb;
    }
  }
  std::vector<double> few(500, 0.05), many(500, 0.05);
  few[0] = few[1] = few[2] = 0.95;
  for (std::size_t i = 0; i < 100; ++i) many[i] = 0.5;
  auto eligible_of = [](std::vector<double> raw) {
    for (auto& x : raw) x = ssr(x);
    return eligible_set(raw, dynamic_threshold(raw, 50), TiePolicy::inclusive).size();
  };
  const auto nf = eligible_of(few), nm = eligible_of(many);
  c.require(nf < nm, fmt::format("few {} vs many {}", nf, nm));
  return c.outcome(fmt::format("odd, monotone, fixed points; lb non-increasing in k; eligible few={} < many={}", nf, nm));
}

// 6
Outcome sampling_uniformity() {
  Checker c;
  const std::vector<double> raw{0.1, 0.49, 0.02, 0.49, 0.49, 0.0, 0.49};
  std::vector<float> data;
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    data.push_back(static_cast<float>(raw[i]));
    data.push_back(static_cast<float>(std::sqrt(1 - raw[i] * raw[i])));
    ids.push_back("c" + std::to_string(i));
  }
  const EmbeddingMatrix pool(raw.size(), 2, data, ids, "t", true);
  RetrievalConfig cfg;
  cfg.top_k = 4;
  const ScoreVector scores{raw, "q"};
  Rng rng(6);
  std::map<std::size_t, int> counts;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const auto m = match_from_scores("q", scores, pool, cfg, rng);
    c.require(m.eligible_count == 4, "eligible set is not the 4 tied rows");
    ++counts[m.chunk_row];
  }
  const double sigma = std::sqrt(n * 0.25 * 0.75);
  std::string freq;
  c.require(counts.size() == 4, fmt::format("{} distinct rows drawn", counts.size()));
  for (const auto& [row, k] : counts) {
    c.require(std::abs(k - n * 0.25) <= 3 * sigma, fmt::format("row {} drawn {} times", row, k));
    freq += fmt::format("{}{:.4f}", freq.empty() ? "" : " ", double(k) / n);
  }
  return c.outcome(fmt::format("frequencies {} (3 sigma = {:.4f})", freq, 3 * sigma / n));
}

// 7
Outcome end_to_end_determinism() {
  Checker c;
  fixtures::TempDir dir("sonify-accept");
  auto cfg = fixtures::build_pipeline_fixture(dir.path());
  const auto pool_rows = read_pool_manifest(cfg.paths.pool_dir / kPoolManifestName).size();
  c.require(pool_rows == 50, fmt::format("fixture pool has {} chunks", pool_rows));

  std::vector<std::string> manifests;
  std::vector<std::map<std::string, std::string>> hashes;
  const std::pair<const char*, bool> runs[] = {{"run1", true}, {"run2", true}, {"seq", false}};
  for (const auto& [name, parallel] : runs) {
    cfg.paths.output_dir = dir / name;
    cfg.parallel = parallel;
    const auto report = run_pipeline(cfg);
    c.require(report.manifest.size() == 10, fmt::format("{} rendered {} images", name, report.manifest.size()));
    manifests.push_back(slurp(report.manifest_path));
    std::map<std::string, std::string> h;
    for (const auto& e : report.manifest) {
      h[e.image_id] = sha256_file(cfg.paths.output_dir / "audio" / (e.image_id + ".wav"));
      c.require(h[e.image_id] == e.mix_hash, "mix_hash does not match the written file");
    }
    hashes.push_back(std::move(h));
  }
  c.require(manifests[0] == manifests[1], "two seeded runs wrote different manifests");
  c.require(hashes[0] == hashes[1], "two seeded runs wrote different audio");
  c.require(manifests[0] == manifests[2], "sequential manifest differs from parallel");
  c.require(hashes[0] == hashes[2], "sequential audio differs from parallel");

  const DirectoryChunkStore store(cfg.paths.pool_dir);
  std::size_t replayed = 0;
  for (const auto& chk : replay_manifest(parse_manifest(manifests[0]), store)) replayed += chk.ok();
  c.require(replayed == 10, fmt::format("{} of 10 entries replayed", replayed));
  return c.outcome(fmt::format("10 images / {} chunks: 2 parallel runs + 1 sequential identical ({} manifest bytes); replay OK",
                               pool_rows, manifests[0].size()));
}

// 8
Outcome mixing() {
  Checker c;
  const auto src = fixtures::make_chunk(fixtures::noise(8, 0.25, 80000));
  const std::vector<AudioChunk> one{src};
  const double g1[] = {-22.4};
  const auto single = mix(one, g1);
  c.require(single.audio.samples == normalize_to_lufs(src, -22.4).first.samples, "single-source mix differs");

  const auto a = fixtures::make_chunk(fixtures::sine(440.0, 0.2, 16000, 80000), "a");
  const auto b = fixtures::make_chunk(fixtures::sine(440.0, 0.7, 16000, 80000), "b");
  const std::vector<AudioChunk> two{a, b};
  const double g2[] = {-23.0, -23.0};
  const auto coherent = mix(two, g2);
  const std::vector<AudioChunk> only_a{a};
  const double g_a[] = {-23.0};
  const double ref_peak = oracle::peak(mix(only_a, g_a).audio.samples);
  const double delta = 20.0 * std::log10(coherent.pre_clip_peak / ref_peak);
  c.require(std::abs(delta - 6.02) <= 0.05, fmt::format("coherent gain {:.3f} dB", delta));

  Rng rng(8);
  std::size_t clipped = 0;
  for (int t = 0; t < 30; ++t) {
    std::vector<AudioChunk> srcs;
    std::vector<double> gammas;
    for (int s = 0; s < 3; ++s) {
      srcs.push_back(fixtures::make_chunk(t % 2 ? fixtures::noise(rng.next(), 0.3, 80000)
                                                : fixtures::sine(80.0 + 50.0 * s, 0.5, 16000, 80000),
                                          "s" + std::to_string(s)));
      gammas.push_back(-1.0 - 10.0 * rng.uniform01());
    }
    const auto m = mix(srcs, gammas);
    clipped += m.clip_applied;
    c.require(oracle::peak(m.audio.samples) <= 1.0, "sample outside [-1, 1]");
    c.require(!m.clip_applied || m.peak_gain_db < 0.0, "clip applied without attenuation");
  }
  c.require(clipped > 0, "no mix triggered the clip policy");
  return c.outcome(fmt::format("single source bit-exact; coherent sum +{:.3f} dB; {} of 30 loud mixes clipped, all within [-1,1]",
                               delta, clipped));
}

// 9
Outcome frechet() {
  Checker c;
  const auto feats = fixtures::random_matrix(300, 16, 90, "f", false);
  const auto st = gaussian_stats(feats);
  const double self = frechet_distance(st, st);
  c.require(std::abs(self) <= 1e-8, fmt::format("self distance {:.2e}", self));

  Rng rng(9);
  double worst1 = 0.0;
  for (int i = 0; i < 100; ++i) {
    GaussianStats a, b;
    const double ma = 5 * rng.normal(), mb = 5 * rng.normal();
    const double sa = 0.01 + 3 * rng.uniform01(), sb = 0.01 + 3 * rng.uniform01();
    a.mean = Eigen::VectorXd::Constant(1, ma);
    b.mean = Eigen::VectorXd::Constant(1, mb);
    a.cov = Eigen::MatrixXd::Constant(1, 1, sa * sa);
    b.cov = Eigen::MatrixXd::Constant(1, 1, sb * sb);
    worst1 = std::max(worst1, std::abs(frechet_distance(a, b) - oracle::frechet_1d(ma, sa, mb, sb)));
  }
  c.require(worst1 <= 1e-8, fmt::format("1-D error {:.2e}", worst1));

  const int d = 16;
  GaussianStats a, b;
  a.mean.resize(d);
  b.mean.resize(d);
  a.cov = Eigen::MatrixXd::Zero(d, d);
  b.cov = Eigen::MatrixXd::Zero(d, d);
  std::vector<double> ma(d), mb(d), va(d), vb(d);
  for (int i = 0; i < d; ++i) {
    a.mean(i) = ma[i] = rng.normal();
    b.mean(i) = mb[i] = rng.normal();
    a.cov(i, i) = va[i] = 0.05 + 2 * rng.uniform01();
    b.cov(i, i) = vb[i] = 0.05 + 2 * rng.uniform01();
  }
  const double diag_err = std::abs(frechet_distance(a, b) - oracle::frechet_diag(ma, va, mb, vb));
  c.require(diag_err <= 1e-6, fmt::format("diagonal error {:.2e}", diag_err));
  return c.outcome(fmt::format("self {:.1e}; 1-D max err {:.1e}; D=16 diagonal err {:.1e}", self, worst1, diag_err));
}

// 10
Outcome knn_loudness() {
  Checker c;
  const auto grid = parse_gain_grid("-30:3:30");
  std::size_t zero = 0;
  while (grid[zero] != 0.0) ++zero;
  int raw_ok = 0, l2_ok = 0, raw_drops = 0;
  const int trials = 20;
  std::vector<double> mean_raw(grid.size(), 0.0);
  for (int t = 0; t < trials; ++t) {
    Rng rng(derive_seed(10, static_cast<std::uint64_t>(t)));
    const auto base = fixtures::noise(rng.next(), 1.0, 1024);
    std::vector<AudioChunk> items;
    for (int i = 0; i < 20; ++i) {
      // Related items at different levels: a shared texture plus individual detail.
      const double level = std::pow(10.0, -25.0 * rng.uniform01() / 20.0);
      const auto own = fixtures::noise(rng.next(), 1.0, 1024);
      std::vector<float> x(1024);
      for (std::size_t s = 0; s < x.size(); ++s) x[s] = static_cast<float>(level * (0.8 * base[s] + 0.3 * own[s]));
      items.push_back(fixtures::make_chunk(std::move(x), "item" + std::to_string(i)));
    }
    const auto raw = knn_loudness_study(items, raw_prefix_embedder(256), grid);
    const auto l2 = knn_loudness_study(items, l2_normalized(raw_prefix_embedder(256)), grid);
    bool shape = raw.accuracy[zero] == 1.0;
    for (std::size_t i = zero; i + 1 < grid.size(); ++i) shape &= raw.accuracy[i + 1] <= raw.accuracy[i];
    for (std::size_t i = zero; i > 0; --i) shape &= raw.accuracy[i - 1] <= raw.accuracy[i];
    raw_ok += shape;
    raw_drops += raw.accuracy.front() < 1.0 || raw.accuracy.back() < 1.0;
    l2_ok += std::all_of(l2.accuracy.begin(), l2.accuracy.end(), [](double a) { return a == 1.0; });
    for (std::size_t i = 0; i < grid.size(); ++i) mean_raw[i] += raw.accuracy[i] / trials;
  }
  c.require(raw_ok * 2 > trials, fmt::format("raw shape held in {}/{} trials", raw_ok, trials));
  c.require(l2_ok * 2 > trials, fmt::format("L2 accuracy 1.0 in {}/{} trials", l2_ok, trials));
  return c.outcome(fmt::format("raw shape {}/{} trials (mean acc -30 dB {:.2f}, 0 dB {:.2f}, +30 dB {:.2f}; {} trials drop); L2 1.0 in {}/{}",
                               raw_ok, trials, mean_raw.front(), mean_raw[zero], mean_raw.back(), raw_drops, l2_ok,
                               trials));
}

// 11
Outcome filter_fidelity() {
  Checker c;
  const auto kw = default_silent_keywords();
  c.require(kw.size() == 6, "keyword list size");
  std::vector<ImageRecord> imgs;
  for (const auto& k : kw) {
    imgs.push_back({"lower_" + k, "a " + k + " on the wall", "t"});
    std::string upper = k;
    for (auto& ch : upper) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    imgs.push_back({"upper_" + k, upper + ", close-up", "t"});
  }
  imgs.push_back({"iconic", "an iconic bridge at dusk", "t"});
  imgs.push_back({"signal", "a railway signal in the rain", "t"});
  imgs.push_back({"dog", "a dog barking at a car", "t"});
  const auto r = filter_silent_images(imgs, kw);
  std::set<std::string> kept;
  for (const auto& k : r.kept) kept.insert(k.image_id);
  c.require(r.discarded.size() == 12, fmt::format("{} discarded", r.discarded.size()));
  c.require(kept == std::set<std::string>{"iconic", "signal", "dog"}, "wrong survivors");
  return c.outcome(fmt::format("12 keyword captions discarded; 'iconic', 'signal' and a neutral caption kept"));
}

// 12
Outcome throughput() {
  const std::size_t n = 500000, dim = 512;
  std::vector<float> data(n * dim);
  {
    Rng rng(12);
    for (auto& x : data) x = static_cast<float>(static_cast<std::int64_t>(rng.next() >> 40) - (1 << 23)) / (1 << 23);
  }
  std::vector<std::string> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = "c" + std::to_string(i);
  const EmbeddingMatrix pool(n, dim, std::move(data), std::move(ids), "bench", true);
  const auto queries = fixtures::random_matrix(8, dim, 13, "q");

  double single = std::numeric_limits<double>::infinity();
  for (int rep = 0; rep < 3; ++rep) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto s = cosine_sim(queries.row(0), pool, Execution::sequential);
    single = std::min(single, seconds_since(t0));
    if (s.scores.size() != n) return {false, "wrong score count"};
  }
  auto t0 = std::chrono::steady_clock::now();
  const auto seq = cosine_sim_batch(queries, pool, Execution::sequential);
  const double t_seq = seconds_since(t0);
  const int saved = omp_get_max_threads();
  omp_set_num_threads(8);
  t0 = std::chrono::steady_clock::now();
  const auto par = cosine_sim_batch(queries, pool, Execution::parallel);
  const double t_par = seconds_since(t0);
  omp_set_num_threads(saved);
  const double speedup = t_seq / t_par;
  const bool same = seq.size() == par.size() && std::equal(seq.begin(), seq.end(), par.begin(),
                                                           [](const auto& a, const auto& b) { return a.scores == b.scores; });
  const bool latency_ok = single * 1000.0 <= 500.0;
  const bool scale_ok = speedup >= 4.0;
  const unsigned hw = std::thread::hardware_concurrency();
  Outcome o;
  o.soft = true;
  o.pass = latency_ok && scale_ok && same;
  o.detail = fmt::format("single query {:.1f} ms ({}); 8-query batch {:.1f} ms serial vs {:.1f} ms on 8 threads = {:.2f}x ({}); "
                         "{} hardware thread(s); parallel scores {}",
                         single * 1000.0, latency_ok ? "<= 500 ms" : "> 500 ms", t_seq * 1000.0, t_par * 1000.0,
                         speedup, scale_ok ? ">= 4x" : "< 4x", hw, same ? "identical" : "DIFFER");
  return o;
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::warn);
  const std::vector<Criterion> criteria{
      {1, "chunking arithmetic", 1, chunking},
      {2, "LUFS conformance", 1, lufs_conformance},
      {3, "normalization round trip", 5, normalization_round_trip},
      {4, "retrieval oracle equivalence", 10, retrieval_oracle},
      {5, "SSR and threshold properties", 1, ssr_threshold_properties},
      {6, "sampling uniformity", 5, sampling_uniformity},
      {7, "end-to-end determinism", 30, end_to_end_determinism},
      {8, "mixing", 5, mixing},
      {9, "Frechet distance", 5, frechet},
      {10, "KNN loudness study", 30, knn_loudness},
      {11, "filter fidelity", 1, filter_fidelity},
      {12, "throughput", 0, throughput},
  };
  int hard_failures = 0;
  for (const auto& cr : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = cr.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what(), cr.id == 12};
    }
    const double dt = seconds_since(t0);
    if (cr.budget_s > 0 && dt > cr.budget_s) {
      o.pass = false;
      o.detail += fmt::format("; runtime {:.2f} s over the {:.0f} s budget", dt, cr.budget_s);
    }
    const char* tag = o.pass ? "PASS" : (o.soft ? "FAIL (soft)" : "FAIL");
    if (!o.pass && !o.soft) ++hard_failures;
    std::cout << fmt::format("[{}] criterion {:>2} {}: {} ({:.2f} s)", tag, cr.id, cr.name, o.detail, dt) << std::endl;
  }
  std::cout << (hard_failures == 0 ? "acceptance: all hard criteria passed" : fmt::format("acceptance: {} hard failure(s)", hard_failures))
            << std::endl;
  return hard_failures == 0 ? 0 : 1;
}
