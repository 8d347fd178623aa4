#include "coordparse/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace coordparse::bench {

double percentile_nearest_rank(std::vector<double> samples, double q) {
  if (samples.empty()) throw std::invalid_argument("percentile of empty sample");
  std::sort(samples.begin(), samples.end());
  const long n = static_cast<long>(samples.size());
  long rank = static_cast<long>(std::ceil(q * n));
  rank = std::clamp(rank, 1l, n);
  return samples[rank - 1];
}

LatencyReport measure_latency(const std::function<void(const std::vector<std::string>&)>& infer,
                              const std::vector<LabeledUtterance>& corpus, int warmup) {
  if (corpus.empty()) throw std::invalid_argument("empty corpus");
  using clock = std::chrono::steady_clock;
  for (int i = 0; i < warmup; ++i) {
    infer(corpus[i % corpus.size()].tokens);
  }
  std::vector<double> times_ms;
  times_ms.reserve(corpus.size());
  for (const auto& u : corpus) {
    const auto t0 = clock::now();
    infer(u.tokens);
    const auto t1 = clock::now();
    times_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  LatencyReport r;
  r.p90_ms = percentile_nearest_rank(times_ms, 0.90);
  r.p99_ms = percentile_nearest_rank(times_ms, 0.99);
  r.utterances = static_cast<long>(times_ms.size());
  r.hardware_note = "single-threaded CPU, steady_clock";
  return r;
}

}  // namespace coordparse::bench
