#pragma once

#include <functional>
#include <string>
#include <vector>

#include "coordparse/bio.hpp"

namespace coordparse::bench {

struct LatencyReport {
  double p90_ms = 0.0;
  double p99_ms = 0.0;
  long utterances = 0;
  std::string hardware_note;
};

// Nearest-rank percentile: the ceil(q * n)-th order statistic (1-indexed).
double percentile_nearest_rank(std::vector<double> samples, double q);

// Times `infer` once per utterance (batch size 1), sequentially, after
// `warmup` discarded calls. Throws on an empty corpus.
LatencyReport measure_latency(const std::function<void(const std::vector<std::string>&)>& infer,
                              const std::vector<LabeledUtterance>& corpus, int warmup);

}  // namespace coordparse::bench
