#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "coordparse/bio.hpp"

namespace coordparse::eval {

struct PrfCounts {
  long tp = 0, fp = 0, fn = 0;
  long exact = 0;       // utterances with every token tagged correctly
  long utterances = 0;

  void add(const PrfCounts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    exact += o.exact;
    utterances += o.utterances;
  }
  double precision() const { return tp + fp == 0 ? 0.0 : double(tp) / double(tp + fp); }
  double recall() const { return tp + fn == 0 ? 0.0 : double(tp) / double(tp + fn); }
  double f1() const {
    const double p = precision(), r = recall();
    return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
  }
  double accuracy() const { return utterances == 0 ? 0.0 : double(exact) / double(utterances); }
};

struct EvalReport {
  PrfCounts overall;
  std::map<std::string, PrfCounts> by_bucket;  // "2", "3", "4+" by gold conjunct count
  std::map<std::string, PrfCounts> by_slot;
};

// Exact-boundary conjunct matching: a predicted span is a true positive iff
// it equals a gold span on both boundaries.
void conjunct_prf(const std::vector<ConjunctSpan>& pred, const std::vector<ConjunctSpan>& gold,
                  long& tp, long& fp, long& fn);

// 1 iff every token's tag matches; any mislabeled token zeroes the utterance.
int exact_match(const std::vector<Tag>& pred, const std::vector<Tag>& gold);

// Bucket key for a gold conjunct count: "2", "3", or "4+".
std::string bucket_key(int gold_conjuncts);

// Scores a predictor over a test set. `predict` maps tokens to a tag
// sequence; conjunct metrics are computed over decode_bio of both sides.
EvalReport evaluate(const std::function<std::vector<Tag>(const std::vector<std::string>&)>& predict,
                    const std::vector<LabeledUtterance>& testset, bool by_slot = true);

// Table 3-style fixed-width table, or line-delimited JSON records.
std::string format_report(const EvalReport& r, const std::string& format);

}  // namespace coordparse::eval
