#pragma once

#include <cmath>
#include <vector>

#include "coordparse/bio.hpp"
#include "coordparse/tensor.hpp"

namespace coordparse::crf {

// Linear-chain CRF over E tags. `trans(i, j)` scores moving from tag i to tag
// j between adjacent positions; `start` houses the implicit t=1 transition
// from the undefined initial state. The same matrix applies at every step.
// No stop scores.
template <typename S>
struct CrfParams {
  Param<S> trans;  // E x E
  Param<S> start;  // E x 1
  bool bio_mask = false;  // forbid O->I-C, CC->I-C and starting with I-C

  CrfParams() = default;
  explicit CrfParams(int num_tags, const std::string& name = "crf")
      : trans(name + ".trans", num_tags, num_tags), start(name + ".start", num_tags, 1) {}

  int num_tags() const { return trans.value.rows; }

  static constexpr double kForbidden = -1e30;

  double trans_score(int i, int j) const {
    if (bio_mask && j == static_cast<int>(Tag::IC) &&
        (i == static_cast<int>(Tag::O) || i == static_cast<int>(Tag::CC))) {
      return kForbidden;
    }
    return trans.value(i, j);
  }
  double start_score(int j) const {
    if (bio_mask && j == static_cast<int>(Tag::IC)) return kForbidden;
    return start.value.d[j];
  }
};

template <typename S>
double logsumexp(const std::vector<S>& v) {
  double mx = v[0];
  for (S x : v) mx = std::max<double>(mx, x);
  double z = 0;
  for (S x : v) z += std::exp(static_cast<double>(x) - mx);
  return mx + std::log(z);
}

// Score of one tag sequence: start + transitions + emissions. `f` is T x E.
template <typename S>
double score_sequence(const Mat<S>& f, const std::vector<int>& tags,
                      const CrfParams<S>& p) {
  double s = p.start_score(tags[0]) + f(0, tags[0]);
  for (size_t t = 1; t < tags.size(); ++t) {
    s += p.trans_score(tags[t - 1], tags[t]) + f(static_cast<int>(t), tags[t]);
  }
  return s;
}

namespace detail {
// alpha(t, j) = log sum over prefixes ending with tag j at t. All in double;
// the O(T E^2) forward recursion.
template <typename S>
Mat<double> forward_alpha(const Mat<S>& f, const CrfParams<S>& p) {
  const int t_len = f.rows, e = f.cols;
  Mat<double> alpha(t_len, e);
  for (int j = 0; j < e; ++j) alpha(0, j) = p.start_score(j) + f(0, j);
  std::vector<double> acc(e);
  for (int t = 1; t < t_len; ++t) {
    for (int j = 0; j < e; ++j) {
      for (int i = 0; i < e; ++i) acc[i] = alpha(t - 1, i) + p.trans_score(i, j);
      alpha(t, j) = logsumexp(acc) + f(t, j);
    }
  }
  return alpha;
}

template <typename S>
Mat<double> backward_beta(const Mat<S>& f, const CrfParams<S>& p) {
  const int t_len = f.rows, e = f.cols;
  Mat<double> beta(t_len, e);
  std::vector<double> acc(e);
  for (int t = t_len - 2; t >= 0; --t) {
    for (int i = 0; i < e; ++i) {
      for (int j = 0; j < e; ++j) acc[j] = p.trans_score(i, j) + f(t + 1, j) + beta(t + 1, j);
      beta(t, i) = logsumexp(acc);
    }
  }
  return beta;
}
}  // namespace detail

// log of the partition function, via the stabilized forward recursion.
template <typename S>
double log_partition(const Mat<S>& f, const CrfParams<S>& p) {
  Mat<double> alpha = detail::forward_alpha(f, p);
  std::vector<double> last(alpha.row(alpha.rows - 1), alpha.row(alpha.rows - 1) + alpha.cols);
  return logsumexp(last);
}

// Negative log-likelihood of the gold sequence plus gradients.
// d_f gets the per-position marginals minus the gold one-hots; transition and
// start gradients (pairwise/position-0 marginals minus gold counts) accumulate
// into the params' grad buffers.
template <typename S>
double crf_nll(const Mat<S>& f, const std::vector<int>& gold, CrfParams<S>& p,
               Mat<S>& d_f) {
  const int t_len = f.rows, e = f.cols;
  Mat<double> alpha = detail::forward_alpha(f, p);
  Mat<double> beta = detail::backward_beta(f, p);
  std::vector<double> last(alpha.row(t_len - 1), alpha.row(t_len - 1) + e);
  const double log_z = logsumexp(last);
  const double loss = log_z - score_sequence(f, gold, p);

  d_f = Mat<S>(t_len, e);
  for (int t = 0; t < t_len; ++t) {
    for (int i = 0; i < e; ++i) {
      const double marg = std::exp(alpha(t, i) + beta(t, i) - log_z);
      d_f(t, i) = static_cast<S>(marg - (gold[t] == i ? 1.0 : 0.0));
    }
  }
  for (int j = 0; j < e; ++j) {
    const double marg0 = std::exp(alpha(0, j) + beta(0, j) - log_z);
    p.start.grad.d[j] += static_cast<S>(marg0 - (gold[0] == j ? 1.0 : 0.0));
  }
  for (int t = 0; t + 1 < t_len; ++t) {
    for (int i = 0; i < e; ++i) {
      for (int j = 0; j < e; ++j) {
        const double pair = std::exp(alpha(t, i) + p.trans_score(i, j) + f(t + 1, j) +
                                     beta(t + 1, j) - log_z);
        const double gold_pair = (gold[t] == i && gold[t + 1] == j) ? 1.0 : 0.0;
        p.trans.grad(i, j) += static_cast<S>(pair - gold_pair);
      }
    }
  }
  return loss;
}

// Highest-scoring tag sequence. Ties break toward the lowest tag index at
// every backpointer decision, so the result is deterministic.
template <typename S>
std::pair<std::vector<int>, double> viterbi_decode(const Mat<S>& f, const CrfParams<S>& p) {
  const int t_len = f.rows, e = f.cols;
  Mat<double> delta(t_len, e);
  Mat<int> back(t_len, e);
  for (int j = 0; j < e; ++j) delta(0, j) = p.start_score(j) + f(0, j);
  for (int t = 1; t < t_len; ++t) {
    for (int j = 0; j < e; ++j) {
      int best_i = 0;
      double best = delta(t - 1, 0) + p.trans_score(0, j);
      for (int i = 1; i < e; ++i) {
        const double s = delta(t - 1, i) + p.trans_score(i, j);
        if (s > best) {
          best = s;
          best_i = i;
        }
      }
      delta(t, j) = best + f(t, j);
      back(t, j) = best_i;
    }
  }
  int best_j = 0;
  double best = delta(t_len - 1, 0);
  for (int j = 1; j < e; ++j) {
    if (delta(t_len - 1, j) > best) {
      best = delta(t_len - 1, j);
      best_j = j;
    }
  }
  std::vector<int> tags(t_len);
  tags[t_len - 1] = best_j;
  for (int t = t_len - 1; t > 0; --t) tags[t - 1] = back(t, tags[t]);
  return {tags, best};
}

}  // namespace coordparse::crf
