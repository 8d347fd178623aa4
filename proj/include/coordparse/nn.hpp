#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "coordparse/kernels.hpp"
#include "coordparse/rng.hpp"
#include "coordparse/tensor.hpp"

namespace coordparse::nn {

template <typename S>
S sigmoid(S x) {
  return S(1) / (S(1) + std::exp(-x));
}

// ---- initialization -------------------------------------------------------

template <typename S>
void init_uniform(Mat<S>& m, Rng& rng, double lo, double hi) {
  for (auto& v : m.d) v = static_cast<S>(rng.uniform(lo, hi));
}

// Xavier-style: uniform with scale sqrt(6 / (fan_in + fan_out)).
template <typename S>
void init_xavier(Mat<S>& m, Rng& rng) {
  double s = std::sqrt(6.0 / (m.rows + m.cols));
  init_uniform(m, rng, -s, s);
}

// ---- embedding table ------------------------------------------------------

// Index 0 is PAD, index 1 is UNK by convention (the vocabulary maps live in
// the model; this is just the table).
template <typename S>
struct Embedding {
  Param<S> table;  // |V| x dim
  bool trainable = true;

  Embedding() = default;
  Embedding(std::string name, int vocab, int dim) : table(std::move(name), vocab, dim) {}

  int dim() const { return table.value.cols; }

  const S* lookup(int idx) const { return table.value.row(idx); }

  void accumulate_grad(int idx, const S* g) {
    if (!trainable) return;
    S* gr = table.grad.row(idx);
    for (int c = 0; c < table.grad.cols; ++c) gr[c] += g[c];
  }
};

// ---- LSTM -----------------------------------------------------------------

// Gate order within the stacked 4H dimension: input, forget, output, candidate.
template <typename S>
struct LstmCell {
  Param<S> w;  // 4H x D, input weights
  Param<S> u;  // 4H x H, recurrent weights
  Param<S> b;  // 4H x 1

  int input_dim = 0;
  int hidden = 0;

  LstmCell() = default;
  LstmCell(const std::string& name, int in_dim, int h)
      : w(name + ".w", 4 * h, in_dim),
        u(name + ".u", 4 * h, h),
        b(name + ".b", 4 * h, 1),
        input_dim(in_dim),
        hidden(h) {}

  void init(Rng& rng) {
    init_xavier(w.value, rng);
    init_xavier(u.value, rng);
    b.value.zero();
    for (int k = 0; k < hidden; ++k) b.value.d[hidden + k] = S(1);  // forget bias
  }
};

// Per-position activations cached for backprop. Indexing is by absolute token
// position regardless of direction.
template <typename S>
struct LstmTrace {
  std::vector<Vec<S>> h, c, gi, gf, go, gg, tc;
  int steps = 0;
};

// Runs the cell over positions `order[0], order[1], ...`; h/c in the trace are
// stored at absolute positions.
template <typename S>
LstmTrace<S> lstm_forward(const LstmCell<S>& cell, const std::vector<Vec<S>>& inputs,
                          const std::vector<int>& order) {
  const int t_len = static_cast<int>(inputs.size());
  const int h = cell.hidden;
  LstmTrace<S> tr;
  tr.steps = t_len;
  tr.h.assign(t_len, Vec<S>(h));
  tr.c.assign(t_len, Vec<S>(h));
  tr.gi.assign(t_len, Vec<S>(h));
  tr.gf.assign(t_len, Vec<S>(h));
  tr.go.assign(t_len, Vec<S>(h));
  tr.gg.assign(t_len, Vec<S>(h));
  tr.tc.assign(t_len, Vec<S>(h));

  Vec<S> h_prev(h, S(0)), c_prev(h, S(0));
  Vec<S> z(4 * h);
  for (int step = 0; step < t_len; ++step) {
    const int t = order[step];
    for (int k = 0; k < 4 * h; ++k) z[k] = cell.b.value.d[k];
    kernels::matvec(cell.w.value, inputs[t].data(), z.data());
    kernels::matvec(cell.u.value, h_prev.data(), z.data());
    for (int k = 0; k < h; ++k) {
      const S i = sigmoid(z[k]);
      const S f = sigmoid(z[h + k]);
      const S o = sigmoid(z[2 * h + k]);
      const S g = std::tanh(z[3 * h + k]);
      const S c = f * c_prev[k] + i * g;
      const S tc = std::tanh(c);
      tr.gi[t][k] = i;
      tr.gf[t][k] = f;
      tr.go[t][k] = o;
      tr.gg[t][k] = g;
      tr.c[t][k] = c;
      tr.tc[t][k] = tc;
      tr.h[t][k] = o * tc;
    }
    h_prev = tr.h[t];
    c_prev = tr.c[t];
  }
  return tr;
}

// BPTT over the same order, reversed. `d_h` holds the upstream gradient into
// h at every absolute position; gradients into the inputs are added to
// `d_inputs`. Parameter gradients accumulate into the cell.
template <typename S>
void lstm_backward(LstmCell<S>& cell, const std::vector<Vec<S>>& inputs,
                   const std::vector<int>& order, const LstmTrace<S>& tr,
                   const std::vector<Vec<S>>& d_h, std::vector<Vec<S>>& d_inputs) {
  const int t_len = static_cast<int>(inputs.size());
  const int h = cell.hidden;
  Vec<S> dh_next(h, S(0)), dc_next(h, S(0));
  Vec<S> dz(4 * h);
  for (int step = t_len - 1; step >= 0; --step) {
    const int t = order[step];
    const Vec<S>* h_prev = nullptr;
    const Vec<S>* c_prev = nullptr;
    if (step > 0) {
      h_prev = &tr.h[order[step - 1]];
      c_prev = &tr.c[order[step - 1]];
    }
    for (int k = 0; k < h; ++k) {
      const S dh = d_h[t][k] + dh_next[k];
      const S o = tr.go[t][k];
      const S tc = tr.tc[t][k];
      S dc = dc_next[k] + dh * o * (S(1) - tc * tc);
      const S i = tr.gi[t][k];
      const S f = tr.gf[t][k];
      const S g = tr.gg[t][k];
      const S cp = c_prev ? (*c_prev)[k] : S(0);
      const S d_o = dh * tc;
      const S d_i = dc * g;
      const S d_f = dc * cp;
      const S d_g = dc * i;
      dz[k] = d_i * i * (S(1) - i);
      dz[h + k] = d_f * f * (S(1) - f);
      dz[2 * h + k] = d_o * o * (S(1) - o);
      dz[3 * h + k] = d_g * (S(1) - g * g);
      dc_next[k] = dc * f;
    }
    kernels::outer_add(dz.data(), inputs[t].data(), cell.w.grad);
    for (int k = 0; k < 4 * h; ++k) cell.b.grad.d[k] += dz[k];
    if (h_prev) {
      kernels::outer_add(dz.data(), h_prev->data(), cell.u.grad);
      std::fill(dh_next.begin(), dh_next.end(), S(0));
      kernels::matvec_t(cell.u.value, dz.data(), dh_next.data());
    }
    kernels::matvec_t(cell.w.value, dz.data(), d_inputs[t].data());
  }
}

// Bidirectional LSTM. Output at position t is [fwd.h[t]; bwd.h[t]], dim 2H.
template <typename S>
struct BiLstm {
  LstmCell<S> fwd, bwd;
  int hidden = 0;

  BiLstm() = default;
  BiLstm(const std::string& name, int in_dim, int h)
      : fwd(name + ".fwd", in_dim, h), bwd(name + ".bwd", in_dim, h), hidden(h) {}

  void init(Rng& rng) {
    fwd.init(rng);
    bwd.init(rng);
  }
  int out_dim() const { return 2 * hidden; }
};

template <typename S>
struct BiLstmTrace {
  LstmTrace<S> fwd, bwd;
  std::vector<int> fwd_order, bwd_order;
};

template <typename S>
BiLstmTrace<S> bilstm_forward(const BiLstm<S>& layer, const std::vector<Vec<S>>& inputs) {
  const int t_len = static_cast<int>(inputs.size());
  BiLstmTrace<S> tr;
  tr.fwd_order.resize(t_len);
  tr.bwd_order.resize(t_len);
  for (int t = 0; t < t_len; ++t) {
    tr.fwd_order[t] = t;
    tr.bwd_order[t] = t_len - 1 - t;
  }
  tr.fwd = lstm_forward(layer.fwd, inputs, tr.fwd_order);
  tr.bwd = lstm_forward(layer.bwd, inputs, tr.bwd_order);
  return tr;
}

template <typename S>
Vec<S> bilstm_output(const BiLstmTrace<S>& tr, int t) {
  Vec<S> out(tr.fwd.h[t].size() + tr.bwd.h[t].size());
  std::copy(tr.fwd.h[t].begin(), tr.fwd.h[t].end(), out.begin());
  std::copy(tr.bwd.h[t].begin(), tr.bwd.h[t].end(), out.begin() + tr.fwd.h[t].size());
  return out;
}

// d_fwd / d_bwd hold gradients into the two directions' h at every position.
template <typename S>
void bilstm_backward(BiLstm<S>& layer, const std::vector<Vec<S>>& inputs,
                     const BiLstmTrace<S>& tr, const std::vector<Vec<S>>& d_fwd,
                     const std::vector<Vec<S>>& d_bwd, std::vector<Vec<S>>& d_inputs) {
  lstm_backward(layer.fwd, inputs, tr.fwd_order, tr.fwd, d_fwd, d_inputs);
  lstm_backward(layer.bwd, inputs, tr.bwd_order, tr.bwd, d_bwd, d_inputs);
}

// ---- dense decoder --------------------------------------------------------

template <typename S>
struct Dense {
  Param<S> w;  // out x in
  Param<S> b;  // out x 1

  Dense() = default;
  Dense(const std::string& name, int in_dim, int out_dim)
      : w(name + ".w", out_dim, in_dim), b(name + ".b", out_dim, 1) {}

  void init(Rng& rng) {
    init_xavier(w.value, rng);
    b.value.zero();
  }

  Vec<S> forward(const Vec<S>& x) const {
    Vec<S> y(w.value.rows);
    for (int r = 0; r < w.value.rows; ++r) y[r] = b.value.d[r];
    kernels::matvec(w.value, x.data(), y.data());
    return y;
  }

  void backward(const Vec<S>& x, const Vec<S>& dy, Vec<S>& dx) {
    kernels::outer_add(dy.data(), x.data(), w.grad);
    for (int r = 0; r < w.value.rows; ++r) b.grad.d[r] += dy[r];
    kernels::matvec_t(w.value, dy.data(), dx.data());
  }
};

// ---- softmax cross entropy ------------------------------------------------

template <typename S>
Vec<S> softmax(const Vec<S>& logits) {
  S mx = logits[0];
  for (S v : logits) mx = std::max(mx, v);
  Vec<S> p(logits.size());
  S z = S(0);
  for (size_t k = 0; k < logits.size(); ++k) {
    p[k] = std::exp(logits[k] - mx);
    z += p[k];
  }
  for (auto& v : p) v /= z;
  return p;
}

// Mean (over T) negative log-likelihood over per-position emissions.
// d_emissions gets (softmax - one_hot) / T.
template <typename S>
S softmax_ce_loss(const std::vector<Vec<S>>& emissions, const std::vector<int>& gold,
                  std::vector<Vec<S>>& d_emissions) {
  const int t_len = static_cast<int>(emissions.size());
  S loss = S(0);
  d_emissions.assign(t_len, Vec<S>(emissions[0].size(), S(0)));
  for (int t = 0; t < t_len; ++t) {
    Vec<S> p = softmax(emissions[t]);
    loss -= std::log(std::max(p[gold[t]], S(1e-30)));
    for (size_t k = 0; k < p.size(); ++k) {
      d_emissions[t][k] = (p[k] - (static_cast<int>(k) == gold[t] ? S(1) : S(0))) / S(t_len);
    }
  }
  return loss / S(t_len);
}

// ---- dropout --------------------------------------------------------------

enum class DropoutMode {
  kEmbedding,    // fresh mask per position
  kVariational,  // one mask shared across all time steps of the sequence
};

// Inverted dropout masks for a sequence of vectors. Masks hold the scale
// 1/(1-rate) at kept coordinates and 0 at dropped ones; identity when not
// training or rate == 0.
template <typename S>
std::vector<Vec<S>> make_dropout_masks(int steps, int dim, double rate, DropoutMode mode,
                                       bool training, Rng& rng) {
  if (rate < 0.0 || rate >= 1.0) throw std::invalid_argument("dropout rate must be in [0,1)");
  std::vector<Vec<S>> masks(steps, Vec<S>(dim, S(1)));
  if (!training || rate == 0.0) return masks;
  const S keep_scale = S(1.0 / (1.0 - rate));
  if (mode == DropoutMode::kVariational) {
    Vec<S> shared(dim);
    for (int k = 0; k < dim; ++k) shared[k] = rng.uniform() < rate ? S(0) : keep_scale;
    for (auto& m : masks) m = shared;
  } else {
    for (auto& m : masks) {
      for (int k = 0; k < dim; ++k) m[k] = rng.uniform() < rate ? S(0) : keep_scale;
    }
  }
  return masks;
}

template <typename S>
void apply_mask(Vec<S>& v, const Vec<S>& mask) {
  for (size_t k = 0; k < v.size(); ++k) v[k] *= mask[k];
}

// ---- Adam -----------------------------------------------------------------

template <typename S>
struct AdamState {
  double lr = 0.002;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long step = 0;
  std::vector<Mat<S>> m, v;  // parallel to the parameter list

  void attach(const std::vector<Param<S>*>& params) {
    m.clear();
    v.clear();
    for (auto* p : params) {
      m.emplace_back(p->value.rows, p->value.cols);
      v.emplace_back(p->value.rows, p->value.cols);
    }
  }
};

// Clips the concatenated gradient to global L2 norm `max_norm` (skip if <= 0).
template <typename S>
double clip_global_norm(const std::vector<Param<S>*>& params, double max_norm) {
  double sq = 0;
  for (auto* p : params)
    for (S g : p->grad.d) sq += static_cast<double>(g) * g;
  double norm = std::sqrt(sq);
  if (max_norm > 0 && norm > max_norm) {
    const S scale = static_cast<S>(max_norm / norm);
    for (auto* p : params)
      for (auto& g : p->grad.d) g *= scale;
  }
  return norm;
}

// One Adam update over all parameters. Throws on non-finite gradients, naming
// the step.
template <typename S>
void adam_step(const std::vector<Param<S>*>& params, AdamState<S>& st) {
  ++st.step;
  const double bc1 = 1.0 - std::pow(st.beta1, st.step);
  const double bc2 = 1.0 - std::pow(st.beta2, st.step);
  for (size_t pi = 0; pi < params.size(); ++pi) {
    Param<S>& p = *params[pi];
    auto& m = st.m[pi].d;
    auto& v = st.v[pi].d;
    for (size_t k = 0; k < p.value.d.size(); ++k) {
      const double g = p.grad.d[k];
      if (!std::isfinite(g)) {
        throw std::runtime_error("non-finite gradient in " + p.name + " at step " +
                                 std::to_string(st.step));
      }
      m[k] = static_cast<S>(st.beta1 * m[k] + (1.0 - st.beta1) * g);
      v[k] = static_cast<S>(st.beta2 * v[k] + (1.0 - st.beta2) * g * g);
      const double mhat = m[k] / bc1;
      const double vhat = v[k] / bc2;
      p.value.d[k] -= static_cast<S>(st.lr * mhat / (std::sqrt(vhat) + st.eps));
    }
  }
}

}  // namespace coordparse::nn
