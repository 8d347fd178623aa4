#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "coordparse/adversarial.hpp"
#include "coordparse/bio.hpp"
#include "coordparse/crf.hpp"
#include "coordparse/nn.hpp"

namespace coordparse {

enum class DecoderLoss { kSoftmaxCe, kCrf };

struct ModelConfig {
  bool use_char = false;
  bool use_word = true;
  int char_emb_dim = 100;
  int word_emb_dim = 300;
  int char_hidden = 100;
  int word_hidden = 200;
  DecoderLoss loss = DecoderLoss::kCrf;
  bool crf_bio_mask = false;
  // Two-layer encoder (BiLSTM_base + BiLSTM_seq) with a slot-classifier head
  // behind a gradient reversal layer.
  bool adversarial = false;
  double embedding_dropout = 0.5;
  double variational_dropout = 0.01;
};

// Token/char lookup with reserved PAD (0) and UNK (1) entries. Insertion
// order is deterministic given the corpus.
struct Vocab {
  std::vector<std::string> items{"<pad>", "<unk>"};
  std::unordered_map<std::string, int> index{{"<pad>", 0}, {"<unk>", 1}};

  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;

  int add(const std::string& s) {
    auto it = index.find(s);
    if (it != index.end()) return it->second;
    int id = static_cast<int>(items.size());
    items.push_back(s);
    index.emplace(s, id);
    return id;
  }
  int get(const std::string& s) const {
    auto it = index.find(s);
    return it == index.end() ? kUnk : it->second;
  }
  int size() const { return static_cast<int>(items.size()); }
};

// Everything cached by one forward pass, enough for exact backprop.
template <typename S>
struct ModelTrace {
  std::vector<std::vector<Vec<S>>> char_inputs;     // per word, per char
  std::vector<std::vector<int>> char_ids;           // per word
  std::vector<nn::BiLstmTrace<S>> char_traces;      // per word (if use_char)
  std::vector<int> word_ids;
  std::vector<Vec<S>> full;                         // w_full after embedding dropout
  std::vector<Vec<S>> emb_masks;                    // per position
  nn::BiLstmTrace<S> base;
  std::vector<Vec<S>> base_out;                     // h_t after variational mask
  std::vector<Vec<S>> base_mask;                    // shared variational mask
  nn::BiLstmTrace<S> seq;                           // present iff adversarial
  std::vector<Vec<S>> seq_out;
  std::vector<Vec<S>> seq_mask;
  Mat<S> emissions;                                 // T x E
  Vec<S> adv_input;                                 // base_out at last position
  Vec<S> slot_logits;
};

template <typename S>
struct TaggerModel {
  ModelConfig cfg;
  Vocab word_vocab, char_vocab;
  std::vector<std::string> slot_labels;
  std::unordered_map<std::string, int> slot_index;

  nn::Embedding<S> word_emb, char_emb;
  nn::BiLstm<S> char_bilstm;
  nn::BiLstm<S> base_bilstm;
  nn::BiLstm<S> seq_bilstm;
  nn::Dense<S> decoder;
  crf::CrfParams<S> crf_params;
  nn::Dense<S> adversary;

  TaggerModel() = default;

  // Vocabularies and slot labels must be set before build().
  void build(Rng& rng) {
    int full_dim = 0;
    if (cfg.use_char) {
      char_emb = nn::Embedding<S>("char_emb", char_vocab.size(), cfg.char_emb_dim);
      nn::init_uniform(char_emb.table.value, rng, -0.1, 0.1);
      char_bilstm = nn::BiLstm<S>("char_bilstm", cfg.char_emb_dim, cfg.char_hidden);
      char_bilstm.init(rng);
      full_dim += 2 * cfg.char_hidden;
    }
    if (cfg.use_word) {
      word_emb = nn::Embedding<S>("word_emb", word_vocab.size(), cfg.word_emb_dim);
      nn::init_uniform(word_emb.table.value, rng, -0.1, 0.1);
      full_dim += cfg.word_emb_dim;
    }
    if (!cfg.use_char && !cfg.use_word) {
      throw std::invalid_argument("at least one of char/word encoder must be active");
    }
    base_bilstm = nn::BiLstm<S>("base_bilstm", full_dim, cfg.word_hidden);
    base_bilstm.init(rng);
    if (cfg.adversarial) {
      seq_bilstm = nn::BiLstm<S>("seq_bilstm", 2 * cfg.word_hidden, cfg.word_hidden);
      seq_bilstm.init(rng);
      adversary = nn::Dense<S>("adversary", 2 * cfg.word_hidden,
                               static_cast<int>(slot_labels.size()));
      adversary.init(rng);
    }
    decoder = nn::Dense<S>("decoder", 2 * cfg.word_hidden, kNumTags);
    decoder.init(rng);
    if (cfg.loss == DecoderLoss::kCrf) {
      crf_params = crf::CrfParams<S>(kNumTags);
      crf_params.bio_mask = cfg.crf_bio_mask;
    }
  }

  void set_slot_labels(std::vector<std::string> labels) {
    slot_labels = std::move(labels);
    slot_index.clear();
    for (size_t i = 0; i < slot_labels.size(); ++i) slot_index[slot_labels[i]] = static_cast<int>(i);
  }

  // Shared encoder parameters (theta_f).
  std::vector<Param<S>*> theta_f() {
    std::vector<Param<S>*> out;
    if (cfg.use_char) {
      out.push_back(&char_emb.table);
      collect_bilstm(char_bilstm, out);
    }
    if (cfg.use_word) out.push_back(&word_emb.table);
    collect_bilstm(base_bilstm, out);
    return out;
  }
  // Task branch (theta_y): BiLSTM_seq (if present), decoder, CRF.
  std::vector<Param<S>*> theta_y() {
    std::vector<Param<S>*> out;
    if (cfg.adversarial) collect_bilstm(seq_bilstm, out);
    out.push_back(&decoder.w);
    out.push_back(&decoder.b);
    if (cfg.loss == DecoderLoss::kCrf) {
      out.push_back(&crf_params.trans);
      out.push_back(&crf_params.start);
    }
    return out;
  }
  std::vector<Param<S>*> theta_d() {
    std::vector<Param<S>*> out;
    if (cfg.adversarial) {
      out.push_back(&adversary.w);
      out.push_back(&adversary.b);
    }
    return out;
  }
  std::vector<Param<S>*> all_params() {
    auto out = theta_f();
    for (auto* p : theta_y()) out.push_back(p);
    for (auto* p : theta_d()) out.push_back(p);
    return out;
  }
  void zero_grad() {
    for (auto* p : all_params()) p->zero_grad();
  }

  // ---- forward ------------------------------------------------------------

  ModelTrace<S> forward(const std::vector<std::string>& tokens, bool training, Rng& rng) {
    if (tokens.empty()) throw std::invalid_argument("empty utterance");
    const int t_len = static_cast<int>(tokens.size());
    ModelTrace<S> tr;

    int full_dim = (cfg.use_char ? 2 * cfg.char_hidden : 0) +
                   (cfg.use_word ? cfg.word_emb_dim : 0);
    tr.full.assign(t_len, Vec<S>(full_dim));
    if (cfg.use_char) {
      tr.char_inputs.resize(t_len);
      tr.char_ids.resize(t_len);
      tr.char_traces.resize(t_len);
    }
    tr.word_ids.resize(t_len);

    for (int t = 0; t < t_len; ++t) {
      int off = 0;
      if (cfg.use_char) {
        const std::string& w = tokens[t];
        if (w.empty()) throw std::invalid_argument("empty token at position " + std::to_string(t));
        auto& ids = tr.char_ids[t];
        auto& ins = tr.char_inputs[t];
        for (char ch : w) {
          int id = char_vocab.get(std::string(1, ch));
          ids.push_back(id);
          ins.emplace_back(char_emb.lookup(id), char_emb.lookup(id) + cfg.char_emb_dim);
        }
        tr.char_traces[t] = nn::bilstm_forward(char_bilstm, ins);
        const int l = static_cast<int>(ins.size());
        // w_char = [last forward state; first backward state]
        const auto& hf = tr.char_traces[t].fwd.h[l - 1];
        const auto& hb = tr.char_traces[t].bwd.h[0];
        std::copy(hf.begin(), hf.end(), tr.full[t].begin() + off);
        std::copy(hb.begin(), hb.end(), tr.full[t].begin() + off + cfg.char_hidden);
        off += 2 * cfg.char_hidden;
      }
      if (cfg.use_word) {
        tr.word_ids[t] = word_vocab.get(tokens[t]);
        const S* e = word_emb.lookup(tr.word_ids[t]);
        std::copy(e, e + cfg.word_emb_dim, tr.full[t].begin() + off);
      }
    }

    tr.emb_masks = nn::make_dropout_masks<S>(t_len, full_dim, cfg.embedding_dropout,
                                             nn::DropoutMode::kEmbedding, training, rng);
    for (int t = 0; t < t_len; ++t) nn::apply_mask(tr.full[t], tr.emb_masks[t]);

    tr.base = nn::bilstm_forward(base_bilstm, tr.full);
    tr.base_mask = nn::make_dropout_masks<S>(1, base_bilstm.out_dim(), cfg.variational_dropout,
                                             nn::DropoutMode::kVariational, training, rng);
    tr.base_out.resize(t_len);
    for (int t = 0; t < t_len; ++t) {
      tr.base_out[t] = nn::bilstm_output(tr.base, t);
      nn::apply_mask(tr.base_out[t], tr.base_mask[0]);
    }

    const std::vector<Vec<S>>* top = &tr.base_out;
    if (cfg.adversarial) {
      tr.seq = nn::bilstm_forward(seq_bilstm, tr.base_out);
      tr.seq_mask = nn::make_dropout_masks<S>(1, seq_bilstm.out_dim(), cfg.variational_dropout,
                                              nn::DropoutMode::kVariational, training, rng);
      tr.seq_out.resize(t_len);
      for (int t = 0; t < t_len; ++t) {
        tr.seq_out[t] = nn::bilstm_output(tr.seq, t);
        nn::apply_mask(tr.seq_out[t], tr.seq_mask[0]);
      }
      top = &tr.seq_out;
      tr.adv_input = tr.base_out[t_len - 1];  // last output of BiLSTM_base
      tr.slot_logits = adversary.forward(tr.adv_input);
    }

    tr.emissions = Mat<S>(t_len, kNumTags);
    for (int t = 0; t < t_len; ++t) {
      Vec<S> y = decoder.forward((*top)[t]);
      for (int k = 0; k < kNumTags; ++k) tr.emissions(t, k) = y[k];
    }
    return tr;
  }

  // ---- loss + backward ----------------------------------------------------

  // Computes L_y (and L_d when adversarial) and accumulates gradients.
  // Training gradients: theta_y and theta_f get dL_y; theta_d gets
  // adv_head_scale * dL_d (1.0 during training); theta_f additionally gets
  // -lambda * dL_d through the reversal layer.
  adversarial::LossBreakdown backward(const std::vector<std::string>& tokens,
                                      const ModelTrace<S>& tr, const std::vector<int>& gold,
                                      int slot_id, double lambda, double adv_head_scale = 1.0) {
    const int t_len = static_cast<int>(tokens.size());
    adversarial::LossBreakdown lb;
    lb.lambda = lambda;

    // tag loss -> d_emissions
    Mat<S> d_f;
    if (cfg.loss == DecoderLoss::kCrf) {
      lb.tag_loss = crf::crf_nll(tr.emissions, gold, crf_params, d_f);
    } else {
      std::vector<Vec<S>> em(t_len), dem;
      for (int t = 0; t < t_len; ++t)
        em[t].assign(tr.emissions.row(t), tr.emissions.row(t) + kNumTags);
      lb.tag_loss = nn::softmax_ce_loss(em, gold, dem);
      d_f = Mat<S>(t_len, kNumTags);
      for (int t = 0; t < t_len; ++t)
        for (int k = 0; k < kNumTags; ++k) d_f(t, k) = dem[t][k];
    }

    // decoder backward into the top layer
    const std::vector<Vec<S>>& top = cfg.adversarial ? tr.seq_out : tr.base_out;
    std::vector<Vec<S>> d_top(t_len, Vec<S>(decoder.w.value.cols, S(0)));
    for (int t = 0; t < t_len; ++t) {
      Vec<S> dy(d_f.row(t), d_f.row(t) + kNumTags);
      decoder.backward(top[t], dy, d_top[t]);
    }

    std::vector<Vec<S>> d_base(t_len, Vec<S>(base_bilstm.out_dim(), S(0)));
    if (cfg.adversarial) {
      // seq layer backward (variational mask first)
      for (int t = 0; t < t_len; ++t) nn::apply_mask(d_top[t], tr.seq_mask[0]);
      std::vector<Vec<S>> d_seq_fwd(t_len, Vec<S>(cfg.word_hidden, S(0)));
      std::vector<Vec<S>> d_seq_bwd(t_len, Vec<S>(cfg.word_hidden, S(0)));
      for (int t = 0; t < t_len; ++t) {
        std::copy(d_top[t].begin(), d_top[t].begin() + cfg.word_hidden, d_seq_fwd[t].begin());
        std::copy(d_top[t].begin() + cfg.word_hidden, d_top[t].end(), d_seq_bwd[t].begin());
      }
      nn::bilstm_backward(seq_bilstm, tr.base_out, tr.seq, d_seq_fwd, d_seq_bwd, d_base);

      // adversary head: plain cross entropy on the slot label
      if (slot_id < 0 || slot_id >= static_cast<int>(slot_labels.size())) {
        throw std::invalid_argument("unknown slot label id " + std::to_string(slot_id));
      }
      Vec<S> p = nn::softmax(tr.slot_logits);
      lb.slot_loss = -std::log(std::max<double>(p[slot_id], 1e-30));
      Vec<S> d_logits(p.size());
      for (size_t k = 0; k < p.size(); ++k)
        d_logits[k] = p[k] - (static_cast<int>(k) == slot_id ? S(1) : S(0));

      // theta_d path: unreversed head gradient, scaled by adv_head_scale
      Vec<S> d_logits_head = d_logits;
      for (auto& g : d_logits_head) g *= static_cast<S>(adv_head_scale);
      kernels::outer_add(d_logits_head.data(), tr.adv_input.data(), adversary.w.grad);
      for (size_t k = 0; k < d_logits_head.size(); ++k)
        adversary.b.grad.d[k] += d_logits_head[k];

      // gradient reversal: shared encoder receives -lambda * dL_d
      Vec<S> d_logits_rev = d_logits;
      for (auto& g : d_logits_rev) g *= static_cast<S>(-lambda);
      Vec<S> d_adv_in(base_bilstm.out_dim(), S(0));
      kernels::matvec_t(adversary.w.value, d_logits_rev.data(), d_adv_in.data());
      for (int k = 0; k < base_bilstm.out_dim(); ++k) d_base[t_len - 1][k] += d_adv_in[k];
    }
    for (int t = 0; t < t_len; ++t) {
      if (!cfg.adversarial) d_base[t] = d_top[t];
      nn::apply_mask(d_base[t], tr.base_mask[0]);
    }

    std::vector<Vec<S>> d_base_fwd(t_len, Vec<S>(cfg.word_hidden, S(0)));
    std::vector<Vec<S>> d_base_bwd(t_len, Vec<S>(cfg.word_hidden, S(0)));
    for (int t = 0; t < t_len; ++t) {
      std::copy(d_base[t].begin(), d_base[t].begin() + cfg.word_hidden, d_base_fwd[t].begin());
      std::copy(d_base[t].begin() + cfg.word_hidden, d_base[t].end(), d_base_bwd[t].begin());
    }
    std::vector<Vec<S>> d_full(t_len, Vec<S>(tr.full[0].size(), S(0)));
    nn::bilstm_backward(base_bilstm, tr.full, tr.base, d_base_fwd, d_base_bwd, d_full);

    for (int t = 0; t < t_len; ++t) {
      nn::apply_mask(d_full[t], tr.emb_masks[t]);
      int off = 0;
      if (cfg.use_char) {
        const int l = static_cast<int>(tr.char_inputs[t].size());
        std::vector<Vec<S>> d_cf(l, Vec<S>(cfg.char_hidden, S(0)));
        std::vector<Vec<S>> d_cb(l, Vec<S>(cfg.char_hidden, S(0)));
        for (int k = 0; k < cfg.char_hidden; ++k) {
          d_cf[l - 1][k] = d_full[t][off + k];
          d_cb[0][k] = d_full[t][off + cfg.char_hidden + k];
        }
        std::vector<Vec<S>> d_cin(l, Vec<S>(cfg.char_emb_dim, S(0)));
        nn::bilstm_backward(char_bilstm, tr.char_inputs[t], tr.char_traces[t], d_cf, d_cb, d_cin);
        for (int c = 0; c < l; ++c) char_emb.accumulate_grad(tr.char_ids[t][c], d_cin[c].data());
        off += 2 * cfg.char_hidden;
      }
      if (cfg.use_word) {
        word_emb.accumulate_grad(tr.word_ids[t], d_full[t].data() + off);
      }
    }
    lb.total = lb.tag_loss - lambda * lb.slot_loss;
    return lb;
  }

  // Deterministic inference: Viterbi for CRF models, per-position argmax
  // (lowest index wins ties) for softmax models.
  std::vector<int> predict(const std::vector<std::string>& tokens) {
    Rng rng(0);  // unused: dropout off at inference
    ModelTrace<S> tr = forward(tokens, /*training=*/false, rng);
    const int t_len = static_cast<int>(tokens.size());
    std::vector<int> tags(t_len);
    if (cfg.loss == DecoderLoss::kCrf) {
      tags = crf::viterbi_decode(tr.emissions, crf_params).first;
    } else {
      for (int t = 0; t < t_len; ++t) {
        const S* row = tr.emissions.row(t);
        tags[t] = static_cast<int>(std::max_element(row, row + kNumTags) - row);
      }
    }
    return tags;
  }

 private:
  static void collect_bilstm(nn::BiLstm<S>& b, std::vector<Param<S>*>& out) {
    out.push_back(&b.fwd.w);
    out.push_back(&b.fwd.u);
    out.push_back(&b.fwd.b);
    out.push_back(&b.bwd.w);
    out.push_back(&b.bwd.u);
    out.push_back(&b.bwd.b);
  }
};

// Builds word/char vocabularies from a training corpus, in first-appearance
// order.
template <typename S>
void build_vocabs(TaggerModel<S>& model, const std::vector<LabeledUtterance>& train) {
  for (const auto& u : train) {
    for (const auto& tok : u.tokens) {
      model.word_vocab.add(tok);
      for (char ch : tok) model.char_vocab.add(std::string(1, ch));
    }
  }
}

}  // namespace coordparse
