#include "coordparse/training.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>

#include "coordparse/checkpoint.hpp"
#include "coordparse/eval.hpp"
#include "json.hpp"

namespace coordparse::training {

using nlohmann::json;

TrainConfig parse_train_config(const std::string& json_text) {
  json j = json::parse(json_text);
  TrainConfig c;
  auto opt = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  std::string char_enc = "none", word_enc = "random-init", loss = "crf";
  if (j.contains("char_encoder")) char_enc = j.at("char_encoder").get<std::string>();
  if (j.contains("word_encoder")) word_enc = j.at("word_encoder").get<std::string>();
  if (j.contains("loss")) loss = j.at("loss").get<std::string>();
  c.model.use_char = char_enc != "none";
  c.model.use_word = word_enc != "none";
  if (word_enc == "pretrained-file") {
    c.pretrained_vectors = j.at("pretrained_vectors").get<std::string>();
  }
  if (!c.model.use_char && !c.model.use_word) {
    throw std::invalid_argument("config: at least one encoder must be active");
  }
  if (loss == "crf") {
    c.model.loss = DecoderLoss::kCrf;
  } else if (loss == "softmax-ce") {
    c.model.loss = DecoderLoss::kSoftmaxCe;
  } else {
    throw std::invalid_argument("config: loss must be 'crf' or 'softmax-ce'");
  }
  opt("char_emb_dim", c.model.char_emb_dim);
  opt("word_emb_dim", c.model.word_emb_dim);
  opt("char_hidden", c.model.char_hidden);
  opt("word_hidden", c.model.word_hidden);
  opt("embedding_dropout", c.model.embedding_dropout);
  opt("variational_dropout", c.model.variational_dropout);
  opt("crf_bio_mask", c.model.crf_bio_mask);
  opt("adversarial", c.model.adversarial);
  opt("gamma", c.gamma);
  opt("lr", c.lr);
  opt("grad_clip", c.grad_clip);
  opt("batch_size", c.batch_size);
  opt("max_epochs", c.max_epochs);
  opt("patience", c.patience);
  std::uint64_t seed = 0;
  if (j.contains("seed")) seed = j.at("seed").get<std::uint64_t>();
  c.seed = seed;
  return c;
}

TrainConfig load_train_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_train_config(text);
}

std::string EpochRecord::to_json() const {
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "{\"epoch\":%d,\"tag_loss\":%.6f,\"slot_loss\":%.6f,\"lambda\":%.6f,"
                "\"val_accuracy\":%.6f,\"val_f1\":%.6f}",
                epoch, tag_loss, slot_loss, lambda, val_accuracy, val_f1);
  return buf;
}

namespace {

std::vector<int> gold_ids(const LabeledUtterance& u) {
  std::vector<int> g(u.tags.size());
  for (size_t t = 0; t < u.tags.size(); ++t) g[t] = static_cast<int>(u.tags[t]);
  return g;
}

}  // namespace

TrainResult train(const TrainConfig& config, const DatasetSplit& dataset) {
  if (dataset.train.empty()) throw std::invalid_argument("empty training set");

  TrainResult res;
  TaggerModel<float>& model = res.model;
  model.cfg = config.model;
  build_vocabs(model, dataset.train);
  {
    std::set<std::string> slots;
    for (const auto& u : dataset.train) slots.insert(u.slot_type);
    model.set_slot_labels({slots.begin(), slots.end()});
  }
  Rng init_rng(config.seed);
  model.build(init_rng);
  if (!config.pretrained_vectors.empty()) {
    load_pretrained_vectors(model, config.pretrained_vectors);
  }

  auto params = model.all_params();
  nn::AdamState<float> opt;
  opt.lr = config.lr;
  opt.attach(params);

  // length-sorted batches, batch order shuffled per epoch
  std::vector<int> order(dataset.train.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return dataset.train[a].tokens.size() < dataset.train[b].tokens.size();
  });
  std::vector<std::vector<int>> batches;
  for (size_t i = 0; i < order.size(); i += config.batch_size) {
    batches.emplace_back(order.begin() + i,
                         order.begin() + std::min(order.size(), i + config.batch_size));
  }

  const long total_steps = static_cast<long>(config.max_epochs) * static_cast<long>(batches.size());
  long step = 0;
  std::uint64_t dropout_stream = 0;
  double best_acc = -1.0;
  int best_epoch = -1;
  int stale = 0;
  TaggerModel<float> best_model = model;

  auto validate = [&](TaggerModel<float>& m) {
    eval::EvalReport rep = eval::evaluate(
        [&](const std::vector<std::string>& toks) {
          std::vector<int> ids = m.predict(toks);
          std::vector<Tag> tags(ids.size());
          for (size_t t = 0; t < ids.size(); ++t) tags[t] = static_cast<Tag>(ids[t]);
          return tags;
        },
        dataset.validation, /*by_slot=*/false);
    return rep;
  };

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    Rng shuffle_rng = Rng::derive(config.seed, 0x5u * epoch);
    std::vector<int> batch_order(batches.size());
    std::iota(batch_order.begin(), batch_order.end(), 0);
    for (int i = static_cast<int>(batch_order.size()) - 1; i > 0; --i) {
      std::swap(batch_order[i], batch_order[shuffle_rng.uniform_int(i + 1)]);
    }

    double epoch_tag_loss = 0.0, epoch_slot_loss = 0.0;
    long seen = 0;
    double lambda = 0.0;
    for (int bi : batch_order) {
      const auto& batch = batches[bi];
      const double p = total_steps > 0 ? std::min(1.0, double(step) / double(total_steps)) : 0.0;
      lambda = config.model.adversarial ? adversarial::lambda_schedule(p, config.gamma) : 0.0;
      model.zero_grad();
      for (int ui : batch) {
        const auto& u = dataset.train[ui];
        Rng drop_rng = Rng::derive(config.seed ^ 0x9e37u, dropout_stream++);
        auto tr = model.forward(u.tokens, /*training=*/true, drop_rng);
        int slot_id = -1;
        if (config.model.adversarial) {
          auto it = model.slot_index.find(u.slot_type);
          if (it == model.slot_index.end()) {
            throw std::runtime_error("unknown slot label at training time: " + u.slot_type);
          }
          slot_id = it->second;
        }
        auto lb = model.backward(u.tokens, tr, gold_ids(u), slot_id, lambda);
        if (!std::isfinite(lb.tag_loss) || !std::isfinite(lb.slot_loss)) {
          throw std::runtime_error("non-finite loss at step " + std::to_string(step));
        }
        epoch_tag_loss += lb.tag_loss;
        epoch_slot_loss += lb.slot_loss;
        ++seen;
      }
      const float inv = 1.0f / static_cast<float>(batch.size());
      for (auto* pp : params)
        for (auto& g : pp->grad.d) g *= inv;
      nn::clip_global_norm(params, config.grad_clip);
      nn::adam_step(params, opt);
      ++step;
    }

    eval::EvalReport rep = validate(model);
    EpochRecord rec;
    rec.epoch = epoch;
    rec.tag_loss = seen ? epoch_tag_loss / seen : 0.0;
    rec.slot_loss = seen ? epoch_slot_loss / seen : 0.0;
    rec.lambda = lambda;
    rec.val_accuracy = rep.overall.accuracy();
    rec.val_f1 = rep.overall.f1();
    res.log.push_back(rec);

    if (rec.val_accuracy > best_acc) {
      best_acc = rec.val_accuracy;
      best_epoch = epoch;
      best_model = model;
      stale = 0;
    } else {
      ++stale;
      if (stale >= config.patience) break;
    }
  }

  if (best_epoch >= 0) {
    res.model = best_model;
  }
  res.best_epoch = best_epoch;
  res.best_val_accuracy = best_acc < 0 ? 0.0 : best_acc;
  return res;
}

}  // namespace coordparse::training
