#include "coordparse/checkpoint.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace coordparse {

using nlohmann::json;

namespace {

constexpr char kMagic[] = "CPCK1\n";

json config_to_json(const ModelConfig& c) {
  return json{{"use_char", c.use_char},
              {"use_word", c.use_word},
              {"char_emb_dim", c.char_emb_dim},
              {"word_emb_dim", c.word_emb_dim},
              {"char_hidden", c.char_hidden},
              {"word_hidden", c.word_hidden},
              {"loss", c.loss == DecoderLoss::kCrf ? "crf" : "softmax-ce"},
              {"crf_bio_mask", c.crf_bio_mask},
              {"adversarial", c.adversarial},
              {"embedding_dropout", c.embedding_dropout},
              {"variational_dropout", c.variational_dropout}};
}

ModelConfig config_from_json(const json& j) {
  ModelConfig c;
  c.use_char = j.at("use_char").get<bool>();
  c.use_word = j.at("use_word").get<bool>();
  c.char_emb_dim = j.at("char_emb_dim").get<int>();
  c.word_emb_dim = j.at("word_emb_dim").get<int>();
  c.char_hidden = j.at("char_hidden").get<int>();
  c.word_hidden = j.at("word_hidden").get<int>();
  c.loss = j.at("loss").get<std::string>() == "crf" ? DecoderLoss::kCrf : DecoderLoss::kSoftmaxCe;
  c.crf_bio_mask = j.at("crf_bio_mask").get<bool>();
  c.adversarial = j.at("adversarial").get<bool>();
  c.embedding_dropout = j.at("embedding_dropout").get<double>();
  c.variational_dropout = j.at("variational_dropout").get<double>();
  return c;
}

void restore_vocab(Vocab& v, const std::vector<std::string>& items) {
  v.items = items;
  v.index.clear();
  for (size_t i = 0; i < items.size(); ++i) v.index[items[i]] = static_cast<int>(i);
}

}  // namespace

void save_checkpoint(const TaggerModel<float>& model, const std::string& path) {
  auto& m = const_cast<TaggerModel<float>&>(model);
  auto params = m.all_params();

  json header;
  header["config"] = config_to_json(model.cfg);
  header["word_vocab"] = model.word_vocab.items;
  header["char_vocab"] = model.char_vocab.items;
  header["slot_labels"] = model.slot_labels;
  std::vector<std::string> tag_inv;
  for (int k = 0; k < kNumTags; ++k) tag_inv.push_back(tag_name(static_cast<Tag>(k)));
  header["tags"] = tag_inv;
  json manifest = json::array();
  for (auto* p : params) {
    manifest.push_back({{"name", p->name}, {"rows", p->value.rows}, {"cols", p->value.cols}});
  }
  header["tensors"] = manifest;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out.write(kMagic, sizeof(kMagic) - 1);
  const std::string hs = header.dump();
  const std::uint64_t hlen = hs.size();
  out.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
  out.write(hs.data(), static_cast<std::streamsize>(hs.size()));
  for (auto* p : params) {
    out.write(reinterpret_cast<const char*>(p->value.d.data()),
              static_cast<std::streamsize>(p->value.d.size() * sizeof(float)));
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

TaggerModel<float> load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[sizeof(kMagic) - 1];
  in.read(magic, sizeof(magic));
  if (!in || std::string(magic, sizeof(magic)) != std::string(kMagic, sizeof(magic))) {
    throw std::runtime_error("not a checkpoint file: " + path);
  }
  std::uint64_t hlen = 0;
  in.read(reinterpret_cast<char*>(&hlen), sizeof(hlen));
  std::string hs(hlen, '\0');
  in.read(hs.data(), static_cast<std::streamsize>(hlen));
  json header = json::parse(hs);

  TaggerModel<float> model;
  model.cfg = config_from_json(header.at("config"));
  restore_vocab(model.word_vocab, header.at("word_vocab").get<std::vector<std::string>>());
  restore_vocab(model.char_vocab, header.at("char_vocab").get<std::vector<std::string>>());
  model.set_slot_labels(header.at("slot_labels").get<std::vector<std::string>>());
  Rng rng(0);
  model.build(rng);

  auto params = model.all_params();
  const auto& manifest = header.at("tensors");
  if (manifest.size() != params.size()) {
    throw std::runtime_error("checkpoint tensor count mismatch in " + path);
  }
  for (size_t i = 0; i < params.size(); ++i) {
    const auto& t = manifest[i];
    if (t.at("name").get<std::string>() != params[i]->name ||
        t.at("rows").get<int>() != params[i]->value.rows ||
        t.at("cols").get<int>() != params[i]->value.cols) {
      throw std::runtime_error("checkpoint tensor mismatch at " + params[i]->name);
    }
    in.read(reinterpret_cast<char*>(params[i]->value.d.data()),
            static_cast<std::streamsize>(params[i]->value.d.size() * sizeof(float)));
  }
  if (!in) throw std::runtime_error("truncated checkpoint: " + path);
  return model;
}

std::uint64_t model_size(const std::string& path) {
  return std::filesystem::file_size(path);
}

int load_pretrained_vectors(TaggerModel<float>& model, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open pretrained vectors: " + path);
  const int dim = model.cfg.word_emb_dim;
  int covered = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string tok;
    ss >> tok;
    auto it = model.word_vocab.index.find(tok);
    if (it == model.word_vocab.index.end()) continue;
    float* row = model.word_emb.table.value.row(it->second);
    for (int k = 0; k < dim; ++k) {
      if (!(ss >> row[k])) {
        throw std::runtime_error("pretrained vector for '" + tok + "' has fewer than " +
                                 std::to_string(dim) + " values");
      }
    }
    ++covered;
  }
  return covered;
}

}  // namespace coordparse
