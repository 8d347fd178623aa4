#include "coordparse/datagen.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace coordparse::datagen {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> split_tokens(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> toks;
  std::string t;
  while (ss >> t) toks.push_back(t);
  return toks;
}

std::string lower(std::string s) {
  for (char& c : s)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return s;
}

std::vector<std::string> list_slot_files(const fs::path& dir) {
  std::vector<std::string> names;
  if (!fs::is_directory(dir)) throw std::runtime_error("missing grammar directory: " + dir.string());
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() == ".txt") names.push_back(e.path().stem().string());
  }
  std::sort(names.begin(), names.end());
  return names;
}

// Sample k distinct indices from [0, n).
std::vector<int> sample_distinct(Rng& rng, int n, int k) {
  std::vector<int> pool(n);
  for (int i = 0; i < n; ++i) pool[i] = i;
  for (int i = 0; i < k; ++i) {
    int j = i + rng.uniform_int(n - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return pool;
}

int draw_conjunct_count(Rng& rng, const GenConfig& cfg) {
  const double total = cfg.p2 + cfg.p3 + cfg.p4plus;
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("conjunct count distribution must sum to 1");
  }
  const double u = rng.uniform();
  if (u < cfg.p2) return 2;
  if (u < cfg.p2 + cfg.p3) return 3;
  return 4 + rng.uniform_int(2);  // uniform over {4, 5}
}

LabeledUtterance generate_one(const Grammar& grammar, const GenConfig& cfg, Rng& rng) {
  const auto& carrier = grammar.carriers[rng.uniform_int(static_cast<int>(grammar.carriers.size()))];
  auto cat_it = grammar.catalogs.find(carrier.slot_type);
  if (cat_it == grammar.catalogs.end()) {
    throw std::runtime_error("no catalog for carrier slot type " + carrier.slot_type);
  }
  const auto& entities = cat_it->second.entities;
  int k = draw_conjunct_count(rng, cfg);
  k = std::min<int>(k, static_cast<int>(entities.size()));
  auto idx = sample_distinct(rng, static_cast<int>(entities.size()), k);
  std::vector<std::vector<std::string>> picked;
  picked.reserve(k);
  for (int i : idx) picked.push_back(entities[i]);
  return generate_utterance(carrier, picked, cfg.conjunction, cfg.insert_comma);
}

}  // namespace

Grammar load_grammar(const std::string& dir, const std::vector<std::string>& only) {
  Grammar g;
  const fs::path root(dir);
  std::set<std::string> filter(only.begin(), only.end());
  for (const auto& slot : list_slot_files(root / "catalogs")) {
    if (!filter.empty() && !filter.count(slot)) continue;
    SlotCatalog cat;
    cat.slot_type = slot;
    std::ifstream in(root / "catalogs" / (slot + ".txt"));
    std::string line;
    while (std::getline(in, line)) {
      auto toks = split_tokens(lower(line));
      if (!toks.empty()) cat.entities.push_back(std::move(toks));
    }
    if (cat.entities.size() < 2) {
      throw std::runtime_error("catalog " + slot + " needs at least 2 entities");
    }
    g.catalogs.emplace(slot, std::move(cat));
  }
  for (const auto& slot : list_slot_files(root / "carriers")) {
    if (!filter.empty() && !filter.count(slot)) continue;
    if (!g.catalogs.count(slot)) {
      throw std::runtime_error("carrier file for " + slot + " has no matching catalog");
    }
    std::ifstream in(root / "carriers" / (slot + ".txt"));
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      auto toks = split_tokens(line);
      if (toks.empty()) continue;
      CarrierPhrase c;
      c.slot_type = slot;
      int placeholders = 0;
      for (auto& t : toks) {
        if (t == kPlaceholder) {
          ++placeholders;
          c.tokens.push_back(t);
        } else {
          c.tokens.push_back(lower(t));
        }
      }
      if (placeholders != 1) {
        throw std::runtime_error("carriers/" + slot + ".txt:" + std::to_string(lineno) +
                                 ": carrier must contain exactly one " + kPlaceholder);
      }
      g.carriers.push_back(std::move(c));
    }
  }
  if (g.carriers.empty()) throw std::runtime_error("grammar has no carriers: " + dir);
  return g;
}

LabeledUtterance generate_utterance(const CarrierPhrase& carrier,
                                    const std::vector<std::vector<std::string>>& entities,
                                    const std::string& conjunction, bool insert_comma) {
  if (entities.size() < 2) throw std::invalid_argument("coordination needs at least 2 entities");
  for (size_t i = 0; i < entities.size(); ++i) {
    for (size_t j = i + 1; j < entities.size(); ++j) {
      if (entities[i] == entities[j]) throw std::invalid_argument("entities must be distinct");
    }
  }

  LabeledUtterance u;
  u.slot_type = carrier.slot_type;
  std::vector<ConjunctSpan> spans;
  std::vector<int> cc_positions;
  const int k = static_cast<int>(entities.size());
  for (const auto& tok : carrier.tokens) {
    if (tok != kPlaceholder) {
      u.tokens.push_back(tok);
      continue;
    }
    for (int e = 0; e < k; ++e) {
      if (e == k - 1) {
        // conjunction sits between the last and penultimate entity only
        cc_positions.push_back(static_cast<int>(u.tokens.size()));
        u.tokens.push_back(conjunction);
      } else if (e > 0 && insert_comma) {
        u.tokens.push_back(",");
      }
      const int start = static_cast<int>(u.tokens.size());
      for (const auto& w : entities[e]) u.tokens.push_back(w);
      spans.push_back({start, static_cast<int>(u.tokens.size())});
    }
  }
  u.tags = encode_bio(spans, cc_positions, static_cast<int>(u.tokens.size()));
  u.conjunct_count = k;
  return u;
}

DatasetSplit generate_corpus(const Grammar& grammar, const GenConfig& config) {
  for (const auto& c : grammar.carriers) {
    if (!grammar.catalogs.count(c.slot_type)) {
      throw std::runtime_error("missing catalog for carrier slot type " + c.slot_type);
    }
  }
  std::vector<LabeledUtterance> all;
  all.reserve(config.corpus_size);
  for (int i = 0; i < config.corpus_size; ++i) {
    Rng rng = Rng::derive(config.seed, static_cast<std::uint64_t>(i));
    all.push_back(generate_one(grammar, config, rng));
  }
  DatasetSplit split;
  const int n = static_cast<int>(all.size());
  const int n_train = static_cast<int>(config.train_ratio * n);
  const int n_valid = static_cast<int>(config.valid_ratio * n);
  split.train.assign(all.begin(), all.begin() + n_train);
  split.validation.assign(all.begin() + n_train, all.begin() + n_train + n_valid);
  split.test.assign(all.begin() + n_train + n_valid, all.end());
  return split;
}

std::vector<LabeledUtterance> generate_unseen_testset(
    const Grammar& unseen_grammar, const std::vector<std::string>& training_slot_types,
    int per_slot, const GenConfig& config) {
  std::set<std::string> train_types(training_slot_types.begin(), training_slot_types.end());
  for (const auto& [slot, _] : unseen_grammar.catalogs) {
    if (train_types.count(slot)) {
      throw std::invalid_argument("unseen slot type " + slot + " appears in training types");
    }
  }
  std::vector<LabeledUtterance> out;
  std::uint64_t stream = 1ull << 32;  // distinct stream range from generate_corpus
  for (const auto& [slot, catalog] : unseen_grammar.catalogs) {
    Grammar sub;
    sub.catalogs.emplace(slot, catalog);
    for (const auto& c : unseen_grammar.carriers) {
      if (c.slot_type == slot) sub.carriers.push_back(c);
    }
    if (sub.carriers.empty()) {
      throw std::runtime_error("no carriers for unseen slot type " + slot);
    }
    for (int i = 0; i < per_slot; ++i) {
      Rng rng = Rng::derive(config.seed, stream++);
      out.push_back(generate_one(sub, config, rng));
    }
  }
  return out;
}

}  // namespace coordparse::datagen
