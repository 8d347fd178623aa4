#pragma once

#include <map>
#include <string>
#include <vector>

#include "coordparse/bio.hpp"
#include "coordparse/rng.hpp"

namespace coordparse::datagen {

// Placeholder token inside carrier phrases.
inline const std::string kPlaceholder = "⟨SLOT⟩";  // ⟨SLOT⟩

struct SlotCatalog {
  std::string slot_type;
  std::vector<std::vector<std::string>> entities;  // tokenized multi-word phrases
};

struct CarrierPhrase {
  std::string slot_type;
  std::vector<std::string> tokens;  // contains exactly one kPlaceholder
};

struct GenConfig {
  std::string conjunction = "and";
  // P(2 conjuncts), P(3), P(4+); the 4+ bucket resolves uniformly over {4,5}.
  double p2 = 0.60, p3 = 0.28, p4plus = 0.12;
  int corpus_size = 0;
  double train_ratio = 0.8, valid_ratio = 0.1;  // test gets the rest
  std::uint64_t seed = 0;
  bool insert_comma = false;  // literal "," between non-final conjuncts
};

struct Grammar {
  std::map<std::string, SlotCatalog> catalogs;  // keyed by slot type
  std::vector<CarrierPhrase> carriers;
};

// Reads catalogs/<SlotType>.txt (one entity phrase per line) and
// carriers/<SlotType>.txt (one carrier per line, placeholder spelled ⟨SLOT⟩)
// from a grammar directory. `only` restricts to a subset of slot types.
Grammar load_grammar(const std::string& dir, const std::vector<std::string>& only = {});

// Replaces the carrier's placeholder with e1 ... e_{k-1} <conjunction> e_k and
// labels each entity B-C (I-C)*, the conjunction CC, carrier tokens O.
// Requires >= 2 pairwise distinct entities of the carrier's slot type.
LabeledUtterance generate_utterance(const CarrierPhrase& carrier,
                                    const std::vector<std::vector<std::string>>& entities,
                                    const std::string& conjunction, bool insert_comma = false);

// Deterministic under a fixed seed: each utterance draws from a stream derived
// from (seed, index). Split boundaries follow the configured ratios.
DatasetSplit generate_corpus(const Grammar& grammar, const GenConfig& config);

// Same generation procedure over unseen slot types; validates they are
// disjoint from `training_slot_types`.
std::vector<LabeledUtterance> generate_unseen_testset(
    const Grammar& unseen_grammar, const std::vector<std::string>& training_slot_types,
    int per_slot, const GenConfig& config);

}  // namespace coordparse::datagen
