#pragma once

#include <cstdint>
#include <string>

#include "coordparse/model.hpp"

namespace coordparse {

// Single-file checkpoint: a JSON header (config, vocabularies, tag inventory,
// slot labels, tensor manifest) followed by raw float32 tensor data. Save and
// load round-trip bit-exactly.
void save_checkpoint(const TaggerModel<float>& model, const std::string& path);
TaggerModel<float> load_checkpoint(const std::string& path);

// Serialized size in bytes of an existing checkpoint file.
std::uint64_t model_size(const std::string& path);

// Loads "token v1 ... vD" lines into the word embedding table; tokens absent
// from the file keep their random initialization. Returns the number of
// vocabulary entries covered.
int load_pretrained_vectors(TaggerModel<float>& model, const std::string& path);

}  // namespace coordparse
