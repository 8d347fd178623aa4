#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "coordparse/bio.hpp"

namespace coordparse {

// Corpus files are line-delimited JSON records:
//   {"tokens": [...], "tags": [...], "slot_type": "..."}
// Tag strings are exactly "O", "B-C", "I-C", "CC".

std::string to_corpus_line(const LabeledUtterance& u);
LabeledUtterance from_corpus_line(const std::string& line);

std::vector<LabeledUtterance> read_corpus(const std::string& path);
void write_corpus(const std::string& path, const std::vector<LabeledUtterance>& data);

}  // namespace coordparse
