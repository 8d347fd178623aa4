#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace coordparse {

// Tag inventory for conjunct chunking. Indices are stable and part of the
// checkpoint/corpus contract.
enum class Tag : std::uint8_t {
  O = 0,
  BC = 1,  // B-C, conjunct begin
  IC = 2,  // I-C, conjunct inside
  CC = 3,  // coordinating conjunction
};

inline constexpr int kNumTags = 4;

const std::string& tag_name(Tag t);
Tag parse_tag(const std::string& s);  // throws std::invalid_argument

// Half-open token interval [start, end) identifying one conjunct.
struct ConjunctSpan {
  int start = 0;
  int end = 0;
  friend bool operator==(const ConjunctSpan&, const ConjunctSpan&) = default;
  friend auto operator<=>(const ConjunctSpan&, const ConjunctSpan&) = default;
};

struct LabeledUtterance {
  std::vector<std::string> tokens;
  std::vector<Tag> tags;
  std::string slot_type;
  int conjunct_count = 0;  // number of B-C tags

  friend bool operator==(const LabeledUtterance&, const LabeledUtterance&) = default;
};

struct DatasetSplit {
  std::vector<LabeledUtterance> train;
  std::vector<LabeledUtterance> validation;
  std::vector<LabeledUtterance> test;
};

// Raised when span/position inputs violate the codec preconditions.
class BioValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Span starts become B-C, interiors I-C, cc_positions CC, everything else O.
// Throws BioValidationError naming the offending index on overlap or
// out-of-range input.
std::vector<Tag> encode_bio(const std::vector<ConjunctSpan>& spans,
                            const std::vector<int>& cc_positions, int length);

// Total inverse of encode_bio. Maximal B-C (I-C)* runs become spans; a stray
// I-C opens a new span; CC and O close any open span. Never fails.
std::vector<ConjunctSpan> decode_bio(const std::vector<Tag>& tags);

}  // namespace coordparse
