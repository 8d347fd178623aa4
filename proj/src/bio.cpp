#include "coordparse/bio.hpp"

#include <algorithm>

namespace coordparse {

const std::string& tag_name(Tag t) {
  static const std::string names[kNumTags] = {"O", "B-C", "I-C", "CC"};
  return names[static_cast<int>(t)];
}

Tag parse_tag(const std::string& s) {
  if (s == "O") return Tag::O;
  if (s == "B-C") return Tag::BC;
  if (s == "I-C") return Tag::IC;
  if (s == "CC") return Tag::CC;
  throw std::invalid_argument("unknown tag string: '" + s + "'");
}

std::vector<Tag> encode_bio(const std::vector<ConjunctSpan>& spans,
                            const std::vector<int>& cc_positions, int length) {
  if (length < 1) throw BioValidationError("utterance length must be >= 1");
  std::vector<Tag> tags(length, Tag::O);
  std::vector<bool> covered(length, false);
  for (const auto& s : spans) {
    if (s.start < 0 || s.end > length || s.start >= s.end) {
      throw BioValidationError("span [" + std::to_string(s.start) + ", " +
                               std::to_string(s.end) + ") out of range for length " +
                               std::to_string(length));
    }
    for (int i = s.start; i < s.end; ++i) {
      if (covered[i]) {
        throw BioValidationError("span overlap at index " + std::to_string(i));
      }
      covered[i] = true;
      tags[i] = (i == s.start) ? Tag::BC : Tag::IC;
    }
  }
  for (int p : cc_positions) {
    if (p < 0 || p >= length) {
      throw BioValidationError("cc position " + std::to_string(p) +
                               " out of range for length " + std::to_string(length));
    }
    if (covered[p]) {
      throw BioValidationError("cc position " + std::to_string(p) +
                               " falls inside a span");
    }
    tags[p] = Tag::CC;
  }
  return tags;
}

std::vector<ConjunctSpan> decode_bio(const std::vector<Tag>& tags) {
  std::vector<ConjunctSpan> spans;
  int open = -1;  // start of the currently open span, -1 if none
  for (int t = 0; t < static_cast<int>(tags.size()); ++t) {
    switch (tags[t]) {
      case Tag::BC:
        if (open >= 0) spans.push_back({open, t});
        open = t;
        break;
      case Tag::IC:
        if (open < 0) open = t;  // lenient repair: stray I-C starts a span
        break;
      case Tag::CC:
      case Tag::O:
        if (open >= 0) {
          spans.push_back({open, t});
          open = -1;
        }
        break;
    }
  }
  if (open >= 0) spans.push_back({open, static_cast<int>(tags.size())});
  return spans;
}

}  // namespace coordparse
