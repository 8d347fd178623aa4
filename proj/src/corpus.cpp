#include "coordparse/corpus.hpp"

#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace coordparse {

using nlohmann::json;

std::string to_corpus_line(const LabeledUtterance& u) {
  json j;
  j["tokens"] = u.tokens;
  std::vector<std::string> tags;
  tags.reserve(u.tags.size());
  for (Tag t : u.tags) tags.push_back(tag_name(t));
  j["tags"] = tags;
  j["slot_type"] = u.slot_type;
  return j.dump();
}

LabeledUtterance from_corpus_line(const std::string& line) {
  json j = json::parse(line);
  LabeledUtterance u;
  u.tokens = j.at("tokens").get<std::vector<std::string>>();
  for (const auto& s : j.at("tags")) u.tags.push_back(parse_tag(s.get<std::string>()));
  u.slot_type = j.at("slot_type").get<std::string>();
  if (u.tokens.empty() || u.tokens.size() != u.tags.size()) {
    throw std::invalid_argument("corpus record: tokens/tags length mismatch");
  }
  for (Tag t : u.tags) {
    if (t == Tag::BC) ++u.conjunct_count;
  }
  return u;
}

std::vector<LabeledUtterance> read_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open corpus file: " + path);
  std::vector<LabeledUtterance> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(from_corpus_line(line));
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void write_corpus(const std::string& path, const std::vector<LabeledUtterance>& data) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  for (const auto& u : data) out << to_corpus_line(u) << "\n";
}

}  // namespace coordparse
