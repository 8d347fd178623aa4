#include "coordparse/corpus.hpp"

#include <cstdio>
#include <filesystem>

#include "doctest.h"

using namespace coordparse;

TEST_CASE("corpus line round trip") {
  LabeledUtterance u;
  u.tokens = {"add", "peanut", "butter", "and", "jelly", "to", "my", "list"};
  u.tags = {Tag::O, Tag::BC, Tag::IC, Tag::CC, Tag::BC, Tag::O, Tag::O, Tag::O};
  u.slot_type = "ListItem";
  u.conjunct_count = 2;

  LabeledUtterance back = from_corpus_line(to_corpus_line(u));
  CHECK(back == u);
  CHECK(back.conjunct_count == 2);
}

TEST_CASE("corpus parse rejects malformed records") {
  CHECK_THROWS(from_corpus_line(R"({"tokens":["a","b"],"tags":["O"],"slot_type":"X"})"));
  CHECK_THROWS(from_corpus_line(R"({"tokens":["a"],"tags":["B-Q"],"slot_type":"X"})"));
  CHECK_THROWS(from_corpus_line(R"({"tokens":[],"tags":[],"slot_type":"X"})"));
}

TEST_CASE("corpus file io reports line numbers") {
  const auto dir = std::filesystem::temp_directory_path() / "coordparse_corpus_test";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "c.jsonl").string();
  {
    FILE* f = std::fopen(path.c_str(), "w");
    std::fputs(R"({"tokens":["hi"],"tags":["O"],"slot_type":"A"})", f);
    std::fputs("\nnot json\n", f);
    std::fclose(f);
  }
  CHECK_THROWS_WITH_AS(read_corpus(path), doctest::Contains(":2:"), std::runtime_error);
  std::filesystem::remove_all(dir);
}
