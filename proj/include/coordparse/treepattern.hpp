#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "coordparse/bio.hpp"

namespace coordparse::treepattern {

// Labeled ordered tree. Leaves carry tokens; leaf order defines token
// positions (filled in by index_leaves).
struct TreeNode {
  std::string label;
  std::string word;  // non-empty iff this is a leaf
  std::vector<std::unique_ptr<TreeNode>> children;
  int span_start = -1;  // leaf range [span_start, span_end), set by index_leaves
  int span_end = -1;

  bool is_leaf() const { return children.empty() && !word.empty(); }
};

struct ConstituencyTree {
  std::unique_ptr<TreeNode> root;
  std::vector<std::string> tokens;  // leaf sequence
};

class TreeParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Parses one bracketed S-expression, e.g. "(S (VP (VB delete) ...))".
ConstituencyTree parse_tree(const std::string& line);

// One tree per line. With `errors` non-null, ill-bracketed lines are recorded
// as "line N: <msg>" and the remaining lines still parse; otherwise the first
// bad line throws TreeParseError naming the line.
std::vector<ConstituencyTree> read_trees(const std::string& path,
                                         std::vector<std::string>* errors = nullptr);

// Tree skeleton around one CC node. Elided subtrees are label-only nodes;
// the designated conjunct-bearing siblings of CC are marked slots.
struct PatternNode {
  std::string label;
  bool conjunct_slot = false;
  bool is_cc = false;
  std::string cc_word;  // conjunction surface form, kept in the pattern
  std::vector<std::unique_ptr<PatternNode>> children;  // empty => elided
};

struct TreePattern {
  std::unique_ptr<PatternNode> root;
  long support = 1;

  std::string skeleton() const;          // canonical form, slots marked with '*'
  std::string display_skeleton() const;  // without slot markers
};

// Minimally connected skeleton: the chain from the root down to CC's parent,
// with off-chain subtrees elided to label-only nodes, CC kept with its word,
// and the direct siblings of CC whose leaf spans equal gold conjuncts marked
// as slots. Returns nullopt (extraction failure) when the tree has no unique
// CC leaf or the gold spans do not align to direct siblings of CC.
std::optional<TreePattern> extract_pattern(const ConstituencyTree& tree,
                                           const std::vector<ConjunctSpan>& gold_spans);

// Deduplicates extracted patterns by skeleton, counts support, prunes
// support < 2, and orders by descending support then lexicographic skeleton.
std::vector<TreePattern> mine_patterns(
    const std::vector<std::pair<const ConstituencyTree*, std::vector<ConjunctSpan>>>& training);

// First matching pattern (in the mined priority order) yields the leaf ranges
// of its slot nodes; no match => empty list.
std::vector<ConjunctSpan> match_and_extract(const ConstituencyTree& tree,
                                            const std::vector<TreePattern>& patterns);

// Pattern file round trip: "support<TAB>skeleton" lines.
void write_patterns(const std::string& path, const std::vector<TreePattern>& patterns);
std::vector<TreePattern> read_patterns(const std::string& path);

}  // namespace coordparse::treepattern
