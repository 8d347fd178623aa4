#include "coordparse/treepattern.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace coordparse::treepattern {

namespace {

// ---- s-expression parsing -------------------------------------------------

struct Cursor {
  const std::string& s;
  size_t i = 0;
  void skip_ws() {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  }
  bool done() {
    skip_ws();
    return i >= s.size();
  }
};

std::string read_atom(Cursor& c) {
  c.skip_ws();
  size_t start = c.i;
  while (c.i < c.s.size() && !std::isspace(static_cast<unsigned char>(c.s[c.i])) &&
         c.s[c.i] != '(' && c.s[c.i] != ')') {
    ++c.i;
  }
  if (c.i == start) throw TreeParseError("expected atom at offset " + std::to_string(c.i));
  return c.s.substr(start, c.i - start);
}

std::unique_ptr<TreeNode> parse_node(Cursor& c) {
  c.skip_ws();
  if (c.i >= c.s.size() || c.s[c.i] != '(') {
    throw TreeParseError("expected '(' at offset " + std::to_string(c.i));
  }
  ++c.i;
  auto node = std::make_unique<TreeNode>();
  node->label = read_atom(c);
  c.skip_ws();
  while (c.i < c.s.size() && c.s[c.i] != ')') {
    if (c.s[c.i] == '(') {
      node->children.push_back(parse_node(c));
    } else {
      if (!node->word.empty() || !node->children.empty()) {
        throw TreeParseError("mixed word and children under " + node->label);
      }
      node->word = read_atom(c);
    }
    c.skip_ws();
  }
  if (c.i >= c.s.size()) throw TreeParseError("unbalanced brackets: missing ')'");
  ++c.i;  // ')'
  return node;
}

void collect_leaves(TreeNode* n, std::vector<std::string>& tokens) {
  if (n->is_leaf()) {
    n->span_start = static_cast<int>(tokens.size());
    tokens.push_back(n->word);
    n->span_end = n->span_start + 1;
    return;
  }
  n->span_start = static_cast<int>(tokens.size());
  for (auto& ch : n->children) collect_leaves(ch.get(), tokens);
  n->span_end = static_cast<int>(tokens.size());
}

void find_cc_leaves(TreeNode* n, TreeNode* parent, std::vector<std::pair<TreeNode*, TreeNode*>>& out) {
  if (n->label == "CC" && n->is_leaf()) {
    out.emplace_back(n, parent);
    return;
  }
  for (auto& ch : n->children) find_cc_leaves(ch.get(), n, out);
}

bool find_path(TreeNode* cur, TreeNode* target, std::vector<TreeNode*>& path) {
  path.push_back(cur);
  if (cur == target) return true;
  for (auto& ch : cur->children) {
    if (find_path(ch.get(), target, path)) return true;
  }
  path.pop_back();
  return false;
}

void skeleton_string(const PatternNode* n, std::ostringstream& os, bool mark_slots) {
  os << '(' << n->label;
  if (n->conjunct_slot && mark_slots) os << '*';
  if (n->is_cc) os << ' ' << n->cc_word;
  for (const auto& ch : n->children) {
    os << ' ';
    skeleton_string(ch.get(), os, mark_slots);
  }
  os << ')';
}

// A pattern node matches a tree node when labels agree; an elided (childless,
// non-CC) pattern node matches any subtree with that label; a CC pattern node
// requires the exact conjunction leaf; otherwise children match pairwise.
bool match_node(const PatternNode* p, const TreeNode* t) {
  if (p->label != t->label) return false;
  if (p->is_cc) return t->is_leaf() && t->word == p->cc_word;
  if (p->children.empty()) return true;  // elided or slot
  if (p->children.size() != t->children.size()) return false;
  for (size_t i = 0; i < p->children.size(); ++i) {
    if (!match_node(p->children[i].get(), t->children[i].get())) return false;
  }
  return true;
}

void collect_slot_spans(const PatternNode* p, const TreeNode* t, std::vector<ConjunctSpan>& out) {
  if (p->conjunct_slot) {
    out.push_back({t->span_start, t->span_end});
  }
  for (size_t i = 0; i < p->children.size(); ++i) {
    collect_slot_spans(p->children[i].get(), t->children[i].get(), out);
  }
}

const TreeNode* find_match(const PatternNode* p, const TreeNode* t) {
  if (match_node(p, t)) return t;
  for (const auto& ch : t->children) {
    if (const TreeNode* m = find_match(p, ch.get())) return m;
  }
  return nullptr;
}

// ---- pattern file parsing -------------------------------------------------

std::unique_ptr<PatternNode> parse_pattern_node(Cursor& c) {
  c.skip_ws();
  if (c.i >= c.s.size() || c.s[c.i] != '(') {
    throw TreeParseError("pattern: expected '(' at offset " + std::to_string(c.i));
  }
  ++c.i;
  auto node = std::make_unique<PatternNode>();
  node->label = read_atom(c);
  if (!node->label.empty() && node->label.back() == '*') {
    node->label.pop_back();
    node->conjunct_slot = true;
  }
  c.skip_ws();
  while (c.i < c.s.size() && c.s[c.i] != ')') {
    if (c.s[c.i] == '(') {
      node->children.push_back(parse_pattern_node(c));
    } else {
      node->is_cc = true;
      node->cc_word = read_atom(c);
    }
    c.skip_ws();
  }
  if (c.i >= c.s.size()) throw TreeParseError("pattern: unbalanced brackets");
  ++c.i;
  return node;
}

}  // namespace

ConstituencyTree parse_tree(const std::string& line) {
  Cursor c{line};
  ConstituencyTree tree;
  tree.root = parse_node(c);
  if (!c.done()) throw TreeParseError("trailing content after tree");
  collect_leaves(tree.root.get(), tree.tokens);
  if (tree.tokens.empty()) throw TreeParseError("tree has no leaves");
  return tree;
}

std::vector<ConstituencyTree> read_trees(const std::string& path, std::vector<std::string>* errors) {
  std::ifstream in(path);
  if (!in) throw TreeParseError("cannot open tree file: " + path);
  std::vector<ConstituencyTree> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      out.push_back(parse_tree(line));
    } catch (const TreeParseError& e) {
      const std::string msg = "line " + std::to_string(lineno) + ": " + e.what();
      if (errors) {
        errors->push_back(msg);
      } else {
        throw TreeParseError(msg);
      }
    }
  }
  return out;
}

std::string TreePattern::skeleton() const {
  std::ostringstream os;
  skeleton_string(root.get(), os, /*mark_slots=*/true);
  return os.str();
}

std::string TreePattern::display_skeleton() const {
  std::ostringstream os;
  skeleton_string(root.get(), os, /*mark_slots=*/false);
  return os.str();
}

std::optional<TreePattern> extract_pattern(const ConstituencyTree& tree,
                                           const std::vector<ConjunctSpan>& gold_spans) {
  std::vector<std::pair<TreeNode*, TreeNode*>> ccs;
  find_cc_leaves(tree.root.get(), nullptr, ccs);
  if (ccs.size() != 1 || ccs[0].second == nullptr) return std::nullopt;
  TreeNode* cc = ccs[0].first;
  TreeNode* parent = ccs[0].second;

  // each gold span must equal the leaf span of a direct sibling of CC
  std::vector<const TreeNode*> slot_nodes;
  for (const auto& g : gold_spans) {
    const TreeNode* hit = nullptr;
    for (const auto& ch : parent->children) {
      if (ch.get() != cc && ch->span_start == g.start && ch->span_end == g.end) {
        hit = ch.get();
        break;
      }
    }
    if (!hit) return std::nullopt;
    slot_nodes.push_back(hit);
  }
  if (slot_nodes.size() < 2) return std::nullopt;

  std::vector<TreeNode*> path;
  find_path(tree.root.get(), parent, path);

  // build the skeleton along the path; off-path children become label-only
  // nodes, except under CC's parent where CC and the slot siblings are marked
  std::function<std::unique_ptr<PatternNode>(TreeNode*, size_t)> build =
      [&](TreeNode* node, size_t depth) -> std::unique_ptr<PatternNode> {
    auto p = std::make_unique<PatternNode>();
    p->label = node->label;
    if (node == parent) {
      for (auto& ch : node->children) {
        auto cp = std::make_unique<PatternNode>();
        cp->label = ch->label;
        if (ch.get() == cc) {
          cp->is_cc = true;
          cp->cc_word = cc->word;
        } else if (std::find(slot_nodes.begin(), slot_nodes.end(), ch.get()) != slot_nodes.end()) {
          cp->conjunct_slot = true;
        }
        p->children.push_back(std::move(cp));
      }
      return p;
    }
    TreeNode* next = path[depth + 1];
    for (auto& ch : node->children) {
      if (ch.get() == next) {
        p->children.push_back(build(ch.get(), depth + 1));
      } else {
        auto cp = std::make_unique<PatternNode>();
        cp->label = ch->label;
        p->children.push_back(std::move(cp));
      }
    }
    return p;
  };

  TreePattern pat;
  pat.root = build(path[0], 0);
  pat.support = 1;
  return pat;
}

std::vector<TreePattern> mine_patterns(
    const std::vector<std::pair<const ConstituencyTree*, std::vector<ConjunctSpan>>>& training) {
  std::map<std::string, TreePattern> by_skeleton;
  for (const auto& [tree, gold] : training) {
    auto pat = extract_pattern(*tree, gold);
    if (!pat) continue;
    const std::string key = pat->skeleton();
    auto it = by_skeleton.find(key);
    if (it == by_skeleton.end()) {
      by_skeleton.emplace(key, std::move(*pat));
    } else {
      ++it->second.support;
    }
  }
  std::vector<TreePattern> out;
  for (auto& [key, pat] : by_skeleton) {
    if (pat.support >= 2) out.push_back(std::move(pat));
  }
  std::sort(out.begin(), out.end(), [](const TreePattern& a, const TreePattern& b) {
    if (a.support != b.support) return a.support > b.support;
    return a.skeleton() < b.skeleton();
  });
  return out;
}

std::vector<ConjunctSpan> match_and_extract(const ConstituencyTree& tree,
                                            const std::vector<TreePattern>& patterns) {
  for (const auto& pat : patterns) {
    if (const TreeNode* m = find_match(pat.root.get(), tree.root.get())) {
      std::vector<ConjunctSpan> spans;
      collect_slot_spans(pat.root.get(), m, spans);
      std::sort(spans.begin(), spans.end());
      return spans;
    }
  }
  return {};
}

void write_patterns(const std::string& path, const std::vector<TreePattern>& patterns) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write patterns: " + path);
  for (const auto& p : patterns) out << p.support << '\t' << p.skeleton() << '\n';
}

std::vector<TreePattern> read_patterns(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open patterns: " + path);
  std::vector<TreePattern> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw TreeParseError("pattern line missing support field");
    TreePattern p;
    p.support = std::stol(line.substr(0, tab));
    const std::string sk = line.substr(tab + 1);
    Cursor c{sk};
    p.root = parse_pattern_node(c);
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace coordparse::treepattern
