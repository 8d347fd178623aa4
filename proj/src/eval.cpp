#include "coordparse/eval.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace coordparse::eval {

void conjunct_prf(const std::vector<ConjunctSpan>& pred, const std::vector<ConjunctSpan>& gold,
                  long& tp, long& fp, long& fn) {
  std::set<ConjunctSpan> gold_set(gold.begin(), gold.end());
  long matched = 0;
  for (const auto& p : pred) {
    if (gold_set.count(p)) ++matched;
  }
  tp = matched;
  fp = static_cast<long>(pred.size()) - matched;
  fn = static_cast<long>(gold.size()) - matched;
}

int exact_match(const std::vector<Tag>& pred, const std::vector<Tag>& gold) {
  if (pred.size() != gold.size()) {
    throw std::invalid_argument("exact_match: length mismatch");
  }
  return pred == gold ? 1 : 0;
}

std::string bucket_key(int gold_conjuncts) {
  if (gold_conjuncts <= 2) return "2";
  if (gold_conjuncts == 3) return "3";
  return "4+";
}

EvalReport evaluate(const std::function<std::vector<Tag>(const std::vector<std::string>&)>& predict,
                    const std::vector<LabeledUtterance>& testset, bool by_slot) {
  EvalReport rep;
  for (const auto& u : testset) {
    std::vector<Tag> pred = predict(u.tokens);
    PrfCounts c;
    conjunct_prf(decode_bio(pred), decode_bio(u.tags), c.tp, c.fp, c.fn);
    c.exact = exact_match(pred, u.tags);
    c.utterances = 1;
    rep.overall.add(c);
    rep.by_bucket[bucket_key(u.conjunct_count)].add(c);
    if (by_slot) rep.by_slot[u.slot_type].add(c);
  }
  return rep;
}

namespace {

void table_row(std::ostringstream& os, const std::string& name, const PrfCounts& c) {
  os << name;
  for (size_t i = name.size(); i < 16; ++i) os << ' ';
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%8.4f %8.4f %8.4f %8.4f %8ld\n", c.precision(), c.recall(),
                c.f1(), c.accuracy(), c.utterances);
  os << buf;
}

nlohmann::json counts_json(const PrfCounts& c) {
  return {{"tp", c.tp},       {"fp", c.fp},
          {"fn", c.fn},       {"precision", c.precision()},
          {"recall", c.recall()}, {"f1", c.f1()},
          {"exact_match", c.accuracy()}, {"utterances", c.utterances}};
}

}  // namespace

std::string format_report(const EvalReport& r, const std::string& format) {
  if (format == "records") {
    std::ostringstream os;
    nlohmann::json j = counts_json(r.overall);
    j["scope"] = "overall";
    os << j.dump() << "\n";
    for (const auto& [k, c] : r.by_bucket) {
      nlohmann::json b = counts_json(c);
      b["scope"] = "conjuncts=" + k;
      os << b.dump() << "\n";
    }
    for (const auto& [k, c] : r.by_slot) {
      nlohmann::json b = counts_json(c);
      b["scope"] = "slot=" + k;
      os << b.dump() << "\n";
    }
    return os.str();
  }
  if (format != "table") {
    throw std::invalid_argument("unknown report format: " + format);
  }
  std::ostringstream os;
  os << "scope                  P        R       F1      Acc    Utts\n";
  table_row(os, "overall", r.overall);
  for (const auto& [k, c] : r.by_bucket) table_row(os, k + " entities", c);
  for (const auto& [k, c] : r.by_slot) table_row(os, k, c);
  return os.str();
}

}  // namespace coordparse::eval
