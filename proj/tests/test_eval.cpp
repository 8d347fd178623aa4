#include "doctest.h"

#include "coordparse/corpus.hpp"
#include "coordparse/eval.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

using namespace coordparse;
using json = nlohmann::json;

namespace {

struct FixtureRow {
    LabeledUtterance gold;
    std::vector<Tag> pred;
};

std::vector<FixtureRow> load_fixture() {
    std::ifstream in("tests/fixtures/metrics_fixture.jsonl");
    REQUIRE(in.good());
    std::vector<FixtureRow> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j = json::parse(line);
        FixtureRow r;
        r.gold.slot_type = j["slot_type"];
        for (const auto& t : j["tokens"]) r.gold.tokens.push_back(t);
        for (const auto& t : j["gold"]) {
            r.gold.tags.push_back(parse_tag(t));
            if (r.gold.tags.back() == Tag::BC) ++r.gold.conjunct_count;
        }
        for (const auto& t : j["pred"]) r.pred.push_back(parse_tag(t));
        rows.push_back(std::move(r));
    }
    REQUIRE(rows.size() == 10);
    return rows;
}

void check_counts(const eval::PrfCounts& c, const json& e) {
    CHECK(c.tp == e["tp"].get<long>());
    CHECK(c.fp == e["fp"].get<long>());
    CHECK(c.fn == e["fn"].get<long>());
    CHECK(c.exact == e["exact"].get<long>());
    CHECK(c.utterances == e["utterances"].get<long>());
}

}  // namespace

TEST_CASE("metrics fixture reproduces hand-computed counts and ratios") {
    auto rows = load_fixture();
    std::ifstream ein("tests/fixtures/metrics_expected.json");
    REQUIRE(ein.good());
    json expected = json::parse(ein);

    size_t next = 0;
    auto predict = [&](const std::vector<std::string>&) { return rows[next++].pred; };
    std::vector<LabeledUtterance> testset;
    for (const auto& r : rows) testset.push_back(r.gold);
    eval::EvalReport rep = eval::evaluate(predict, testset, /*by_slot=*/true);

    check_counts(rep.overall, expected["overall"]);
    CHECK(rep.overall.precision() == doctest::Approx(expected["overall"]["precision"].get<double>()).epsilon(1e-12));
    CHECK(rep.overall.recall() == doctest::Approx(expected["overall"]["recall"].get<double>()).epsilon(1e-12));
    CHECK(rep.overall.f1() == doctest::Approx(expected["overall"]["f1"].get<double>()).epsilon(1e-12));
    CHECK(rep.overall.accuracy() == doctest::Approx(expected["overall"]["exact_match"].get<double>()).epsilon(1e-12));

    REQUIRE(rep.by_bucket.size() == 3);
    for (auto& [key, e] : expected["by_bucket"].items()) {
        REQUIRE(rep.by_bucket.count(key) == 1);
        check_counts(rep.by_bucket[key], e);
    }
    REQUIRE(rep.by_slot.size() == 3);
    for (auto& [key, e] : expected["by_slot"].items()) {
        REQUIRE(rep.by_slot.count(key) == 1);
        check_counts(rep.by_slot[key], e);
    }
}

TEST_CASE("span matching is exact boundary") {
    long tp, fp, fn;
    eval::conjunct_prf({{1, 3}}, {{1, 4}}, tp, fp, fn);
    CHECK(tp == 0);
    CHECK(fp == 1);
    CHECK(fn == 1);
    eval::conjunct_prf({{1, 3}, {5, 6}}, {{5, 6}, {1, 3}}, tp, fp, fn);
    CHECK(tp == 2);
    CHECK(fp == 0);
    CHECK(fn == 0);
}

TEST_CASE("precision is zero when nothing is predicted") {
    eval::PrfCounts c;
    c.fn = 4;
    CHECK(c.precision() == 0.0);
    CHECK(c.recall() == 0.0);
    CHECK(c.f1() == 0.0);
}

TEST_CASE("exact match zeroes on any mislabeled token") {
    std::vector<Tag> g = {Tag::O, Tag::BC, Tag::CC, Tag::BC};
    CHECK(eval::exact_match(g, g) == 1);
    std::vector<Tag> p = g;
    p[2] = Tag::O;  // spans still decode identically
    CHECK(decode_bio(p) == decode_bio(g));
    CHECK(eval::exact_match(p, g) == 0);
    CHECK_THROWS(eval::exact_match({Tag::O}, g));
}

TEST_CASE("bucket keys") {
    CHECK(eval::bucket_key(2) == "2");
    CHECK(eval::bucket_key(3) == "3");
    CHECK(eval::bucket_key(4) == "4+");
    CHECK(eval::bucket_key(5) == "4+");
}

TEST_CASE("report formats render every section") {
    auto rows = load_fixture();
    size_t next = 0;
    auto predict = [&](const std::vector<std::string>&) { return rows[next++].pred; };
    std::vector<LabeledUtterance> testset;
    for (const auto& r : rows) testset.push_back(r.gold);
    eval::EvalReport rep = eval::evaluate(predict, testset, true);

    std::string table = eval::format_report(rep, "table");
    CHECK(table.find("overall") != std::string::npos);
    CHECK(table.find("4+") != std::string::npos);

    std::string records = eval::format_report(rep, "records");
    size_t n = 0;
    std::istringstream rs(records);
    std::string line;
    while (std::getline(rs, line))
        if (!line.empty()) {
            json j = json::parse(line);  // every record is valid JSON
            CHECK(j.contains("f1"));
            CHECK(j.contains("scope"));
            ++n;
        }
    CHECK(n == 7);  // overall + 3 buckets + 3 slots
    CHECK_THROWS_AS(eval::format_report(rep, "xml"), std::invalid_argument);
}
