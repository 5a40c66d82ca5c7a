#include "doctest.h"

#include <algorithm>
#include <filesystem>

#include "medie/standoff.hpp"
#include "medie/text.hpp"
#include "medie/validator.hpp"
#include "oracles.hpp"

using namespace medie;

namespace {

const Scheme& S() { return builtin_scheme(); }
Entity ent(const char* type, int s, int e) { return {S().entity_id(type), s, e}; }

std::vector<ViolationKind> kinds(const AnnotationSet& a, std::size_t T = 100) {
  std::vector<ViolationKind> out;
  for (const auto& v : validate(a, T, S())) out.push_back(v.kind);
  return out;
}

}  // namespace

TEST_SUITE("validator") {

TEST_CASE("respiratory fixture is clean") {
  const auto dir = std::filesystem::path(MEDIE_TEST_DATA) / "respiratory";
  const Corpus c = read_corpus(dir, S());
  REQUIRE(c.entries.size() == 1);
  const auto& a = c.entries[0].gold;
  CHECK(a.entities.size() == 11);
  CHECK(a.relations.size() == 5);
  CHECK(a.attributes.size() == 6);
  CHECK(validate(a, c.entries[0].doc.length(), S()).empty());
}

TEST_CASE("Negation on a Test Result is an applicability violation") {
  AnnotationSet a;
  const auto tr = ent("Test Result", 3, 7);
  a.entities.insert(tr);
  a.attributes.insert({S().attribute_id("Negation"), tr});
  CHECK(kinds(a) == std::vector{ViolationKind::AttributeApplicability});
}

TEST_CASE("overlapping entities") {
  AnnotationSet a;
  a.entities = {ent("Drug", 2, 6), ent("Drug Dose", 4, 8)};
  CHECK(kinds(a) == std::vector{ViolationKind::Overlap});
  a.entities = {ent("Drug", 2, 6), ent("Drug Dose", 6, 8)};
  CHECK(kinds(a).empty());
  a.entities = {ent("Drug", 2, 6), ent("Drug Dose", 2, 6)};  // same span, two types
  CHECK(kinds(a) == std::vector{ViolationKind::Overlap});
}

TEST_CASE("span out of range") {
  AnnotationSet a;
  a.entities = {ent("Drug", 8, 12)};
  CHECK(kinds(a, 10) == std::vector{ViolationKind::SpanOutOfRange});
  a.entities = {ent("Drug", 3, 3)};
  CHECK(kinds(a, 10) == std::vector{ViolationKind::SpanOutOfRange});
  a.entities = {ent("Drug", -1, 2)};
  CHECK(kinds(a, 10) == std::vector{ViolationKind::SpanOutOfRange});
  a.entities = {ent("Drug", 8, 10)};
  CHECK(kinds(a, 10).empty());
}

TEST_CASE("relation type checks") {
  const auto dos = ent("Disease or Syndrome", 0, 2);
  const auto tp = ent("Test Process", 3, 5);
  const auto dept = ent("Department", 6, 8);
  AnnotationSet a;
  a.entities = {dos, tp, dept};
  SUBCASE("allowed") {
    a.relations = {{S().relation_id("Status–Require–Information"), dos, tp, ""}};
    CHECK(kinds(a).empty());
  }
  SUBCASE("bad head") {
    a.relations = {{S().relation_id("Status–Require–Information"), dept, tp, ""}};
    CHECK(kinds(a) == std::vector{ViolationKind::RelationHeadType});
  }
  SUBCASE("bad tail") {
    a.relations = {{S().relation_id("Status–Require–Information"), dos, dept, ""}};
    CHECK(kinds(a) == std::vector{ViolationKind::RelationTailType});
  }
  SUBCASE("reversed direction") {
    a.relations = {{S().relation_id("Status–Require–Information"), tp, dos, ""}};
    CHECK(kinds(a) == std::vector{ViolationKind::RelationHeadType, ViolationKind::RelationTailType});
  }
  SUBCASE("self relation") {
    a.relations = {{S().relation_id("Status–Cause–Information"), dos, dos, ""}};
    CHECK(kinds(a) == std::vector{ViolationKind::SelfRelation});
  }
}

TEST_CASE("dangling references") {
  const auto dos = ent("Disease or Syndrome", 0, 2);
  const auto ghost = ent("Self-Reported Abnormality", 10, 12);
  AnnotationSet a;
  a.entities = {dos};
  a.relations = {{S().relation_id("Status–Cause–Information"), dos, ghost, ""}};
  CHECK(kinds(a) == std::vector{ViolationKind::DanglingReference});
  a.relations.clear();
  a.attributes = {{S().attribute_id("Negation"), ghost}};
  CHECK(kinds(a) == std::vector{ViolationKind::DanglingReference});
}

TEST_CASE("is_candidate_pair") {
  const auto permit = S().relation_id("Information–Permit–Intervention");
  CHECK(is_candidate_pair(ent("Test Process", 0, 2), ent("Treatment", 3, 5), permit, S()));
  const auto dis = ent("Disease or Syndrome", 3, 5);
  for (std::size_t r = 0; r < S().num_relation_types(); ++r) {
    CHECK_FALSE(is_candidate_pair(ent("Department", 0, 2), dis, RelationTypeId(r), S()));
  }
  const auto x = ent("Disease or Syndrome", 0, 2);
  CHECK_FALSE(is_candidate_pair(x, x, S().relation_id("Status–Cause–Information"), S()));
}

TEST_CASE("random valid sets are clean and single injections are detected") {
  Rng rng(99);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t T = 10 + rng.below(60);
    AnnotationSet a = oracle::random_valid_set(rng, T, S());
    REQUIRE(validate(a, T, S()).empty());
    if (a.entities.empty()) continue;
    const std::vector<Entity> ents(a.entities.begin(), a.entities.end());
    const Entity e = rng.pick(ents);
    AnnotationSet bad = a;
    ViolationKind expect{};
    switch (rng.below(3)) {
      case 0:  // self relation with a type that admits the pair
        if (S().allowed_relations(e.type, e.type).empty()) continue;
        bad.relations.insert({S().allowed_relations(e.type, e.type)[0], e, e, ""});
        expect = ViolationKind::SelfRelation;
        break;
      case 1: {  // attribute that does not apply
        std::vector<AttributeTypeId> no;
        for (std::size_t k = 0; k < S().num_attribute_types(); ++k) {
          if (!S().attribute_applies(AttributeTypeId(k), e.type)) no.emplace_back(k);
        }
        if (no.empty()) continue;
        bad.attributes.insert({rng.pick(no), e});
        expect = ViolationKind::AttributeApplicability;
        break;
      }
      default:
        bad.entities.insert({e.type, e.start, static_cast<std::int32_t>(T + 1)});
        bad.entities.erase(e);
        bad.relations.clear();
        bad.attributes.clear();
        expect = ViolationKind::SpanOutOfRange;
        // the stretched span may also overlap its neighbours
        break;
    }
    const auto got = validate(bad, T, S());
    CHECK(std::count_if(got.begin(), got.end(), [&](const Violation& v) { return v.kind == expect; }) == 1);
    if (expect != ViolationKind::SpanOutOfRange) CHECK(got.size() == 1);
  }
}

TEST_CASE("output does not depend on insertion order") {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    AnnotationSet a = oracle::random_valid_set(rng, 40, S());
    std::vector<Entity> ents(a.entities.begin(), a.entities.end());
    rng.shuffle(ents);
    AnnotationSet b;
    for (const auto& e : ents) b.entities.insert(e);
    b.relations = a.relations;
    b.attributes = a.attributes;
    b.entities.insert(ent("Drug", 0, 40));  // overlaps everything
    a.entities.insert(ent("Drug", 0, 40));
    const auto va = validate(a, 40, S()), vb = validate(b, 40, S());
    REQUIRE(va.size() == vb.size());
    for (std::size_t i = 0; i < va.size(); ++i) CHECK(va[i].message == vb[i].message);
  }
}

}
