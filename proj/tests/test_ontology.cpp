#include <cmath>

#include "doctest.h"
#include "support.hpp"
#include "themetrek/error.hpp"
#include "themetrek/ontology.hpp"

using namespace themetrek;

namespace {

// root -> A -> {A1 -> A1a, A2}; root -> B -> B1
Ontology small_tree() {
  return Ontology::from_edges(
      {{"root", ""}, {"A", "root"}, {"B", "root"}, {"A1", "A"}, {"A2", "A"}, {"B1", "B"}, {"A1a", "A1"}});
}

ThemeAnnotationSet small_annotations() {
  return test::annotations({{"i1", {{"A1a", ThemeLevel::central}, {"A2", ThemeLevel::peripheral}}},
                            {"i2", {{"A1a", ThemeLevel::central}, {"B1", ThemeLevel::central}}}});
}

}  // namespace

TEST_CASE("structure of a small tree") {
  const Ontology o = small_tree();
  CHECK(o.size() == 7);
  CHECK(o.name(o.root()) == "root");
  CHECK(o.depth(o.id("A1a")) == 3);
  CHECK(o.max_depth() == 3);
  CHECK(o.max_path_length() == 5);
  CHECK(o.name(o.lcs(o.id("A1a"), o.id("A2"))) == "A");
  CHECK(o.name(o.lcs(o.id("A1a"), o.id("B1"))) == "root");
  CHECK(o.lcs(o.id("A1"), o.id("A1a")) == o.id("A1"));
  CHECK(o.path_length(o.id("A1a"), o.id("A2")) == 3);
  CHECK(o.path_length(o.id("B1"), o.id("B1")) == 0);
  CHECK(o.parent(o.root()) == o.root());
  CHECK(o.children(o.id("A")).size() == 2);
  CHECK_FALSE(o.find("missing").has_value());
  CHECK_THROWS_AS(o.id("missing"), NotFoundError);
}

TEST_CASE("bottom-up order puts children before parents") {
  const Ontology o = small_tree();
  std::vector<std::size_t> pos(o.size());
  const auto& order = o.bottom_up_order();
  for (std::size_t i = 0; i < order.size(); ++i) pos[order[i]] = i;
  for (EntityId e = 0; e < o.size(); ++e) {
    if (e != o.root()) CHECK(pos[e] < pos[o.parent(e)]);
  }
}

TEST_CASE("malformed trees are rejected") {
  CHECK_THROWS_AS(Ontology::from_edges({{"a", "b"}, {"b", "a"}, {"r", ""}}), ValidationError);
  CHECK_THROWS_AS(Ontology::from_edges({{"a", ""}, {"b", ""}}), ValidationError);
  CHECK_THROWS_AS(Ontology::from_edges({{"a", "b"}, {"b", "a"}}), ValidationError);
  CHECK_THROWS_AS(Ontology::from_edges({{"r", ""}, {"a", "ghost"}}), ValidationError);
  CHECK_THROWS_AS(Ontology::from_edges({{"r", ""}, {"a", "r"}, {"a", "r"}}), ValidationError);
  CHECK_THROWS_AS(Ontology::from_edges({}), ValidationError);
  CHECK_THROWS_AS(Ontology::from_edges({{"r", ""}, {"a", "a"}}), ValidationError);
}

TEST_CASE("loader accepts the toy file and reports problems by kind") {
  const Ontology o = load_ontology(test::toy_dir() / "ontology.tsv");
  CHECK(o.size() == 20);
  CHECK(o.max_depth() == 3);
  CHECK(o.max_path_length() == 6);
  test::ScratchDir dir("onto");
  CHECK_THROWS_AS(load_ontology(dir / "none.tsv"), IoError);
  test::write_file(dir / "bad.tsv", "theme\tparent\na\tb\tc\n");
  CHECK_THROWS_AS(load_ontology(dir / "bad.tsv"), ParseError);
  test::write_file(dir / "root.tsv", "r\na\tr\n");
  CHECK(load_ontology(dir / "root.tsv").size() == 2);
}

TEST_CASE("information content with add-one smoothing") {
  const Ontology o = small_tree();
  const auto ic = compute_ic(o, small_annotations(), 1.0);
  // own counts 1 + occurrences: A1a 3, A2 2, B1 2, the rest 1; then propagated
  CHECK(ic.count[o.id("A1a")] == 3.0);
  CHECK(ic.count[o.id("A1")] == 4.0);
  CHECK(ic.count[o.id("A")] == 7.0);
  CHECK(ic.count[o.id("B")] == 3.0);
  CHECK(ic.total == 11.0);
  CHECK(ic.ic[o.root()] == 0.0);
  CHECK(ic.ic[o.id("A1a")] == doctest::Approx(std::log(11.0 / 3.0)));
  CHECK(ic.ic[o.id("A")] == doctest::Approx(std::log(11.0 / 7.0)));
}

TEST_CASE("information content without smoothing leaves unseen entities infinite") {
  const Ontology o = small_tree();
  const auto ic = compute_ic(o, small_annotations(), 0.0);
  CHECK(ic.total == 4.0);
  CHECK(std::isinf(ic.ic[o.id("A1")]) == false);
  CHECK(ic.ic[o.id("A1")] == doctest::Approx(std::log(2.0)));
  CHECK(std::isinf(ic.ic[o.id("B")]) == false);
  const auto empty = compute_ic(o, test::annotations({{"i", {{"A2", ThemeLevel::central}}}}), 0.0);
  CHECK(std::isinf(empty.ic[o.id("B1")]));
  CHECK_THROWS_AS(compute_ic(o, ThemeAnnotationSet{}, 0.0), ValidationError);
  CHECK_THROWS_AS(compute_ic(o, small_annotations(), -1.0), ArgumentError);
  CHECK_THROWS_AS(compute_ic(o, test::annotations({{"i", {{"nope", ThemeLevel::central}}}}), 1.0), NotFoundError);
}

TEST_CASE("ic table serializes to json with null for infinity") {
  const Ontology o = small_tree();
  const auto ic = compute_ic(o, test::annotations({{"i", {{"A2", ThemeLevel::central}}}}), 0.0);
  const std::string j = ic_to_json(o, ic);
  CHECK(j.find("\"theme\": \"B1\"") != std::string::npos);
  CHECK(j.find("null") != std::string::npos);
}

TEST_CASE("entity measures on hand-computed pairs") {
  const Ontology o = small_tree();
  const auto ic = compute_ic(o, small_annotations(), 1.0);
  const auto sim = [&](EntityMeasure m, const char* a, const char* b) { return entity_similarity(o, &ic, m, a, b); };
  const double ic_a = std::log(11.0 / 7.0), ic_x = std::log(11.0 / 3.0), ic_y = std::log(11.0 / 2.0);

  CHECK(sim(EntityMeasure::path, "A1a", "A2") == doctest::Approx(0.25));
  CHECK(sim(EntityMeasure::path, "A2", "A2") == 1.0);
  CHECK(sim(EntityMeasure::wup, "A1a", "A2") == doctest::Approx(0.4));
  CHECK(sim(EntityMeasure::wup, "A1a", "B1") == 0.0);
  CHECK(sim(EntityMeasure::lch, "A1a", "A2") == doctest::Approx(-std::log(4.0 / 6.0) / 3.0));
  CHECK(sim(EntityMeasure::lch, "A2", "A2") == doctest::Approx(std::log(6.0) / 3.0));
  CHECK(sim(EntityMeasure::lch, "A1a", "B1") == doctest::Approx(-std::log(6.0 / 6.0) / 3.0));
  CHECK(sim(EntityMeasure::res, "A1a", "A2") == doctest::Approx(ic_a / 10.0));
  CHECK(sim(EntityMeasure::res, "A1a", "B1") == 0.0);
  CHECK(sim(EntityMeasure::lin, "A1a", "A2") == doctest::Approx(2.0 * ic_a / (ic_x + ic_y)));
  CHECK(sim(EntityMeasure::lin, "A1a", "A1a") == 1.0);
  CHECK(sim(EntityMeasure::jcn, "A1a", "A2") == doctest::Approx(1.0 / (2.0 * (ic_x + ic_y - 2.0 * ic_a))));
  CHECK(sim(EntityMeasure::jcn, "B1", "B1") == 1.0);
  CHECK_THROWS_AS(entity_similarity(o, nullptr, EntityMeasure::lin, "A1a", "A2"), ArgumentError);
  CHECK(entity_similarity(o, nullptr, EntityMeasure::path, "A1a", "A2") == doctest::Approx(0.25));
}

TEST_CASE("root-only ontology degenerates without dividing by zero") {
  const Ontology o = Ontology::from_edges({{"r", ""}});
  CHECK(entity_similarity(o, nullptr, EntityMeasure::wup, o.root(), o.root()) == 1.0);
  CHECK(entity_similarity(o, nullptr, EntityMeasure::lch, o.root(), o.root()) == 1.0);
}

TEST_CASE("measure names round-trip") {
  for (EntityMeasure m : {EntityMeasure::path, EntityMeasure::wup, EntityMeasure::lch, EntityMeasure::lin,
                          EntityMeasure::res, EntityMeasure::jcn}) {
    CHECK(parse_entity_measure(to_string(m)) == m);
  }
  CHECK_FALSE(parse_entity_measure("hso").has_value());
  CHECK(needs_ic(EntityMeasure::res));
  CHECK_FALSE(needs_ic(EntityMeasure::lch));
}
