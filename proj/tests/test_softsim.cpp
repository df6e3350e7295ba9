#include <cmath>
#include <random>

#include "doctest.h"
#include "support.hpp"
#include "themetrek/error.hpp"
#include "themetrek/setsim.hpp"
#include "themetrek/softsim.hpp"

using namespace themetrek;

namespace {

std::shared_ptr<const EntitySimilarityTable> table(std::size_t n, std::function<double(EntityId, EntityId)> fn) {
  return std::make_shared<const EntitySimilarityTable>(EntitySimilarityTable::from_function(n, fn));
}

// Random symmetric similarities in [0, 0.95].
std::shared_ptr<const EntitySimilarityTable> random_table(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 0.95);
  std::vector<double> s(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) s[i * n + j] = s[j * n + i] = u(rng);
  }
  return table(n, [s, n](EntityId a, EntityId b) { return s[a * n + b]; });
}

std::vector<EntityId> random_set(std::mt19937_64& rng, std::size_t n) {
  std::vector<EntityId> out;
  for (EntityId e = 0; e < n; ++e) {
    if (rng() % 3 == 0) out.push_back(e);
  }
  if (out.empty()) out.push_back(static_cast<EntityId>(rng() % n));
  return out;
}

// Straight-line reference: cardinality of {t, u} with S(t,u)=s, of {v, w}
// with S(v,w)=r, cross similarities c_tv, c_tw, c_uv, c_uw.
struct TwoByTwo {
  double s, r, c_tv, c_tw, c_uv, c_uw, p;
  double card_a() const { return 2.0 / (1.0 + std::pow(s, p)); }
  double card_b() const { return 2.0 / (1.0 + std::pow(r, p)); }
  double card_union() const {
    const double t = 1 + std::pow(s, p) + std::pow(c_tv, p) + std::pow(c_tw, p);
    const double u = std::pow(s, p) + 1 + std::pow(c_uv, p) + std::pow(c_uw, p);
    const double v = std::pow(c_tv, p) + std::pow(c_uv, p) + 1 + std::pow(r, p);
    const double w = std::pow(c_tw, p) + std::pow(c_uw, p) + std::pow(r, p) + 1;
    return 1 / t + 1 / u + 1 / v + 1 / w;
  }
  double cosine() const {
    const double inter = std::max(0.0, card_a() + card_b() - card_union());
    return std::min(1.0, inter / std::sqrt(card_a() * card_b()));
  }
};

}  // namespace

TEST_CASE("soft cardinality of singletons and pairs") {
  const auto t = table(3, [](EntityId a, EntityId b) { return (a + b == 1) ? 0.5 : 0.0; });
  const SoftCosineScorer sc(t, 1.0);
  CHECK(sc.cardinality(std::vector<EntityId>{2}) == 1.0);
  CHECK(sc.cardinality(std::vector<EntityId>{0, 1}) == doctest::Approx(4.0 / 3.0));
  CHECK(sc.cardinality(std::vector<EntityId>{0, 2}) == 2.0);
  CHECK(sc.cardinality(std::vector<EntityId>{}) == 0.0);
  CHECK_THROWS_AS(sc.cardinality(std::vector<EntityId>{7}), NotFoundError);
  CHECK_THROWS_AS(SoftCosineScorer(t, 0.0), ArgumentError);
  CHECK_THROWS_AS(SoftCosineScorer(t, -1.0), ArgumentError);
  CHECK_THROWS_AS(SoftCosineScorer(nullptr, 1.0), ArgumentError);
}

TEST_CASE("table forces the diagonal and clamps the rest below one") {
  const auto t = table(3, [](EntityId, EntityId) { return 5.0; });
  CHECK(t->at(1, 1) == 1.0);
  CHECK(t->at(0, 2) == kMaxOffDiagonal);
  const auto n = table(2, [](EntityId, EntityId) { return -0.5; });
  CHECK(n->at(0, 1) == 0.0);
}

TEST_CASE("two-by-two sets against the straight-line reference") {
  for (double p : {0.5, 1.0, 2.0, 4.0}) {
    const TwoByTwo ref{0.5, 0.25, 0.3, 0.0, 0.1, 0.6, p};
    // entities t=0 u=1 v=2 w=3
    const double m[4][4] = {{1, ref.s, ref.c_tv, ref.c_tw},
                            {ref.s, 1, ref.c_uv, ref.c_uw},
                            {ref.c_tv, ref.c_uv, 1, ref.r},
                            {ref.c_tw, ref.c_uw, ref.r, 1}};
    const SoftCosineScorer sc(table(4, [&](EntityId a, EntityId b) { return m[a][b]; }), p);
    const std::vector<EntityId> a{0, 1}, b{2, 3};
    CHECK(sc.cardinality(a) == doctest::Approx(ref.card_a()).epsilon(1e-12));
    CHECK(sc.cardinality(b) == doctest::Approx(ref.card_b()).epsilon(1e-12));
    CHECK(sc.intersection(a, b) == doctest::Approx(ref.card_a() + ref.card_b() - ref.card_union()).epsilon(1e-12));
    CHECK(sc.cosine(a, b) == doctest::Approx(ref.cosine()).epsilon(1e-12));
  }
}

TEST_CASE("the union trick is capped at the smaller soft cardinality") {
  // z is close to both x and y, which are unrelated: the raw trick gives
  // 3 - 2/1.9 - 1/2.8 = 1.590..., more than |{z}| = 1.
  const auto t = table(3, [](EntityId a, EntityId b) { return a + b == 1 ? 0.0 : 0.9; });
  const SoftCosineScorer sc(t, 1.0);
  const std::vector<EntityId> a{0, 1}, b{2};
  CHECK(sc.cardinality(a) == 2.0);
  CHECK(sc.cardinality(b) == 1.0);
  CHECK(3.0 - 2.0 / 1.9 - 1.0 / 2.8 > 1.5);
  CHECK(sc.intersection(a, b) == 1.0);
  CHECK(sc.cosine(a, b) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("identical and fully dissimilar sets") {
  const auto t = random_table(6, 3);
  const SoftCosineScorer sc(t, 2.0);
  const std::vector<EntityId> a{0, 2, 5};
  CHECK(sc.cosine(a, a) == doctest::Approx(1.0));
  CHECK(sc.intersection(a, a) == doctest::Approx(sc.cardinality(a)));
  const SoftCosineScorer crisp(table(4, [](EntityId, EntityId) { return 0.0; }), 1.0);
  CHECK(crisp.cosine(std::vector<EntityId>{0, 1}, std::vector<EntityId>{2, 3}) == 0.0);
  CHECK(crisp.intersection(std::vector<EntityId>{0, 1}, std::vector<EntityId>{2, 3}) == 0.0);
  CHECK(sc.cosine(std::vector<EntityId>{}, a) == 0.0);
}

TEST_CASE("soft intersection is positive for crisp-disjoint related themes") {
  const Ontology o = Ontology::from_edges({{"root", ""},
                                           {"event", "root"},
                                           {"journey", "event"},
                                           {"time travel", "journey"},
                                           {"ceremony", "event"},
                                           {"wedding ceremony", "ceremony"}});
  const std::vector<std::string> i{"ceremony", "journey"}, j{"time travel", "wedding ceremony"};
  CHECK(intersection_size(i, j) == 0);
  const SoftSimConfig cfg{EntityMeasure::path, 1.0, LevelFilter::both};
  CHECK(soft_intersection(i, j, o, nullptr, cfg) > 0.0);
  CHECK(soft_cosine(i, j, o, nullptr, cfg) > 0.0);
  CHECK(soft_cardinality(i, o, nullptr, cfg) == doctest::Approx(2.0 / (1.0 + 1.0 / 3.0)));
  CHECK_THROWS_AS(soft_cardinality(std::vector<std::string>{"nope"}, o, nullptr, cfg), NotFoundError);
}

TEST_CASE("bounds, monotonicity in p, symmetry and the intersection cap on random sets") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 3 + rng() % 8;
    const auto t = random_table(n, rng());
    const auto a = random_set(rng, n), b = random_set(rng, n);
    double previous = 0.0;
    for (double p : {0.25, 0.5, 1.0, 2.0, 4.0, 8.0}) {
      const SoftCosineScorer sc(t, p);
      const double ca = sc.cardinality(a);
      CHECK(ca >= 1.0 - 1e-12);
      CHECK(ca <= static_cast<double>(a.size()) + 1e-12);
      CHECK(ca >= previous - 1e-12);
      previous = ca;
      CHECK(std::abs(sc.cosine(a, b) - sc.cosine(b, a)) < 1e-12);
      CHECK(sc.intersection(a, b) <= std::min(ca, sc.cardinality(b)) + 1e-9);
      const double c = sc.cosine(a, b);
      CHECK(c >= 0.0);
      CHECK(c <= 1.0);
    }
  }
}

TEST_CASE("annotated entities map themes to a dense local index") {
  const Ontology o = load_ontology(test::toy_dir() / "ontology.tsv");
  const auto ann = load_annotations(test::toy_dir() / "annotations.tsv");
  const AnnotatedEntities ae(ann, o);
  CHECK(ae.item_ids().size() == 8);
  CHECK(ae.entities().size() < o.size());
  CHECK(std::is_sorted(ae.entities().begin(), ae.entities().end()));
  for (std::size_t i = 0; i < ae.item_ids().size(); ++i) {
    CHECK(ae.set(i, LevelFilter::both).size() == ann.themes(ae.item_ids()[i], LevelFilter::both).size());
    for (EntityId local : ae.set(i, LevelFilter::central)) CHECK(local < ae.entities().size());
  }
  CHECK_THROWS_AS(AnnotatedEntities(test::annotations({{"x", {{"nope", ThemeLevel::central}}}}), o), NotFoundError);
}

TEST_CASE("restricted and full entity tables give the same item matrix") {
  const Ontology o = load_ontology(test::toy_dir() / "ontology.tsv");
  const auto ann = load_annotations(test::toy_dir() / "annotations.tsv");
  const auto ic = compute_ic(o, ann, 1.0);
  for (EntityMeasure m : {EntityMeasure::path, EntityMeasure::lch, EntityMeasure::res}) {
    for (LevelFilter f : {LevelFilter::central, LevelFilter::both}) {
      const SoftSimConfig cfg{m, 2.0, f};
      const auto restricted = build_ontology_similarity(ann, o, &ic, cfg);
      const SoftCosineScorer full(
          std::make_shared<const EntitySimilarityTable>(EntitySimilarityTable::build(o, &ic, m)), 2.0);
      const auto reference = build_ontology_similarity(ann, o, full, f);
      for (std::size_t i = 0; i < reference.size(); ++i) {
        for (std::size_t j = 0; j < reference.size(); ++j) {
          CHECK(restricted.score(i, j) == doctest::Approx(reference.score(i, j)).epsilon(1e-12));
        }
      }
    }
  }
}

TEST_CASE("items without themes at the chosen level score zero") {
  const Ontology o = load_ontology(test::toy_dir() / "ontology.tsv");
  const auto ann = test::annotations({{"a", {{"greed", ThemeLevel::central}}},
                                      {"b", {{"fear", ThemeLevel::peripheral}}},
                                      {"c", {{"greed", ThemeLevel::central}}}});
  const auto m = build_ontology_similarity(ann, o, nullptr, {EntityMeasure::path, 1.0, LevelFilter::central});
  CHECK(m.score("a", "b") == 0.0);
  CHECK(m.score("a", "c") == doctest::Approx(1.0));
}
