#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "doctest.h"
#include "iknn_oracle.hpp"
#include "support.hpp"
#include "themetrek/error.hpp"
#include "themetrek/recsys.hpp"

using namespace themetrek;

using test::IknnOracle;

TEST_CASE("biases on a 2x2 instance without regularization") {
  const auto d = test::ratings({{"u", "a", 4}, {"u", "b", 6}, {"v", "a", 8}, {"v", "b", 9}});
  const auto b = fit_bias(d, 0, 0);
  CHECK(b.mu == 6.75);
  CHECK(b.item_bias("a") == doctest::Approx(-0.75));
  CHECK(b.item_bias("b") == doctest::Approx(0.75));
  CHECK(b.user_bias("u") == doctest::Approx(-1.75));
  CHECK(b.user_bias("v") == doctest::Approx(1.75));
  CHECK(b.item_bias("zz") == 0.0);
  CHECK(b.baseline("new", "zz") == 6.75);
}

TEST_CASE("biases vanish for constant ratings and a single rating") {
  const auto c = fit_bias(test::ratings({{"u", "a", 5}, {"v", "a", 5}, {"v", "b", 5}}));
  CHECK(c.mu == 5.0);
  CHECK(c.item_bias("a") == 0.0);
  CHECK(c.user_bias("v") == 0.0);
  const auto one = fit_bias(test::ratings({{"u", "a", 7}}), 0, 0);
  CHECK(one.mu == 7.0);
  CHECK(one.item_bias("a") == 0.0);
  CHECK(one.user_bias("u") == 0.0);
  CHECK_THROWS_AS(fit_bias(RatingsDataset{}), ValidationError);
  CHECK_THROWS_AS(fit_bias(test::ratings({{"u", "a", 7}}), -1, 0), ArgumentError);
}

TEST_CASE("regularized biases shrink toward zero") {
  const auto d = test::ratings({{"u", "a", 10}, {"v", "a", 9}, {"u", "b", 2}});
  const auto b = fit_bias(d, 25, 10);
  const double mu = 7.0;
  CHECK(b.item_bias("a") == doctest::Approx((3.0 + 2.0) / 27.0));
  CHECK(b.item_bias("b") == doctest::Approx((2.0 - mu) / 26.0));
  CHECK(b.user_bias("v") == doctest::Approx((9.0 - mu - 5.0 / 27.0) / 11.0));
}

TEST_CASE("item KNN single neighbor and fallback cases") {
  const auto d = test::ratings({{"u", "a", 9}, {"u", "b", 3}, {"v", "a", 5}, {"v", "c", 6}});
  auto sims = std::make_shared<SimilarityMatrix>(std::vector<std::string>{"a", "b", "c"});
  sims->set("c", "a", 0.4);
  const IknnModel m(d, sims, 5, 0, 0);
  const auto& b = m.bias();
  // u rated a (similar to c) and b (zero similarity to c)
  CHECK(m.predict("u", "c") == doctest::Approx(b.baseline("u", "c") + (9.0 - b.baseline("u", "a"))));
  CHECK(m.predict("u", "b") == doctest::Approx(b.baseline("u", "b")));
  CHECK(m.predict("stranger", "a") == doctest::Approx(std::clamp(b.baseline("stranger", "a"), 1.0, 10.0)));
  CHECK(m.predict("stranger", "nowhere") == doctest::Approx(b.mu));
  CHECK_THROWS_AS(IknnModel(d, sims, 0), ArgumentError);
  CHECK_THROWS_AS(IknnModel(d, nullptr, 3), ArgumentError);
}

TEST_CASE("item KNN on a 3x3 instance matches the oracle for every pair") {
  const auto d = test::ratings(
      {{"u1", "i1", 8}, {"u1", "i2", 6}, {"u2", "i2", 3}, {"u2", "i3", 4}, {"u3", "i1", 9}, {"u3", "i3", 7}});
  auto sims = std::make_shared<SimilarityMatrix>(std::vector<std::string>{"i1", "i2", "i3"});
  sims->set("i1", "i2", 0.7);
  sims->set("i1", "i3", 0.2);
  sims->set("i2", "i3", 0.5);
  IknnOracle o;
  for (const auto& t : d.triples()) o.r[{t.user, t.item}] = t.value;
  o.l1 = 25;
  o.l2 = 10;
  const IknnModel m(d, sims, 2);
  for (const char* u : {"u1", "u2", "u3"}) {
    for (const char* i : {"i1", "i2", "i3"}) CHECK(m.predict(u, i) == doctest::Approx(o.predict(u, i, *sims, 2)).epsilon(1e-12));
  }
}

TEST_CASE("scaling every similarity leaves item KNN predictions unchanged") {
  std::mt19937_64 rng(2);
  std::vector<Rating> r;
  for (int u = 0; u < 6; ++u) {
    for (int i = 0; i < 6; ++i) {
      if (rng() % 2) r.push_back({"u" + std::to_string(u), "i" + std::to_string(i), 1.0 + static_cast<double>(rng() % 10)});
    }
  }
  const auto d = test::ratings(r);
  std::vector<std::string> ids;
  for (int i = 0; i < 6; ++i) ids.push_back("i" + std::to_string(i));
  auto a = std::make_shared<SimilarityMatrix>(ids);
  auto b = std::make_shared<SimilarityMatrix>(ids);
  for (int i = 0; i < 6; ++i) {
    for (int j = i + 1; j < 6; ++j) {
      const double s = static_cast<double>(rng() % 100) / 100.0;
      a->set(i, j, s);
      b->set(i, j, s * 0.25);
    }
  }
  const IknnModel ma(d, a, 3), mb(d, b, 3);
  for (const auto& u : d.users()) {
    for (const auto& i : ids) CHECK(ma.predict(u, i) == doctest::Approx(mb.predict(u, i)).epsilon(1e-12));
  }
}

TEST_CASE("pearson item similarity by hand") {
  const auto d = test::ratings({{"p", "x", 1}, {"q", "x", 2}, {"r", "x", 3}, {"p", "y", 2}, {"q", "y", 4}, {"r", "y", 5}});
  const double pearson = 9.0 / std::sqrt(84.0);
  CHECK(cf_item_similarity(d, 0).score("x", "y") == doctest::Approx(pearson));
  CHECK(cf_item_similarity(d, 10).score("x", "y") == doctest::Approx(pearson * 3.0 / 13.0));
}

TEST_CASE("pearson edge cases: identical, anti-correlated, too few co-ratings, zero variance") {
  const auto same = test::ratings({{"p", "x", 1}, {"q", "x", 4}, {"p", "y", 1}, {"q", "y", 4}});
  CHECK(cf_item_similarity(same, 0).score("x", "y") == doctest::Approx(1.0));
  const auto anti = test::ratings({{"p", "x", 1}, {"q", "x", 4}, {"p", "y", 4}, {"q", "y", 1}});
  CHECK(cf_item_similarity(anti, 0).score("x", "y") == 0.0);
  const auto one = test::ratings({{"p", "x", 1}, {"p", "y", 4}, {"q", "y", 1}});
  CHECK(cf_item_similarity(one, 0).score("x", "y") == 0.0);
  const auto flat = test::ratings({{"p", "x", 3}, {"q", "x", 3}, {"p", "y", 4}, {"q", "y", 1}});
  CHECK(cf_item_similarity(flat, 0).score("x", "y") == 0.0);
  CHECK_THROWS_AS(cf_item_similarity(RatingsDataset{}), ValidationError);
  CHECK_THROWS_AS(pearson_matrix(2, {}, -1.0), ArgumentError);
}

TEST_CASE("slope one on the textbook example") {
  const auto d = test::ratings({{"u", "a", 1}, {"u", "b", 1.5}, {"v", "a", 2}});
  const SlopeOneModel m(d);
  CHECK(m.predict("v", "b") == doctest::Approx(2.5));
  CHECK(m.predict("nobody", "b") == doctest::Approx(d.mean()));
}

TEST_CASE("user KNN matches a direct evaluation with user-user Pearson") {
  std::vector<Rating> r;
  std::mt19937_64 rng(8);
  std::map<std::pair<std::string, std::string>, double> m;
  for (int u = 0; u < 5; ++u) {
    for (int i = 0; i < 5; ++i) {
      if (rng() % 4 == 0) continue;
      const double v = 1.0 + static_cast<double>(rng() % 10);
      r.push_back({"u" + std::to_string(u), "i" + std::to_string(i), v});
      m[{"u" + std::to_string(u), "i" + std::to_string(i)}] = v;
    }
  }
  const auto d = test::ratings(r);
  const double shrink = 2.0;
  const auto pearson = [&](const std::string& a, const std::string& b) {
    std::vector<std::pair<double, double>> co;
    for (const auto& i : d.items()) {
      if (m.contains({a, i}) && m.contains({b, i})) co.emplace_back(m[{a, i}], m[{b, i}]);
    }
    const double n = static_cast<double>(co.size());
    if (co.size() < 2) return 0.0;
    double mx = 0, my = 0;
    for (auto [x, y] : co) mx += x / n, my += y / n;
    double sxy = 0, sxx = 0, syy = 0;
    for (auto [x, y] : co) sxy += (x - mx) * (y - my), sxx += (x - mx) * (x - mx), syy += (y - my) * (y - my);
    if (sxx < 1e-9 || syy < 1e-9) return 0.0;
    return std::max(0.0, sxy / std::sqrt(sxx * syy)) * n / (n + shrink);
  };
  const auto b = fit_bias(d);
  const UserKnnModel model(d, 2, shrink);
  for (const auto& u : d.users()) {
    for (const auto& i : d.items()) {
      std::vector<std::tuple<double, std::string, double>> nb;
      for (const auto& v : d.users()) {
        if (v == u || !m.contains({v, i})) continue;
        const double s = pearson(u, v);
        if (s > 0) nb.emplace_back(-s, v, m[{v, i}] - b.baseline(v, i));
      }
      std::sort(nb.begin(), nb.end());
      if (nb.size() > 2) nb.resize(2);
      double num = 0, den = 0;
      for (const auto& [neg, v, res] : nb) num += -neg * res, den += -neg;
      const double expected = std::clamp(b.baseline(u, i) + (den > 0 ? num / den : 0.0), 1.0, 10.0);
      CHECK(model.predict(u, i) == doctest::Approx(expected).epsilon(1e-9));
    }
  }
}

TEST_CASE("biased MF loss settles and predictions stay in range") {
  std::vector<Rating> r;
  std::mt19937_64 rng(4);
  for (int u = 0; u < 20; ++u) {
    for (int i = 0; i < 15; ++i) {
      if (rng() % 2) r.push_back({"u" + std::to_string(u), "i" + std::to_string(i), 1.0 + static_cast<double>((u + 2 * i) % 10)});
    }
  }
  const auto d = test::ratings(r);
  const BiasedMfModel m(d);
  const auto& loss = m.loss_history();
  REQUIRE(loss.size() == 50);
  for (std::size_t e = 2; e < loss.size(); ++e) CHECK(loss[e] <= loss[e - 1] + 1e-6);
  CHECK(loss.back() < loss.front());
  for (const auto& u : d.users()) {
    for (const auto& i : d.items()) {
      const double p = m.predict(u, i);
      CHECK(p >= 1.0);
      CHECK(p <= 10.0);
    }
  }
  const BiasedMfModel again(d);
  CHECK(again.predict("u3", "i4") == m.predict("u3", "i4"));
  CHECK(m.predict("nobody", "nothing") == doctest::Approx(std::clamp(d.mean(), 1.0, 10.0)));
}

TEST_CASE("trivial baselines") {
  const auto d = test::ratings({{"u", "a", 2}, {"u", "b", 4}, {"v", "a", 9}});
  const double mu = 5.0;
  CHECK(AverageBaseline(d, AverageBaseline::Kind::global).predict("x", "y") == mu);
  CHECK(AverageBaseline(d, AverageBaseline::Kind::item).predict("x", "a") == 5.5);
  CHECK(AverageBaseline(d, AverageBaseline::Kind::item).predict("x", "unrated") == mu);
  CHECK(AverageBaseline(d, AverageBaseline::Kind::user).predict("u", "zz") == 3.0);
  CHECK(UserItemBaseline(d, 0, 0).predict("v", "a") == doctest::Approx(fit_bias(d, 0, 0).baseline("v", "a")));

  const RandomBaseline r1(7), r2(7), r3(8);
  CHECK(r1.predict("u", "a") == r2.predict("u", "a"));
  CHECK(r1.predict("u", "a") != r3.predict("u", "a"));
  double lo = 10, hi = 1;
  for (int k = 0; k < 2000; ++k) {
    const double p = r1.predict("user" + std::to_string(k), "item");
    lo = std::min(lo, p);
    hi = std::max(hi, p);
  }
  CHECK(lo >= 1.0);
  CHECK(hi <= 10.0);
  CHECK(lo < 1.1);
  CHECK(hi > 9.9);
}
