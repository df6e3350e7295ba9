#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "support.hpp"
#include "themetrek/error.hpp"
#include "themetrek/eval.hpp"

using namespace themetrek;

namespace {

RatingsDataset synthetic(std::size_t users, std::size_t items, double density, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<Rating> out;
  for (std::size_t a = 0; a < users; ++a) {
    for (std::size_t i = 0; i < items; ++i) {
      if (u(rng) > density) continue;
      const double v = std::clamp(std::round(5.5 + 2.0 * std::sin(double(a)) + 1.5 * std::cos(double(i)) + 2 * (u(rng) - 0.5)), 1.0, 10.0);
      out.push_back({"u" + std::to_string(a), "i" + std::to_string(i), v});
    }
  }
  return RatingsDataset::from_triples(std::move(out));
}

std::multiset<std::tuple<std::string, std::string, double>> bag(const RatingsDataset& d) {
  std::multiset<std::tuple<std::string, std::string, double>> s;
  for (const Rating& r : d.triples()) s.emplace(r.user, r.item, r.value);
  return s;
}

class Constant : public Predictor {
 public:
  explicit Constant(double v) : v_(v) {}
  double predict(const std::string&, const std::string&) const override { return v_; }

 private:
  double v_;
};

}  // namespace

TEST_CASE("warm split sizes, disjointness and coverage") {
  const auto data = synthetic(20, 15, 0.5, 3);
  for (double f : {0.1, 0.3, 0.5, 0.9}) {
    const Split s = warm_split(data, f, 11);
    const auto expected = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::llround(f * static_cast<double>(data.size()))), 1, data.size() - 1);
    CHECK(s.test.size() == expected);
    CHECK(s.train.size() + s.test.size() == data.size());
    auto all = bag(s.train);
    for (const auto& t : bag(s.test)) all.insert(t);
    CHECK(all == bag(data));
    std::set<std::pair<std::string, std::string>> train_pairs;
    for (const Rating& r : s.train.triples()) train_pairs.emplace(r.user, r.item);
    for (const Rating& r : s.test.triples()) CHECK_FALSE(train_pairs.contains({r.user, r.item}));
    CHECK(s.test_fraction == doctest::Approx(double(expected) / double(data.size())));
  }
  const auto tiny = test::ratings({{"a", "x", 1}, {"a", "y", 2}});
  CHECK(warm_split(tiny, 0.01, 1).test.size() == 1);
  CHECK(warm_split(tiny, 0.99, 1).test.size() == 1);
  CHECK_THROWS_AS(warm_split(data, 0.0, 1), ArgumentError);
  CHECK_THROWS_AS(warm_split(data, 1.0, 1), ArgumentError);
}

TEST_CASE("splits are a pure function of the seed") {
  const auto data = synthetic(15, 12, 0.6, 8);
  CHECK(bag(warm_split(data, 0.3, 5).test) == bag(warm_split(data, 0.3, 5).test));
  CHECK(bag(warm_split(data, 0.3, 5).test) != bag(warm_split(data, 0.3, 6).test));
  CHECK(bag(cold_split(data, 0.3, 5).test) == bag(cold_split(data, 0.3, 5).test));
}

TEST_CASE("cold split keeps test items out of training") {
  const auto data = synthetic(25, 20, 0.4, 4);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Split s = cold_split(data, 0.3, seed);
    CHECK(s.scenario == Scenario::cold);
    CHECK(s.train.size() + s.test.size() == data.size());
    for (const auto& item : s.test.items()) CHECK_FALSE(s.train.has_item(item));
    for (const auto& item : s.test.items()) CHECK(s.test.by_item(item).size() == data.by_item(item).size());
    CHECK(s.test.size() >= static_cast<std::size_t>(std::ceil(0.3 * double(data.size()))));
    CHECK_FALSE(s.train.items().empty());
  }
  CHECK_THROWS_AS(cold_split(test::ratings({{"a", "x", 1}, {"b", "x", 2}}), 0.5, 1), ArgumentError);
}

TEST_CASE("rmse and evaluate") {
  const std::vector<std::pair<double, double>> pa{{1, 2}, {3, 3}, {5, 2}};
  CHECK(rmse(pa) == doctest::Approx(std::sqrt(10.0 / 3.0)));
  CHECK_THROWS_AS(rmse(std::vector<std::pair<double, double>>{}), ArgumentError);
  const auto test_set = test::ratings({{"a", "x", 4}, {"b", "x", 6}});
  CHECK(evaluate(Constant(5), test_set) == doctest::Approx(1.0));
}

TEST_CASE("experiments pair methods on shared splits and report failures") {
  const auto data = synthetic(20, 15, 0.5, 9);
  std::vector<MethodSpec> methods;
  methods.push_back({"baseline", [](const RatingsDataset& t) { return std::make_unique<UserItemBaseline>(t); }});
  methods.push_back({"global", [](const RatingsDataset& t) {
                       return std::make_unique<AverageBaseline>(t, AverageBaseline::Kind::global);
                     }});
  int calls = 0;
  methods.push_back({"flaky", [&calls](const RatingsDataset&) -> std::unique_ptr<Predictor> {
                       if (calls++ == 1) throw ValidationError("boom");
                       return std::make_unique<Constant>(5);
                     }});
  ExperimentConfig cfg;
  cfg.repeats = 4;
  cfg.master_seed = 100;
  cfg.signed_rank = true;
  const auto rep = run_experiment(data, methods, cfg);

  REQUIRE(rep.methods.size() == 3);
  CHECK(rep.achieved_fraction.size() == 4);
  for (std::size_t r = 0; r < 4; ++r) {
    const Split s = warm_split(data, 0.3, 100 + r);
    CHECK(rep.methods[0].rmse[r] == doctest::Approx(evaluate(UserItemBaseline(s.train), s.test)).epsilon(1e-12));
  }
  CHECK(rep.methods[0].complete);
  CHECK_FALSE(rep.methods[2].complete);
  CHECK(std::isnan(rep.methods[2].rmse[1]));
  CHECK(rep.methods[2].errors.size() == 1);
  CHECK(std::isnan(rep.rank_sum_p[0][2]));
  CHECK(std::isfinite(rep.rank_sum_p[0][1]));
  CHECK(rep.rank_sum_p[0][1] == doctest::Approx(wilcoxon_rank_sum(rep.methods[0].rmse, rep.methods[1].rmse).p_value));
  CHECK(rep.signed_rank_p[0][1] ==
        doctest::Approx(wilcoxon_signed_rank(rep.methods[0].rmse, rep.methods[1].rmse).p_value));
  CHECK(rep.methods[0].mean == doctest::Approx(mean(rep.methods[0].rmse)));

  const std::string report = report_tsv(rep);
  CHECK(report.rfind("method\tscenario\trepeat\trmse\n", 0) == 0);
  CHECK(std::count(report.begin(), report.end(), '\n') == 1 + 3 * 4);
  CHECK(report.find("flaky\twarm\t1\tNA\n") != std::string::npos);

  const std::string summary = summary_tsv(rep);
  CHECK(summary.rfind("method\tmean_rmse\tsd\tp_baseline\tp_global\tp_flaky\tp_signed_baseline", 0) == 0);
  const std::string table = summary_table(rep);
  CHECK(table.find("incomplete: 1 failed repeats") != std::string::npos);
  CHECK(table.find('=') != std::string::npos);

  CHECK_THROWS_AS(run_experiment(data, {}, cfg), ArgumentError);
  cfg.repeats = 1;
  CHECK_THROWS_AS(run_experiment(data, methods, cfg), ArgumentError);
}

TEST_CASE("summary table marks significant differences") {
  const auto data = synthetic(30, 20, 0.5, 12);
  std::vector<MethodSpec> methods;
  methods.push_back({"baseline", [](const RatingsDataset& t) { return std::make_unique<UserItemBaseline>(t); }});
  methods.push_back({"random", [](const RatingsDataset&) { return std::make_unique<RandomBaseline>(1); }});
  ExperimentConfig cfg;
  cfg.repeats = 10;
  const auto rep = run_experiment(data, methods, cfg);
  CHECK(rep.rank_sum_p[0][1] < kSignificanceLevel);
  std::istringstream lines(summary_table(rep));
  std::string header, columns, first;
  std::getline(lines, header);
  std::getline(lines, columns);
  std::getline(lines, first);
  CHECK(header == "warm scenario, 10 repeats, seed 1");
  CHECK(first.find("baseline") != std::string::npos);
  CHECK(first.find('*') != std::string::npos);
}

TEST_CASE("scenario names") {
  CHECK(parse_scenario("cold") == Scenario::cold);
  CHECK(to_string(Scenario::warm) == "warm");
  CHECK_THROWS_AS(parse_scenario("hot"), ParseError);
}
