#pragma once
// Warm and item-cold-start splits, RMSE, repeated paired experiments and
// their reports.

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "themetrek/corpus_io.hpp"
#include "themetrek/recsys.hpp"
#include "themetrek/stats.hpp"

namespace themetrek {

enum class Scenario { warm, cold };

std::string_view to_string(Scenario s);
/// "warm" or "cold"; ParseError otherwise.
Scenario parse_scenario(std::string_view token);

struct Split {
  RatingsDataset train;
  RatingsDataset test;
  Scenario scenario = Scenario::warm;
  std::uint64_t seed = 0;
  double test_fraction = 0.0;  // achieved |test| / N
};

/// Uniform partition of the ratings; |test| = round(f N) clamped to [1, N-1].
Split warm_split(const RatingsDataset& data, double test_fraction, std::uint64_t seed);

/// Items in random order go to the test side until the test side holds at
/// least target N ratings; at least one item always stays in training.
Split cold_split(const RatingsDataset& data, double target_fraction, std::uint64_t seed);

/// sqrt of the mean squared (predicted - actual); ArgumentError when empty.
double rmse(std::span<const std::pair<double, double>> predicted_actual);

/// RMSE of a fitted predictor over every test triple.
double evaluate(const Predictor& model, const RatingsDataset& test);

using PredictorFactory = std::function<std::unique_ptr<Predictor>(const RatingsDataset& train)>;

struct MethodSpec {
  std::string name;
  PredictorFactory fit;
};

struct ExperimentConfig {
  Scenario scenario = Scenario::warm;
  std::size_t repeats = 30;
  std::uint64_t master_seed = 1;
  double test_fraction = 0.3;
  bool signed_rank = false;  // also run the paired signed-rank test
};

struct MethodResult {
  std::string name;
  std::vector<double> rmse;  // per repeat; NaN where the method failed
  std::vector<std::string> errors;
  bool complete = true;
  double mean = 0.0;  // over successful repeats
  double sd = 0.0;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<MethodResult> methods;
  std::vector<double> achieved_fraction;  // per repeat
  // [a][b]; NaN when either method is incomplete
  std::vector<std::vector<double>> rank_sum_p;
  std::vector<std::vector<double>> signed_rank_p;
};

/// Repeat r splits with seed master_seed + r; every method sees the same
/// split within a repeat. ArgumentError when repeats < 2 or no methods.
ExperimentReport run_experiment(const RatingsDataset& data, const std::vector<MethodSpec>& methods,
                                const ExperimentConfig& cfg);

/// `method scenario repeat rmse`, one row per (method, repeat).
std::string report_tsv(const ExperimentReport& r);
/// `method mean_rmse sd p_<m>...` (and `p_signed_<m>...` when enabled).
std::string summary_tsv(const ExperimentReport& r);
/// Methods by ascending mean RMSE; '*' marks p < 0.01 against a comparator,
/// '=' the method itself.
std::string summary_table(const ExperimentReport& r);

}  // namespace themetrek
