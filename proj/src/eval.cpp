#include "themetrek/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

#include "themetrek/error.hpp"
#include "themetrek/rng.hpp"

namespace themetrek {

std::string_view to_string(Scenario s) { return s == Scenario::warm ? "warm" : "cold"; }

Scenario parse_scenario(std::string_view token) {
  if (token == "warm") return Scenario::warm;
  if (token == "cold") return Scenario::cold;
  throw ParseError("unknown scenario '" + std::string(token) + "' (expected warm or cold)");
}

namespace {
Split make_split(const RatingsDataset& data, std::vector<std::size_t> test_pos, Scenario scenario,
                 std::uint64_t seed) {
  std::sort(test_pos.begin(), test_pos.end());
  std::vector<std::size_t> train_pos;
  train_pos.reserve(data.size() - test_pos.size());
  std::size_t t = 0;
  for (std::size_t p = 0; p < data.size(); ++p) {
    if (t < test_pos.size() && test_pos[t] == p) {
      ++t;
    } else {
      train_pos.push_back(p);
    }
  }
  Split s;
  s.train = data.subset(train_pos);
  s.test = data.subset(test_pos);
  s.scenario = scenario;
  s.seed = seed;
  s.test_fraction = static_cast<double>(test_pos.size()) / static_cast<double>(data.size());
  return s;
}
}  // namespace

Split warm_split(const RatingsDataset& data, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw ArgumentError("test fraction must lie in (0, 1)");
  if (data.size() < 2) throw ArgumentError("warm split needs at least two ratings");
  const std::size_t n = data.size();
  auto m = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
  m = std::clamp<std::size_t>(m, 1, n - 1);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  shuffle(std::span<std::size_t>(order), rng);
  order.resize(m);
  return make_split(data, std::move(order), Scenario::warm, seed);
}

Split cold_split(const RatingsDataset& data, double target_fraction, std::uint64_t seed) {
  if (!(target_fraction > 0.0 && target_fraction < 1.0)) throw ArgumentError("target fraction must lie in (0, 1)");
  std::vector<std::string> items = data.items();
  if (items.size() < 2) throw ArgumentError("cold split needs at least two distinct items");
  Rng rng(seed);
  shuffle(std::span<std::string>(items), rng);
  const double target = target_fraction * static_cast<double>(data.size());
  std::vector<std::size_t> test_pos;
  for (std::size_t k = 0; k + 1 < items.size(); ++k) {
    if (static_cast<double>(test_pos.size()) >= target) break;
    const auto pos = data.by_item(items[k]);
    test_pos.insert(test_pos.end(), pos.begin(), pos.end());
  }
  return make_split(data, std::move(test_pos), Scenario::cold, seed);
}

double rmse(std::span<const std::pair<double, double>> predicted_actual) {
  if (predicted_actual.empty()) throw ArgumentError("RMSE of an empty prediction list");
  double ss = 0.0;
  for (const auto& [p, a] : predicted_actual) ss += (p - a) * (p - a);
  return std::sqrt(ss / static_cast<double>(predicted_actual.size()));
}

double evaluate(const Predictor& model, const RatingsDataset& test) {
  std::vector<std::pair<double, double>> pa;
  pa.reserve(test.size());
  for (const Rating& r : test.triples()) pa.emplace_back(model.predict(r.user, r.item), r.value);
  return rmse(pa);
}

ExperimentReport run_experiment(const RatingsDataset& data, const std::vector<MethodSpec>& methods,
                                const ExperimentConfig& cfg) {
  if (cfg.repeats < 2) throw ArgumentError("an experiment needs at least two repeats");
  if (methods.empty()) throw ArgumentError("an experiment needs at least one method");
  ExperimentReport rep;
  rep.config = cfg;
  for (const auto& m : methods) rep.methods.push_back({m.name, {}, {}, true, 0.0, 0.0});

  for (std::size_t r = 0; r < cfg.repeats; ++r) {
    const std::uint64_t seed = cfg.master_seed + r;
    const Split split = cfg.scenario == Scenario::warm ? warm_split(data, cfg.test_fraction, seed)
                                                       : cold_split(data, cfg.test_fraction, seed);
    rep.achieved_fraction.push_back(split.test_fraction);
    for (std::size_t m = 0; m < methods.size(); ++m) {
      MethodResult& res = rep.methods[m];
      try {
        const auto model = methods[m].fit(split.train);
        res.rmse.push_back(evaluate(*model, split.test));
      } catch (const std::exception& e) {
        res.rmse.push_back(std::numeric_limits<double>::quiet_NaN());
        res.errors.push_back("repeat " + std::to_string(r) + ": " + e.what());
        res.complete = false;
      }
    }
  }

  for (MethodResult& res : rep.methods) {
    std::vector<double> ok;
    for (double v : res.rmse) {
      if (!std::isnan(v)) ok.push_back(v);
    }
    res.mean = ok.empty() ? std::numeric_limits<double>::quiet_NaN() : mean(ok);
    res.sd = sample_sd(ok);
  }

  const std::size_t n = rep.methods.size();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  rep.rank_sum_p.assign(n, std::vector<double>(n, nan));
  if (cfg.signed_rank) rep.signed_rank_p.assign(n, std::vector<double>(n, nan));
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      if (!rep.methods[a].complete || !rep.methods[b].complete) continue;
      rep.rank_sum_p[a][b] = wilcoxon_rank_sum(rep.methods[a].rmse, rep.methods[b].rmse).p_value;
      if (cfg.signed_rank) {
        rep.signed_rank_p[a][b] = wilcoxon_signed_rank(rep.methods[a].rmse, rep.methods[b].rmse).p_value;
      }
    }
  }
  return rep;
}

namespace {
std::string num(double v) { return std::isnan(v) ? "NA" : format_real(v); }
}  // namespace

std::string report_tsv(const ExperimentReport& r) {
  std::ostringstream out;
  out << "method\tscenario\trepeat\trmse\n";
  for (const auto& m : r.methods) {
    for (std::size_t k = 0; k < m.rmse.size(); ++k) {
      out << m.name << '\t' << to_string(r.config.scenario) << '\t' << k << '\t' << num(m.rmse[k]) << '\n';
    }
  }
  return out.str();
}

std::string summary_tsv(const ExperimentReport& r) {
  std::ostringstream out;
  out << "method\tmean_rmse\tsd";
  for (const auto& m : r.methods) out << "\tp_" << m.name;
  if (!r.signed_rank_p.empty()) {
    for (const auto& m : r.methods) out << "\tp_signed_" << m.name;
  }
  out << '\n';
  for (std::size_t a = 0; a < r.methods.size(); ++a) {
    out << r.methods[a].name << '\t' << num(r.methods[a].mean) << '\t' << num(r.methods[a].sd);
    for (std::size_t b = 0; b < r.methods.size(); ++b) out << '\t' << num(r.rank_sum_p[a][b]);
    if (!r.signed_rank_p.empty()) {
      for (std::size_t b = 0; b < r.methods.size(); ++b) out << '\t' << num(r.signed_rank_p[a][b]);
    }
    out << '\n';
  }
  return out.str();
}

std::string summary_table(const ExperimentReport& r) {
  const std::size_t n = r.methods.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double ma = r.methods[a].mean, mb = r.methods[b].mean;
    if (std::isnan(ma) != std::isnan(mb)) return std::isnan(mb);
    return ma < mb;
  });
  std::size_t width = 6;
  for (const auto& m : r.methods) width = std::max(width, m.name.size());

  std::ostringstream out;
  out << to_string(r.config.scenario) << " scenario, " << r.config.repeats << " repeats, seed "
      << r.config.master_seed << "\n";
  out << std::left << std::setw(4) << "#" << std::setw(static_cast<int>(width) + 2) << "method"
      << std::setw(18) << "rmse";
  for (std::size_t c = 0; c < n; ++c) out << std::setw(3) << (c + 1);
  out << '\n';
  for (std::size_t row = 0; row < n; ++row) {
    const MethodResult& m = r.methods[order[row]];
    std::ostringstream cell;
    if (std::isnan(m.mean)) {
      cell << "failed";
    } else {
      cell << std::fixed << std::setprecision(3) << m.mean << " +- " << m.sd;
    }
    out << std::left << std::setw(4) << (row + 1) << std::setw(static_cast<int>(width) + 2) << m.name
        << std::setw(18) << cell.str();
    for (std::size_t c = 0; c < n; ++c) {
      const double p = r.rank_sum_p[order[row]][order[c]];
      const char* mark = c == row ? "=" : (!std::isnan(p) && p < kSignificanceLevel ? "*" : " ");
      out << std::setw(3) << mark;
    }
    if (!m.complete) out << "  (incomplete: " << m.errors.size() << " failed repeats)";
    out << '\n';
  }
  return out.str();
}

}  // namespace themetrek
