#include <algorithm>
#include <cmath>

#include "themetrek/error.hpp"
#include "themetrek/recsys.hpp"

namespace themetrek {

std::vector<double> pearson_matrix(std::size_t n_rows,
                                   const std::vector<std::vector<std::pair<std::uint32_t, double>>>& groups,
                                   double shrinkage) {
  if (!(shrinkage >= 0.0)) throw ArgumentError("shrinkage must be >= 0");
  // Per ordered pair (a < b): n, Σx, Σy, Σx², Σy², Σxy, x from a and y from b.
  struct Acc {
    double n = 0, sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  };
  std::vector<Acc> acc(n_rows * n_rows);
  for (const auto& g : groups) {
    for (std::size_t p = 0; p < g.size(); ++p) {
      for (std::size_t q = 0; q < g.size(); ++q) {
        const auto [a, x] = g[p];
        const auto [b, y] = g[q];
        if (a >= b) continue;
        Acc& s = acc[static_cast<std::size_t>(a) * n_rows + b];
        s.n += 1;
        s.sx += x;
        s.sy += y;
        s.sxx += x * x;
        s.syy += y * y;
        s.sxy += x * y;
      }
    }
  }
  std::vector<double> out(n_rows * n_rows, 0.0);
  for (std::size_t a = 0; a < n_rows; ++a) {
    out[a * n_rows + a] = 1.0;
    for (std::size_t b = a + 1; b < n_rows; ++b) {
      const Acc& s = acc[a * n_rows + b];
      if (s.n < 2) continue;
      const double cov = s.sxy - s.sx * s.sy / s.n;
      const double vx = s.sxx - s.sx * s.sx / s.n;
      const double vy = s.syy - s.sy * s.sy / s.n;
      // relative guard: cancellation leaves round-off in place of zero variance
      if (vx <= 1e-12 * std::max(1.0, s.sxx) || vy <= 1e-12 * std::max(1.0, s.syy)) continue;
      double r = cov / std::sqrt(vx * vy);
      r = std::clamp(r, 0.0, 1.0) * (s.n / (s.n + shrinkage));
      out[a * n_rows + b] = r;
      out[b * n_rows + a] = r;
    }
  }
  return out;
}

SimilarityMatrix cf_item_similarity(const RatingsDataset& train, double shrinkage) {
  if (train.empty()) throw ValidationError("cannot compute item correlations on an empty training set");
  const auto& items = train.items();
  std::unordered_map<std::string, std::uint32_t> index;
  for (std::size_t i = 0; i < items.size(); ++i) index.emplace(items[i], static_cast<std::uint32_t>(i));
  std::vector<std::vector<std::pair<std::uint32_t, double>>> groups;
  const auto triples = train.triples();
  for (const auto& user : train.users()) {
    auto& g = groups.emplace_back();
    for (std::size_t p : train.by_user(user)) g.emplace_back(index.at(triples[p].item), triples[p].value);
  }
  const auto dense = pearson_matrix(items.size(), groups, shrinkage);
  const std::size_t n = items.size();
  std::vector<double> upper;
  upper.reserve(n * (n - (n > 0 ? 1 : 0)) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) upper.push_back(dense[i * n + j]);
  }
  return SimilarityMatrix::from_upper_triangle(items, upper);
}

UserKnnModel::UserKnnModel(const RatingsDataset& train, std::size_t k, double shrinkage, double lambda1,
                           double lambda2)
    : bias_(fit_bias(train, lambda1, lambda2)), k_(k), users_(train.users()) {
  if (k_ < 1) throw ArgumentError("k must be >= 1");
  for (std::size_t u = 0; u < users_.size(); ++u) user_index_.emplace(users_[u], static_cast<std::uint32_t>(u));
  std::vector<std::vector<std::pair<std::uint32_t, double>>> groups;
  const auto triples = train.triples();
  for (const auto& item : train.items()) {
    auto& g = groups.emplace_back();
    auto& residuals = by_item_[item];
    for (std::size_t p : train.by_item(item)) {
      const Rating& r = triples[p];
      const std::uint32_t u = user_index_.at(r.user);
      g.emplace_back(u, r.value);
      residuals.emplace_back(u, r.value - bias_.baseline(r.user, item));
    }
  }
  sim_ = pearson_matrix(users_.size(), groups, shrinkage);
}

double UserKnnModel::predict(const std::string& user, const std::string& item) const {
  const double base = bias_.baseline(user, item);
  const auto u = user_index_.find(user);
  const auto raters = by_item_.find(item);
  if (u == user_index_.end() || raters == by_item_.end()) return clamp_rating(base);
  const std::size_t n = users_.size();
  std::vector<std::pair<double, std::uint32_t>> cands;  // (similarity, position in raters)
  for (std::uint32_t pos = 0; pos < raters->second.size(); ++pos) {
    const std::uint32_t v = raters->second[pos].first;
    if (v == u->second) continue;
    const double s = sim_[static_cast<std::size_t>(u->second) * n + v];
    if (s > 0.0) cands.emplace_back(s, pos);
  }
  if (cands.empty()) return clamp_rating(base);
  const auto& rs = raters->second;
  const auto better = [&](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : users_[rs[a.second].first] < users_[rs[b.second].first];
  };
  const std::size_t keep = std::min(k_, cands.size());
  std::partial_sort(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(keep), cands.end(), better);
  double num = 0.0, den = 0.0;
  for (std::size_t c = 0; c < keep; ++c) {
    num += cands[c].first * rs[cands[c].second].second;
    den += cands[c].first;
  }
  return clamp_rating(base + num / den);
}

SlopeOneModel::SlopeOneModel(const RatingsDataset& train) {
  if (train.empty()) throw ValidationError("cannot fit Slope One on an empty training set");
  mu_ = train.mean();
  const auto& items = train.items();
  const std::size_t n = items.size();
  for (std::size_t i = 0; i < n; ++i) item_index_.emplace(items[i], static_cast<std::uint32_t>(i));
  dev_.assign(n * n, 0.0);
  count_.assign(n * n, 0);
  const auto triples = train.triples();
  for (const auto& user : train.users()) {
    auto& mine = by_user_[user];
    for (std::size_t p : train.by_user(user)) mine.emplace_back(item_index_.at(triples[p].item), triples[p].value);
    for (const auto& [j, rj] : mine) {
      for (const auto& [i, ri] : mine) {
        if (i == j) continue;
        dev_[static_cast<std::size_t>(j) * n + i] += rj - ri;
        ++count_[static_cast<std::size_t>(j) * n + i];
      }
    }
  }
  for (std::size_t c = 0; c < dev_.size(); ++c) {
    if (count_[c] > 0) dev_[c] /= count_[c];
  }
}

double SlopeOneModel::predict(const std::string& user, const std::string& item) const {
  const auto j = item_index_.find(item);
  const auto rated = by_user_.find(user);
  if (j == item_index_.end() || rated == by_user_.end()) return clamp_rating(mu_);
  const std::size_t n = item_index_.size();
  double num = 0.0, den = 0.0;
  for (const auto& [i, ri] : rated->second) {
    if (i == j->second) continue;
    const std::size_t c = static_cast<std::size_t>(j->second) * n + i;
    if (count_[c] == 0) continue;
    num += (dev_[c] + ri) * count_[c];
    den += count_[c];
  }
  return clamp_rating(den > 0.0 ? num / den : mu_);
}

}  // namespace themetrek
