#include "themetrek/recsys.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "themetrek/error.hpp"

namespace themetrek {

double BiasModel::item_bias(const std::string& item) const {
  const auto it = b_item.find(item);
  return it == b_item.end() ? 0.0 : it->second;
}

double BiasModel::user_bias(const std::string& user) const {
  const auto it = b_user.find(user);
  return it == b_user.end() ? 0.0 : it->second;
}

double BiasModel::baseline(const std::string& user, const std::string& item) const {
  return mu + user_bias(user) + item_bias(item);
}

BiasModel fit_bias(const RatingsDataset& train, double lambda1, double lambda2) {
  if (train.empty()) throw ValidationError("cannot fit biases on an empty training set");
  if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0)) throw ArgumentError("bias regularization must be >= 0");
  BiasModel m;
  m.lambda1 = lambda1;
  m.lambda2 = lambda2;
  m.mu = train.mean();
  const auto triples = train.triples();
  for (const auto& item : train.items()) {
    const auto pos = train.by_item(item);
    double sum = 0.0;
    for (std::size_t p : pos) sum += triples[p].value - m.mu;
    m.b_item[item] = sum / (lambda1 + static_cast<double>(pos.size()));
  }
  for (const auto& user : train.users()) {
    const auto pos = train.by_user(user);
    double sum = 0.0;
    for (std::size_t p : pos) sum += triples[p].value - m.mu - m.b_item[triples[p].item];
    m.b_user[user] = sum / (lambda2 + static_cast<double>(pos.size()));
  }
  return m;
}

IknnModel::IknnModel(const RatingsDataset& train, std::shared_ptr<const SimilarityMatrix> sims, std::size_t k,
                     double lambda1, double lambda2)
    : bias_(fit_bias(train, lambda1, lambda2)), sims_(std::move(sims)), k_(k) {
  if (!sims_) throw ArgumentError("item KNN needs a similarity matrix");
  if (k_ < 1) throw ArgumentError("k must be >= 1");
  for (const Rating& r : train.triples()) {
    const auto idx = sims_->index_of(r.item);
    by_user_[r.user].push_back({r.item, idx.value_or(std::numeric_limits<std::size_t>::max()),
                                r.value - bias_.baseline(r.user, r.item)});
  }
}

double IknnModel::predict(const std::string& user, const std::string& item) const {
  const double base = bias_.baseline(user, item);
  const auto target = sims_->index_of(item);
  const auto rated = by_user_.find(user);
  if (!target || rated == by_user_.end()) return clamp_rating(base);

  struct Candidate {
    double s;
    const Rated* r;
  };
  std::vector<Candidate> cands;
  for (const Rated& r : rated->second) {
    if (r.sim_index == std::numeric_limits<std::size_t>::max() || r.item == item) continue;
    const double s = sims_->score(*target, r.sim_index);
    if (s > 0.0) cands.push_back({s, &r});
  }
  if (cands.empty()) return clamp_rating(base);
  const auto better = [](const Candidate& a, const Candidate& b) {
    return a.s != b.s ? a.s > b.s : a.r->item < b.r->item;
  };
  const std::size_t keep = std::min(k_, cands.size());
  std::partial_sort(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(keep), cands.end(), better);
  double num = 0.0, den = 0.0;
  for (std::size_t n = 0; n < keep; ++n) {
    num += cands[n].s * cands[n].r->residual;
    den += cands[n].s;
  }
  return clamp_rating(base + num / den);
}

UserItemBaseline::UserItemBaseline(const RatingsDataset& train, double lambda1, double lambda2)
    : bias_(fit_bias(train, lambda1, lambda2)) {}

double UserItemBaseline::predict(const std::string& user, const std::string& item) const {
  return clamp_rating(bias_.baseline(user, item));
}

AverageBaseline::AverageBaseline(const RatingsDataset& train, Kind kind) : kind_(kind) {
  if (train.empty()) throw ValidationError("cannot fit averages on an empty training set");
  mu_ = train.mean();
  if (kind_ == Kind::global) return;
  const auto triples = train.triples();
  const auto& keys = kind_ == Kind::item ? train.items() : train.users();
  for (const auto& key : keys) {
    const auto pos = kind_ == Kind::item ? train.by_item(key) : train.by_user(key);
    double sum = 0.0;
    for (std::size_t p : pos) sum += triples[p].value;
    mean_[key] = sum / static_cast<double>(pos.size());
  }
}

double AverageBaseline::predict(const std::string& user, const std::string& item) const {
  if (kind_ == Kind::global) return clamp_rating(mu_);
  const auto it = mean_.find(kind_ == Kind::item ? item : user);
  return clamp_rating(it == mean_.end() ? mu_ : it->second);
}

namespace {
std::uint64_t fnv1a(std::string_view s, std::uint64_t h) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}
}  // namespace

double RandomBaseline::predict(const std::string& user, const std::string& item) const {
  std::uint64_t h = fnv1a(user, 0xcbf29ce484222325ULL ^ splitmix64(seed_));
  h = fnv1a("\x1f", h);
  h = fnv1a(item, h);
  const double u = static_cast<double>(splitmix64(h) >> 11) * 0x1.0p-53;
  return kMinRating + u * (kMaxRating - kMinRating);
}

}  // namespace themetrek
