#include <cmath>

#include "themetrek/error.hpp"
#include "themetrek/kernels.hpp"
#include "themetrek/recsys.hpp"
#include "themetrek/rng.hpp"

namespace themetrek {

BiasedMfModel::BiasedMfModel(const RatingsDataset& train, BiasedMfConfig cfg) : cfg_(cfg) {
  if (train.empty()) throw ValidationError("cannot fit matrix factorization on an empty training set");
  if (cfg_.factors < 1 || cfg_.epochs < 1) throw ArgumentError("factors and epochs must be >= 1");
  if (!(cfg_.learning_rate > 0.0) || !(cfg_.regularization >= 0.0)) {
    throw ArgumentError("learning rate must be > 0 and regularization >= 0");
  }
  mu_ = train.mean();
  const std::size_t f = cfg_.factors;
  for (const auto& u : train.users()) user_index_.emplace(u, static_cast<std::uint32_t>(user_index_.size()));
  for (const auto& i : train.items()) item_index_.emplace(i, static_cast<std::uint32_t>(item_index_.size()));
  bu_.assign(user_index_.size(), 0.0);
  bi_.assign(item_index_.size(), 0.0);
  pu_.resize(user_index_.size() * f);
  qi_.resize(item_index_.size() * f);

  Rng rng(cfg_.seed);
  for (double& x : pu_) x = (2.0 * uniform01(rng) - 1.0) * cfg_.init_range;
  for (double& x : qi_) x = (2.0 * uniform01(rng) - 1.0) * cfg_.init_range;

  struct Obs {
    std::uint32_t u, i;
    double r;
  };
  std::vector<Obs> obs;
  obs.reserve(train.size());
  for (const Rating& r : train.triples()) obs.push_back({user_index_.at(r.user), item_index_.at(r.item), r.value});
  shuffle(std::span<Obs>(obs), rng);

  const double lr = cfg_.learning_rate;
  const double reg = cfg_.regularization;
  std::vector<double> p_old(f);
  for (std::size_t epoch = 0; epoch < cfg_.epochs; ++epoch) {
    for (const Obs& o : obs) {
      double* p = pu_.data() + static_cast<std::size_t>(o.u) * f;
      double* q = qi_.data() + static_cast<std::size_t>(o.i) * f;
      const double err = o.r - (mu_ + bu_[o.u] + bi_[o.i] + kernels::dot({p, f}, {q, f}));
      bu_[o.u] += lr * (err - reg * bu_[o.u]);
      bi_[o.i] += lr * (err - reg * bi_[o.i]);
      std::copy(p, p + f, p_old.begin());
      for (std::size_t k = 0; k < f; ++k) {
        p[k] += lr * (err * q[k] - reg * p[k]);
        q[k] += lr * (err * p_old[k] - reg * q[k]);
      }
    }
    double loss = 0.0;
    for (const Obs& o : obs) {
      const double* p = pu_.data() + static_cast<std::size_t>(o.u) * f;
      const double* q = qi_.data() + static_cast<std::size_t>(o.i) * f;
      const double err = o.r - (mu_ + bu_[o.u] + bi_[o.i] + kernels::dot({p, f}, {q, f}));
      loss += err * err;
    }
    double penalty = kernels::squared_norm(pu_) + kernels::squared_norm(qi_) + kernels::squared_norm(bu_) +
                     kernels::squared_norm(bi_);
    loss_.push_back(loss + reg * penalty);
  }
}

double BiasedMfModel::predict(const std::string& user, const std::string& item) const {
  double r = mu_;
  const auto u = user_index_.find(user);
  const auto i = item_index_.find(item);
  if (u != user_index_.end()) r += bu_[u->second];
  if (i != item_index_.end()) r += bi_[i->second];
  if (u != user_index_.end() && i != item_index_.end()) {
    const std::size_t f = cfg_.factors;
    r += kernels::dot({pu_.data() + static_cast<std::size_t>(u->second) * f, f},
                      {qi_.data() + static_cast<std::size_t>(i->second) * f, f});
  }
  return clamp_rating(r);
}

}  // namespace themetrek
