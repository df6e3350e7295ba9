#pragma once
// Rating predictors: bias baselines, item KNN over any similarity matrix,
// collaborative item/user correlations, Slope One, biased matrix
// factorization and the trivial baselines. Every prediction lies in [1, 10].

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "themetrek/corpus_io.hpp"

namespace themetrek {

inline double clamp_rating(double r) { return r < kMinRating ? kMinRating : (r > kMaxRating ? kMaxRating : r); }

/// A fitted model. Fitted models are immutable; predict() is thread-safe.
class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual double predict(const std::string& user, const std::string& item) const = 0;
};

inline constexpr double kDefaultLambda1 = 25.0;
inline constexpr double kDefaultLambda2 = 10.0;

struct BiasModel {
  double mu = 0.0;
  std::unordered_map<std::string, double> b_item;
  std::unordered_map<std::string, double> b_user;
  double lambda1 = kDefaultLambda1;
  double lambda2 = kDefaultLambda2;

  /// 0 for ids absent from training.
  double item_bias(const std::string& item) const;
  double user_bias(const std::string& user) const;
  /// mu + b_u + b_i, unclamped.
  double baseline(const std::string& user, const std::string& item) const;
};

/// Item biases first, then user biases on the item-adjusted residuals.
/// ValidationError on an empty training set; ArgumentError on negative lambdas.
BiasModel fit_bias(const RatingsDataset& train, double lambda1 = kDefaultLambda1,
                   double lambda2 = kDefaultLambda2);

/// Bias baseline plus the similarity-weighted residual average over the k
/// items most similar to the target among those the user rated (s > 0 only,
/// ties by item id). Falls back to the baseline without neighbors.
class IknnModel : public Predictor {
 public:
  IknnModel(const RatingsDataset& train, std::shared_ptr<const SimilarityMatrix> sims, std::size_t k,
            double lambda1 = kDefaultLambda1, double lambda2 = kDefaultLambda2);

  double predict(const std::string& user, const std::string& item) const override;
  const BiasModel& bias() const { return bias_; }
  std::size_t k() const { return k_; }

 private:
  struct Rated {
    std::string item;
    std::size_t sim_index;  // npos when the item is absent from the matrix
    double residual;        // r_uj - b_uj
  };
  BiasModel bias_;
  std::shared_ptr<const SimilarityMatrix> sims_;
  std::size_t k_;
  std::unordered_map<std::string, std::vector<Rated>> by_user_;
};

inline constexpr double kDefaultShrinkage = 10.0;

/// Dense Pearson correlation between rows that co-occur in groups, computed
/// over co-rated entries only, shrunk by n/(n+shrinkage), floored at 0.
/// Pairs with fewer than two co-ratings, or zero variance, get 0.
/// `ratings[g]` lists (row, value) pairs of one group. Returns an n x n
/// row-major matrix with ones on the diagonal.
std::vector<double> pearson_matrix(std::size_t n_rows,
                                   const std::vector<std::vector<std::pair<std::uint32_t, double>>>& groups,
                                   double shrinkage);

/// Item-item Pearson over co-rating users.
SimilarityMatrix cf_item_similarity(const RatingsDataset& train, double shrinkage = kDefaultShrinkage);

/// Item KNN with the roles of users and items swapped, over user-user Pearson.
class UserKnnModel : public Predictor {
 public:
  UserKnnModel(const RatingsDataset& train, std::size_t k, double shrinkage = kDefaultShrinkage,
               double lambda1 = kDefaultLambda1, double lambda2 = kDefaultLambda2);
  double predict(const std::string& user, const std::string& item) const override;

 private:
  BiasModel bias_;
  std::size_t k_;
  std::unordered_map<std::string, std::uint32_t> user_index_;
  std::vector<std::string> users_;
  std::vector<double> sim_;  // users x users
  std::unordered_map<std::string, std::vector<std::pair<std::uint32_t, double>>> by_item_;  // (user, residual)
};

/// Weighted Slope One; falls back to the global mean.
class SlopeOneModel : public Predictor {
 public:
  explicit SlopeOneModel(const RatingsDataset& train);
  double predict(const std::string& user, const std::string& item) const override;

 private:
  double mu_ = 0.0;
  std::unordered_map<std::string, std::uint32_t> item_index_;
  std::vector<double> dev_;          // items x items, mean of r_uj - r_ui at [j * n + i]
  std::vector<std::uint32_t> count_;  // co-rating counts
  std::unordered_map<std::string, std::vector<std::pair<std::uint32_t, double>>> by_user_;
};

struct BiasedMfConfig {
  std::size_t factors = 10;
  double learning_rate = 0.005;
  double regularization = 0.02;
  std::size_t epochs = 50;
  double init_range = 0.01;  // factors start uniform in [-init_range, init_range]
  std::uint64_t seed = 42;
};

/// r ≈ mu + b_u + b_i + q_iᵀ p_u by stochastic gradient descent over one
/// fixed shuffle of the training ratings.
class BiasedMfModel : public Predictor {
 public:
  explicit BiasedMfModel(const RatingsDataset& train, BiasedMfConfig cfg = {});
  double predict(const std::string& user, const std::string& item) const override;
  /// Regularized training objective after each epoch.
  const std::vector<double>& loss_history() const { return loss_; }

 private:
  BiasedMfConfig cfg_;
  double mu_ = 0.0;
  std::unordered_map<std::string, std::uint32_t> user_index_, item_index_;
  std::vector<double> bu_, bi_, pu_, qi_;
  std::vector<double> loss_;
};

/// Returns mu + b_u + b_i.
class UserItemBaseline : public Predictor {
 public:
  explicit UserItemBaseline(const RatingsDataset& train, double lambda1 = kDefaultLambda1,
                            double lambda2 = kDefaultLambda2);
  double predict(const std::string& user, const std::string& item) const override;

 private:
  BiasModel bias_;
};

/// Mean rating of the item, or of the user, or the global mean. Unknown ids fall back to the global mean.
class AverageBaseline : public Predictor {
 public:
  enum class Kind { item, user, global };
  AverageBaseline(const RatingsDataset& train, Kind kind);
  double predict(const std::string& user, const std::string& item) const override;

 private:
  Kind kind_;
  double mu_ = 0.0;
  std::unordered_map<std::string, double> mean_;
};

/// Uniform on [1, 10], a deterministic function of (seed, user, item).
class RandomBaseline : public Predictor {
 public:
  explicit RandomBaseline(std::uint64_t seed) : seed_(seed) {}
  double predict(const std::string& user, const std::string& item) const override;

 private:
  std::uint64_t seed_;
};

}  // namespace themetrek
