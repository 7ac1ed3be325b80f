#pragma once

#include <vector>

#include "ddf/gaussian.hpp"

namespace ddf {

struct WeightedGaussian {
  double weight;
  Gaussian gaussian;
};

/// Finite Gaussian mixture; weights normalized and validated at construction.
class GaussianMixture {
 public:
  explicit GaussianMixture(std::vector<WeightedGaussian> components);

  int dim() const { return components_.front().gaussian.dim(); }
  int size() const { return static_cast<int>(components_.size()); }
  const std::vector<WeightedGaussian>& components() const { return components_; }
  const WeightedGaussian& component(int q) const { return components_[static_cast<size_t>(q)]; }

  /// log sum_q w_q N(x; mu_q, Sigma_q), via log-sum-exp.
  double log_evaluate(const Eigen::VectorXd& x) const;
  double evaluate(const Eigen::VectorXd& x) const { return std::exp(log_evaluate(x)); }

  /// Mixture mean and full (law-of-total-variance) covariance as one Gaussian.
  Gaussian moment_match() const;

  Eigen::VectorXd sample(SplitMix64& rng) const;

 private:
  std::vector<WeightedGaussian> components_;
};

}  // namespace ddf
