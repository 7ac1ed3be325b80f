#include "ddf/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ddf {

GaussianMixture::GaussianMixture(std::vector<WeightedGaussian> components)
    : components_(std::move(components)) {
  if (components_.empty())
    throw DimensionError("GaussianMixture: at least one component required");
  const int d = components_.front().gaussian.dim();
  double sum = 0.0;
  for (const auto& c : components_) {
    if (c.gaussian.dim() != d)
      throw DimensionError("GaussianMixture: components have mixed dimensions");
    if (c.weight < 0.0 || c.weight > 1.0)
      throw NumericalError("GaussianMixture: weight outside [0,1]");
    sum += c.weight;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw NumericalError("GaussianMixture: weights do not sum to 1");
}

double GaussianMixture::log_evaluate(const Eigen::VectorXd& x) const {
  if (x.size() != dim())
    throw DimensionError("GaussianMixture::log_evaluate: point dimension mismatch");
  double max_term = -std::numeric_limits<double>::infinity();
  std::vector<double> terms;
  terms.reserve(components_.size());
  for (const auto& c : components_) {
    const double t = (c.weight > 0.0)
                         ? std::log(c.weight) + c.gaussian.log_pdf(x)
                         : -std::numeric_limits<double>::infinity();
    terms.push_back(t);
    max_term = std::max(max_term, t);
  }
  if (!std::isfinite(max_term)) return -std::numeric_limits<double>::infinity();
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - max_term);
  return max_term + std::log(acc);
}

Gaussian GaussianMixture::moment_match() const {
  const int d = dim();
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(d);
  for (const auto& c : components_) mu += c.weight * c.gaussian.mean();
  Eigen::MatrixXd second = Eigen::MatrixXd::Zero(d, d);
  for (const auto& c : components_) {
    second += c.weight * (c.gaussian.cov() + c.gaussian.mean() * c.gaussian.mean().transpose());
  }
  Eigen::MatrixXd cov = second - mu * mu.transpose();
  cov = 0.5 * (cov + cov.transpose());
  return Gaussian(mu, cov);
}

Eigen::VectorXd GaussianMixture::sample(SplitMix64& rng) const {
  const double u = rng.uniform();
  double acc = 0.0;
  for (const auto& c : components_) {
    acc += c.weight;
    if (u <= acc) return c.gaussian.sample(rng);
  }
  return components_.back().gaussian.sample(rng);
}

}  // namespace ddf
