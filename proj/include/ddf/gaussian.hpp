#pragma once

#include <Eigen/Dense>
#include <utility>

#include "ddf/error.hpp"
#include "ddf/rng.hpp"

namespace ddf {

/// Multivariate Gaussian with a validated SPD covariance. Immutable after
/// construction; the Cholesky factor is computed once and reused for density
/// evaluation and sampling.
class Gaussian {
 public:
  Gaussian(Eigen::VectorXd mean, Eigen::MatrixXd cov);

  int dim() const { return static_cast<int>(mean_.size()); }
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& cov() const { return cov_; }
  const Eigen::LLT<Eigen::MatrixXd>& chol() const { return llt_; }
  double log_det_cov() const { return log_det_; }

  double log_pdf(const Eigen::VectorXd& x) const;
  double pdf(const Eigen::VectorXd& x) const { return std::exp(log_pdf(x)); }

  Eigen::VectorXd sample(SplitMix64& rng) const;

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  double log_det_;
};

/// Moment parameters of the (unnormalized) product of two Gaussian densities:
/// the returned Gaussian carries Sigma = (Sa^-1 + Sb^-1)^-1 and
/// mu = Sigma (Sa^-1 ma + Sb^-1 mb); the scalar is
/// log N(ma; mb, Sa + Sb), the product's normalization height.
std::pair<Gaussian, double> gaussian_product(const Gaussian& a, const Gaussian& b);

}  // namespace ddf
