#include "ddf/gaussian.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace ddf {

namespace {
constexpr double kLog2Pi = 1.8378770664093454835606594728112;
constexpr double kMaxCondition = 1e12;
}  // namespace

Gaussian::Gaussian(Eigen::VectorXd mean, Eigen::MatrixXd cov)
    : mean_(std::move(mean)), cov_(std::move(cov)) {
  const auto d = mean_.size();
  if (d < 1) throw DimensionError("Gaussian: dimension must be >= 1");
  if (cov_.rows() != d || cov_.cols() != d)
    throw DimensionError("Gaussian: covariance shape does not match mean dimension");
  if (!cov_.isApprox(cov_.transpose(), 1e-10))
    throw NumericalError("Gaussian: covariance not symmetric");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov_, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (!(lo > 0.0)) throw NumericalError("Gaussian: covariance not positive definite");
  if (hi / lo > kMaxCondition)
    throw NumericalError("Gaussian: covariance near-singular (condition number > 1e12)");

  llt_.compute(cov_);
  if (llt_.info() != Eigen::Success)
    throw NumericalError("Gaussian: Cholesky factorization failed");
  log_det_ = 2.0 * llt_.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

double Gaussian::log_pdf(const Eigen::VectorXd& x) const {
  if (x.size() != mean_.size())
    throw DimensionError("Gaussian::log_pdf: point dimension mismatch");
  const Eigen::VectorXd diff = x - mean_;
  const Eigen::VectorXd w = llt_.matrixL().solve(diff);
  return -0.5 * (dim() * kLog2Pi + log_det_ + w.squaredNorm());
}

Eigen::VectorXd Gaussian::sample(SplitMix64& rng) const {
  Eigen::VectorXd z(dim());
  for (int i = 0; i < dim(); ++i) z[i] = rng.normal();
  return mean_ + llt_.matrixL() * z;
}

std::pair<Gaussian, double> gaussian_product(const Gaussian& a, const Gaussian& b) {
  if (a.dim() != b.dim())
    throw DimensionError("gaussian_product: dimension mismatch");
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(a.dim(), a.dim());
  const Eigen::MatrixXd prec_a = a.chol().solve(id);
  const Eigen::MatrixXd prec_b = b.chol().solve(id);
  Eigen::MatrixXd prec = prec_a + prec_b;
  Eigen::LLT<Eigen::MatrixXd> llt(prec);
  if (llt.info() != Eigen::Success)
    throw NumericalError("gaussian_product: summed precision not positive definite");
  Eigen::MatrixXd cov = llt.solve(id);
  cov = 0.5 * (cov + cov.transpose());  // kill asymmetric rounding
  const Eigen::VectorXd mu = llt.solve(prec_a * a.mean() + prec_b * b.mean());

  const Gaussian convolved(b.mean(), a.cov() + b.cov());
  const double log_scale = convolved.log_pdf(a.mean());
  return {Gaussian(mu, cov), log_scale};
}

}  // namespace ddf
