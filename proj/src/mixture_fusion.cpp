#include "ddf/mixture_fusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "ddf/rng.hpp"

namespace ddf {

namespace {

double log_sum_exp(const std::vector<double>& v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double acc = 0.0;
  for (double x : v) acc += std::exp(x - m);
  return m + std::log(acc);
}

}  // namespace

std::vector<RatioComponent> build_ratio_components(const GaussianMixture& p_i,
                                                   const GaussianMixture& p_j) {
  if (p_i.dim() != p_j.dim())
    throw DimensionError("build_ratio_components: dimension mismatch");
  std::vector<RatioComponent> out;
  out.reserve(static_cast<std::size_t>(p_i.size()) * static_cast<std::size_t>(p_j.size()));
  for (int q = 0; q < p_i.size(); ++q) {
    const auto& cq = p_i.component(q);
    for (int r = 0; r < p_j.size(); ++r) {
      const auto& cr = p_j.component(r);
      auto [prod, log_zbar] = gaussian_product(cq.gaussian, cr.gaussian);
      const double lw = std::log(cq.weight) + std::log(cr.weight) + log_zbar;
      out.push_back(RatioComponent{q, r, lw, std::move(prod)});
    }
  }
  return out;
}

Gaussian select_proposal(const RatioComponent& comp, const Eigen::MatrixXd& sigma_q,
                         const Eigen::MatrixXd& sigma_r, double alpha) {
  const int d = comp.gaussian.dim();
  if (d > 5)
    throw ConfigError("select_proposal: proposal strategy out of validated range (d > 5)");
  if (!(alpha > 0.0)) throw NumericalError("select_proposal: alpha must be positive");

  const auto log_det = [](const Eigen::MatrixXd& m) {
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success)
      throw NumericalError("select_proposal: candidate covariance not SPD");
    return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  };
  const double ld_q = log_det(sigma_q);
  const double ld_r = log_det(sigma_r);
  const double ld_def = d * std::log(alpha);

  if (ld_q >= ld_r && ld_q >= ld_def) return Gaussian(comp.gaussian.mean(), sigma_q);
  if (ld_r >= ld_def) return Gaussian(comp.gaussian.mean(), sigma_r);
  return Gaussian(comp.gaussian.mean(), alpha * Eigen::MatrixXd::Identity(d, d));
}

MomentEstimate is_moment_match(const RatioComponent& comp, const LogDensityFn& u,
                               const Gaussian& proposal, int n_samples, std::uint64_t seed) {
  if (n_samples < 100) throw ConfigError("is_moment_match: n_samples must be >= 100");
  const int d = comp.gaussian.dim();
  SplitMix64 rng(substream_seed(seed, static_cast<std::uint64_t>(comp.q),
                                static_cast<std::uint64_t>(comp.r)));

  Eigen::MatrixXd xs(d, n_samples);
  std::vector<double> log_ratio(static_cast<std::size_t>(n_samples));
  for (int s = 0; s < n_samples; ++s) {
    const Eigen::VectorXd x = proposal.sample(rng);
    xs.col(s) = x;
    // raw importance ratio: N(x; mu_qr, Sigma_qr) / (u(x) * h(x))
    log_ratio[static_cast<std::size_t>(s)] =
        comp.gaussian.log_pdf(x) - u(x) - proposal.log_pdf(x);
  }

  const double lse = log_sum_exp(log_ratio);
  if (!std::isfinite(lse)) throw NumericalError("is_moment_match: proposal misses support");

  // Self-normalized weights for the first/second moments.
  Eigen::VectorXd theta(n_samples);
  for (int s = 0; s < n_samples; ++s)
    theta[s] = std::exp(log_ratio[static_cast<std::size_t>(s)] - lse);

  const Eigen::VectorXd mu = xs * theta;
  Eigen::MatrixXd second = Eigen::MatrixXd::Zero(d, d);
  for (int s = 0; s < n_samples; ++s)
    second += theta[s] * xs.col(s) * xs.col(s).transpose();
  Eigen::MatrixXd cov = second - mu * mu.transpose();
  cov = 0.5 * (cov + cov.transpose());
  cov += (1e-9 * cov.trace() / d) * Eigen::MatrixXd::Identity(d, d);
  {
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success)
      throw NumericalError("is_moment_match: sample covariance not SPD after regularization");
  }

  double sum_sq = 0.0;
  for (int s = 0; s < n_samples; ++s) sum_sq += theta[s] * theta[s];
  const double ess = 1.0 / sum_sq;

  Eigen::VectorXd se = Eigen::VectorXd::Zero(d);
  for (int s = 0; s < n_samples; ++s) {
    const Eigen::VectorXd diff = xs.col(s) - mu;
    se += (theta[s] * theta[s]) * diff.cwiseProduct(diff);
  }
  se = se.cwiseSqrt();

  MomentEstimate est;
  est.log_weight = comp.base_log_weight + lse - std::log(static_cast<double>(n_samples));
  est.mean = mu;
  est.cov = std::move(cov);
  est.ess = ess;
  est.low_ess = ess < 10.0;
  est.mean_se = std::move(se);
  return est;
}

GmFusionResult gm_fuse(const GaussianMixture& p_i, const GaussianMixture& p_j,
                       const LogDensityFn& u, const FusionParams& params) {
  if (params.n_samples < 100) throw ConfigError("gm_fuse: n_samples must be >= 100");
  if (!(params.alpha > 0.0)) throw ConfigError("gm_fuse: alpha must be positive");
  if (params.prune_threshold < 0.0 || params.prune_threshold >= 1.0)
    throw ConfigError("gm_fuse: prune_threshold outside [0,1)");

  std::vector<RatioComponent> comps = build_ratio_components(p_i, p_j);

  std::vector<double> base(comps.size());
  for (std::size_t k = 0; k < comps.size(); ++k) base[k] = comps[k].base_log_weight;
  const double base_lse = log_sum_exp(base);

  std::vector<std::size_t> keep;
  for (std::size_t k = 0; k < comps.size(); ++k) {
    if (params.prune_threshold == 0.0 ||
        std::exp(base[k] - base_lse) >= params.prune_threshold)
      keep.push_back(k);
  }
  if (keep.empty()) throw NumericalError("gm_fuse: all components pruned");

  std::vector<MomentEstimate> est(keep.size(),
                                  MomentEstimate{0.0, {}, {}, 0.0, false, {}});
  const auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      const RatioComponent& c = comps[keep[k]];
      const Gaussian proposal =
          select_proposal(c, p_i.component(c.q).gaussian.cov(),
                          p_j.component(c.r).gaussian.cov(), params.alpha);
      est[k] = is_moment_match(c, u, proposal, params.n_samples, params.seed);
    }
  };

  const int threads = std::max(1, params.threads);
  if (threads == 1 || keep.size() < 2) {
    work(0, keep.size());
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (keep.size() + threads - 1) / static_cast<std::size_t>(threads);
    for (std::size_t b = 0; b < keep.size(); b += chunk)
      pool.emplace_back(work, b, std::min(b + chunk, keep.size()));
    for (auto& t : pool) t.join();
  }

  std::vector<double> lw(est.size());
  for (std::size_t k = 0; k < est.size(); ++k) lw[k] = est[k].log_weight;
  const double log_eta = log_sum_exp(lw);
  if (!std::isfinite(log_eta)) throw NumericalError("gm_fuse: all component weights vanished");

  std::vector<WeightedGaussian> out;
  out.reserve(est.size());
  bool any_low = false;
  for (std::size_t k = 0; k < est.size(); ++k) {
    any_low = any_low || est[k].low_ess;
    out.push_back(WeightedGaussian{std::exp(lw[k] - log_eta),
                                   Gaussian(est[k].mean, est[k].cov)});
  }
  // Rounding can leave the weight sum a hair off 1; renormalize exactly.
  double sum = 0.0;
  for (const auto& c : out) sum += c.weight;
  for (auto& c : out) c.weight /= sum;
  return GmFusionResult{GaussianMixture(std::move(out)), log_eta, any_low};
}

GmFusionResult gm_wep_fuse(const GaussianMixture& p_i, const GaussianMixture& p_j,
                           double omega, const FusionParams& params) {
  if (omega < 0.0 || omega > 1.0) throw NumericalError("gm_wep_fuse: omega outside [0,1]");
  const LogDensityFn u = [&p_i, &p_j, omega](const Eigen::VectorXd& x) {
    return (1.0 - omega) * p_i.log_evaluate(x) + omega * p_j.log_evaluate(x);
  };
  return gm_fuse(p_i, p_j, u, params);
}

GmFusionResult gm_exact_fuse(const GaussianMixture& p_i, const GaussianMixture& p_j,
                             const GaussianMixture& p_c, const FusionParams& params) {
  const LogDensityFn u = [&p_c](const Eigen::VectorXd& x) { return p_c.log_evaluate(x); };

  GmFusionResult result = gm_fuse(p_i, p_j, u, params);

  // Underflow check: at each significant fused component mean the claimed
  // common information must not be dwarfed by the numerator mass.
  for (const auto& c : result.mixture.components()) {
    if (c.weight < 1e-3) continue;
    const Eigen::VectorXd& m = c.gaussian.mean();
    const double log_num = p_i.log_evaluate(m) + p_j.log_evaluate(m);
    const double log_den = p_c.log_evaluate(m);
    if (log_num - log_den > std::log(1e6) && std::exp(log_den) < 1e-12)
      throw NumericalError("gm_exact_fuse: inconsistent common information");
  }
  return result;
}

}  // namespace ddf
