#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "ddf/mixture.hpp"

namespace ddf {

/// Pointwise-evaluable log-density (known up to an additive constant),
/// the common-information denominator u(x) of a ratio mixand.
using LogDensityFn = std::function<double(const Eigen::VectorXd&)>;

/// One term of the fused mixture before moment matching: the unnormalized
/// Gaussian numerator produced by pairing mixand q of p_i with mixand r of
/// p_j, divided (pointwise) by the shared denominator u(x).
struct RatioComponent {
  int q;
  int r;
  double base_log_weight;  // log w_q + log w_r + log zbar_qr
  Gaussian gaussian;       // N(mu_qr, Sigma_qr)
};

struct FusionParams {
  int n_samples = 2000;          // IS draws per component, >= 100
  double alpha = 1.0;            // variance of the fallback proposal alpha*I
  double prune_threshold = 1e-6; // base-weight fraction below which a
                                 // component is dropped before sampling
  std::uint64_t seed = 0;
  int threads = 1;               // >1 enables parallel moment matching
};

/// Moment-matched approximation of a single ratio component, plus the IS
/// diagnostics the tests and callers need.
struct MomentEstimate {
  double log_weight;        // base_log_weight + log(mean raw importance ratio)
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;      // symmetrized, jitter-regularized
  double ess;               // effective sample size
  bool low_ess;             // ess < 10
  Eigen::VectorXd mean_se;  // per-coordinate self-normalized IS standard error
};

/// All M_i * M_j pairwise Gaussian products, q-major order.
std::vector<RatioComponent> build_ratio_components(const GaussianMixture& p_i,
                                                   const GaussianMixture& p_j);

/// Proposal covariance selection: the element of {Sigma_q, Sigma_r, alpha*I}
/// with the largest determinant, ties to the first listed; proposal mean is
/// the component mean. Validated for state dimensions <= 5.
Gaussian select_proposal(const RatioComponent& comp, const Eigen::MatrixXd& sigma_q,
                         const Eigen::MatrixXd& sigma_r, double alpha);

/// Importance-sampling moment match of one ratio component against
/// denominator u. Deterministic given (comp indices, seed); the RNG stream
/// is derived from seed and (q, r), never from execution order.
MomentEstimate is_moment_match(const RatioComponent& comp, const LogDensityFn& u,
                               const Gaussian& proposal, int n_samples, std::uint64_t seed);

/// Result of a full mixture fusion, keeping the denormalization constant
/// eta = sum of unnormalized component weights (needed by hybrid fusion).
struct GmFusionResult {
  GaussianMixture mixture;
  double log_eta;
  bool any_low_ess;
};

/// GM approximation of p_i * p_j / u: build ratio components, prune small
/// base weights, moment-match the rest, renormalize by eta.
GmFusionResult gm_fuse(const GaussianMixture& p_i, const GaussianMixture& p_j,
                       const LogDensityFn& u, const FusionParams& params);

/// WEP fusion of two GMs: u(x) = (1-w) log p_i(x) + w log p_j(x).
GmFusionResult gm_wep_fuse(const GaussianMixture& p_i, const GaussianMixture& p_j,
                           double omega, const FusionParams& params);

/// Exact fusion of two GMs with GM common information p_c.
GmFusionResult gm_exact_fuse(const GaussianMixture& p_i, const GaussianMixture& p_j,
                             const GaussianMixture& p_c, const FusionParams& params);

}  // namespace ddf
