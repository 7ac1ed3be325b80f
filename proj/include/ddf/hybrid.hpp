#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "ddf/discrete.hpp"
#include "ddf/fusion.hpp"
#include "ddf/grid.hpp"
#include "ddf/mixture_fusion.hpp"
#include "ddf/sensor.hpp"

namespace ddf {

/// A per-region conditional pdf; homogeneous within one belief.
using ConditionalPdf = std::variant<GridPdf, GaussianMixture>;

/// Hybrid belief: discrete region distribution p(R) plus one conditional
/// pdf p(x | R = r) per region.
struct HybridBelief {
  DiscreteDist regions;
  std::vector<ConditionalPdf> conditionals;

  int num_regions() const { return regions.size(); }
  bool grid_backed() const;
  const GridPdf& grid_conditional(int r) const;
  void validate() const;
};

/// Which factors of a hybrid belief a message (or fusion call) covers.
struct FactorSelector {
  std::vector<int> regions;        // regions whose conditionals are fused
  bool include_region_dist = true;

  bool contains(int r) const;
  static FactorSelector all(int num_regions);
};

/// Per-factor WEP weights: one omega for the region factor and one per
/// conditional factor.
struct OmegaAssignment {
  double omega_region = 0.5;
  std::vector<double> omega_conditional;  // one entry per region
};

/// Flattened joint cell masses over (x, R): concatenation of
/// p(r) * conditional-masses per region. Valid for grid-backed beliefs.
std::vector<double> hybrid_joint_masses(const HybridBelief& b);

/// Factorized exact DDF per Sec. III: selected regions fused via the
/// conditional ratio rule with denormalization eta(r); unselected regions
/// resolved by exclusive-information overwrite (only legal when at most one
/// side differs from the common belief). Region weights fused as
/// p_i(R) p_j(R) / p_c(R) * eta(R), renormalized.
/// GM-backed beliefs use importance-sampling fusion with `params`.
HybridBelief hybrid_exact_fuse(const HybridBelief& b_i, const HybridBelief& b_j,
                               const HybridBelief& b_c, const FactorSelector& select,
                               const FusionParams& params = {});

/// Factorized WEP DDF with per-factor omega and denormalization eta_hat(r).
HybridBelief hybrid_wep_fuse(const HybridBelief& b_i, const HybridBelief& b_j,
                             const OmegaAssignment& omega, const FactorSelector& select,
                             const FusionParams& params = {});

/// Joint-KLD decomposition between grid-backed hybrid beliefs:
/// total = KLD(p(R)||q(R)) + sum_r p(r) KLD(p(x|r)||q(x|r)).
struct HybridKld {
  double total;
  double region_term;
  std::vector<double> per_region;  // unweighted conditional KLDs
};
HybridKld hybrid_joint_kld(const HybridBelief& truth, const HybridBelief& approx);

/// One row of an omega_R sensitivity sweep.
struct OmegaSweepRow {
  double omega_region;
  double factorized_kld;
  double factorized_region_term;
  double whole_joint_kld;
  double whole_joint_region_term;
};

/// Sweeps omega_R with conditional omegas held fixed, reporting the joint
/// KLD to the exact fusion result; also evaluates the whole-joint WEP curve
/// (all omegas tied to omega_R).
std::vector<OmegaSweepRow> omega_r_sweep(const HybridBelief& b_i, const HybridBelief& b_j,
                                         const HybridBelief& b_c,
                                         const OmegaAssignment& fixed_conditionals,
                                         const std::vector<double>& omega_grid,
                                         const FactorSelector& select);

/// Local Bayesian sensor update of a grid-backed hybrid belief: conditionals
/// of in-range regions are multiplied by the observation likelihood and
/// renormalized; region weights pick up the marginal likelihood. Regions
/// outside the sensor footprint are untouched.
HybridBelief hybrid_local_update(const HybridBelief& b, const Observation& obs,
                                 const SensorModel& sensor, const Eigen::Vector2d& pose,
                                 const std::vector<RegionRect>& regions);

}  // namespace ddf
