#include "ddf/hybrid.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

namespace ddf {

namespace {

bool same_mass(const GridPdf& a, const GridPdf& b) {
  if (!a.same_grid(b)) return false;
  return a.masses() == b.masses();
}

bool same_mixture(const GaussianMixture& a, const GaussianMixture& b) {
  if (a.size() != b.size() || a.dim() != b.dim()) return false;
  for (int q = 0; q < a.size(); ++q) {
    const auto& ca = a.component(q);
    const auto& cb = b.component(q);
    if (ca.weight != cb.weight || ca.gaussian.mean() != cb.gaussian.mean() ||
        ca.gaussian.cov() != cb.gaussian.cov())
      return false;
  }
  return true;
}

bool same_conditional(const ConditionalPdf& a, const ConditionalPdf& b) {
  if (a.index() != b.index()) return false;
  if (std::holds_alternative<GridPdf>(a))
    return same_mass(std::get<GridPdf>(a), std::get<GridPdf>(b));
  return same_mixture(std::get<GaussianMixture>(a), std::get<GaussianMixture>(b));
}

struct FusedFactor {
  ConditionalPdf pdf;
  double eta;
};

// Exact conditional fusion for one region. Sides equal to the common pdf are
// resolved by direct overwrite (mathematically exact, and bit-exact in the
// output), which is what makes exclusive-region semantics hold.
FusedFactor fuse_conditional_exact(const ConditionalPdf& ci, const ConditionalPdf& cj,
                                   const ConditionalPdf& cc, bool selected, int region,
                                   const FusionParams& params) {
  const bool j_new = !same_conditional(cj, cc);
  const bool i_new = !same_conditional(ci, cc);
  if (!j_new) return {ci, 1.0};
  if (!i_new) return {cj, 1.0};
  if (!selected)
    throw ConfigError("hybrid_exact_fuse: incomplete fusion, both sides hold new "
                      "information for unselected region " + std::to_string(region));

  if (std::holds_alternative<GridPdf>(ci)) {
    const GridPdf& gi = std::get<GridPdf>(ci);
    const GridPdf& gj = std::get<GridPdf>(cj);
    const GridPdf& gc = std::get<GridPdf>(cc);
    if (!gi.same_grid(gj) || !gi.same_grid(gc))
      throw DimensionError("hybrid_exact_fuse: conditional grids differ");
    double eta = 0.0;
    std::vector<double> mass(gi.size(), 0.0);
    for (std::size_t k = 0; k < gi.size(); ++k) {
      const double num = gi.mass(k) * gj.mass(k);
      if (num > 0.0) {
        if (gc.mass(k) <= 0.0)
          throw NumericalError("hybrid_exact_fuse: inconsistent common information at cell " +
                               std::to_string(k) + " of region " + std::to_string(region));
        mass[k] = num / gc.mass(k);
        eta += mass[k];
      }
    }
    return {GridPdf(gi.axes(), std::move(mass)), eta};
  }

  GmFusionResult res = gm_exact_fuse(std::get<GaussianMixture>(ci),
                                     std::get<GaussianMixture>(cj),
                                     std::get<GaussianMixture>(cc), params);
  return {std::move(res.mixture), std::exp(res.log_eta)};
}

// WEP conditional fusion for one region; eta_hat is the normalization mass
// of the power product, the denormalization term that keeps the factorized
// result consistent with whole-joint WEP when all regions share one omega.
FusedFactor fuse_conditional_wep(const ConditionalPdf& ci, const ConditionalPdf& cj,
                                 double omega, bool selected, int region,
                                 const FusionParams& params) {
  if (omega < 0.0 || omega > 1.0)
    throw NumericalError("hybrid_wep_fuse: omega outside [0,1] for region " +
                         std::to_string(region));
  if (!selected) return {ci, 1.0};
  if (omega == 1.0) return {ci, 1.0};
  if (omega == 0.0) return {cj, 1.0};
  if (same_conditional(ci, cj)) return {ci, 1.0};

  if (std::holds_alternative<GridPdf>(ci)) {
    const GridPdf& gi = std::get<GridPdf>(ci);
    const GridPdf& gj = std::get<GridPdf>(cj);
    if (!gi.same_grid(gj)) throw DimensionError("hybrid_wep_fuse: conditional grids differ");
    double eta = 0.0;
    std::vector<double> mass(gi.size(), 0.0);
    for (std::size_t k = 0; k < gi.size(); ++k) {
      if (gi.mass(k) > 0.0 && gj.mass(k) > 0.0) {
        mass[k] = std::exp(omega * std::log(gi.mass(k)) + (1.0 - omega) * std::log(gj.mass(k)));
        eta += mass[k];
      }
    }
    if (eta <= 0.0)
      throw NumericalError("hybrid_wep_fuse: disjoint supports in region " +
                           std::to_string(region));
    return {GridPdf(gi.axes(), std::move(mass)), eta};
  }

  GmFusionResult res = gm_wep_fuse(std::get<GaussianMixture>(ci),
                                   std::get<GaussianMixture>(cj), omega, params);
  return {std::move(res.mixture), std::exp(res.log_eta)};
}

DiscreteDist normalized_dist(std::vector<double> weights, const char* who) {
  double total = 0.0;
  for (double w : weights) total += w;
  if (!(total > 0.0) || !std::isfinite(total))
    throw NumericalError(std::string(who) + ": degenerate region weights");
  for (double& w : weights) w /= total;
  return DiscreteDist(std::move(weights));
}

}  // namespace

bool HybridBelief::grid_backed() const {
  return !conditionals.empty() && std::holds_alternative<GridPdf>(conditionals.front());
}

const GridPdf& HybridBelief::grid_conditional(int r) const {
  return std::get<GridPdf>(conditionals[static_cast<size_t>(r)]);
}

void HybridBelief::validate() const {
  if (static_cast<int>(conditionals.size()) != regions.size())
    throw DimensionError("HybridBelief: one conditional required per region");
  const std::size_t kind = conditionals.front().index();
  for (const auto& c : conditionals)
    if (c.index() != kind)
      throw ConfigError("HybridBelief: conditionals must be homogeneous");
}

bool FactorSelector::contains(int r) const {
  return std::find(regions.begin(), regions.end(), r) != regions.end();
}

FactorSelector FactorSelector::all(int num_regions) {
  FactorSelector s;
  for (int r = 0; r < num_regions; ++r) s.regions.push_back(r);
  s.include_region_dist = true;
  return s;
}

std::vector<double> hybrid_joint_masses(const HybridBelief& b) {
  if (!b.grid_backed())
    throw ConfigError("hybrid_joint_masses: grid-backed belief required");
  std::vector<double> joint;
  for (int r = 0; r < b.num_regions(); ++r) {
    const GridPdf& g = b.grid_conditional(r);
    const double w = b.regions.prob(r);
    for (double m : g.masses()) joint.push_back(w * m);
  }
  return joint;
}

HybridBelief hybrid_exact_fuse(const HybridBelief& b_i, const HybridBelief& b_j,
                               const HybridBelief& b_c, const FactorSelector& select,
                               const FusionParams& params) {
  b_i.validate();
  b_j.validate();
  b_c.validate();
  const int nr = b_i.num_regions();
  if (b_j.num_regions() != nr || b_c.num_regions() != nr)
    throw DimensionError("hybrid_exact_fuse: region counts differ");

  std::vector<ConditionalPdf> fused;
  std::vector<double> weights(static_cast<size_t>(nr));
  fused.reserve(static_cast<size_t>(nr));
  for (int r = 0; r < nr; ++r) {
    FusedFactor f = fuse_conditional_exact(b_i.conditionals[static_cast<size_t>(r)],
                                           b_j.conditionals[static_cast<size_t>(r)],
                                           b_c.conditionals[static_cast<size_t>(r)],
                                           select.contains(r), r, params);
    fused.push_back(std::move(f.pdf));
    const double pc = b_c.regions.prob(r);
    if (pc <= 0.0 && b_i.regions.prob(r) * b_j.regions.prob(r) > 0.0)
      throw NumericalError("hybrid_exact_fuse: zero common region weight for region " +
                           std::to_string(r));
    weights[static_cast<size_t>(r)] =
        pc > 0.0 ? b_i.regions.prob(r) * b_j.regions.prob(r) / pc * f.eta : 0.0;
  }
  return HybridBelief{normalized_dist(std::move(weights), "hybrid_exact_fuse"),
                      std::move(fused)};
}

HybridBelief hybrid_wep_fuse(const HybridBelief& b_i, const HybridBelief& b_j,
                             const OmegaAssignment& omega, const FactorSelector& select,
                             const FusionParams& params) {
  b_i.validate();
  b_j.validate();
  const int nr = b_i.num_regions();
  if (b_j.num_regions() != nr)
    throw DimensionError("hybrid_wep_fuse: region counts differ");
  if (static_cast<int>(omega.omega_conditional.size()) != nr)
    throw ConfigError("hybrid_wep_fuse: one conditional omega required per region");
  if (omega.omega_region < 0.0 || omega.omega_region > 1.0)
    throw NumericalError("hybrid_wep_fuse: omega_R outside [0,1]");

  std::vector<ConditionalPdf> fused;
  std::vector<double> weights(static_cast<size_t>(nr));
  fused.reserve(static_cast<size_t>(nr));
  const double wr = omega.omega_region;
  for (int r = 0; r < nr; ++r) {
    FusedFactor f = fuse_conditional_wep(b_i.conditionals[static_cast<size_t>(r)],
                                         b_j.conditionals[static_cast<size_t>(r)],
                                         omega.omega_conditional[static_cast<size_t>(r)],
                                         select.contains(r), r, params);
    fused.push_back(std::move(f.pdf));
    const double pi = b_i.regions.prob(r);
    const double pj = b_j.regions.prob(r);
    double w = 0.0;
    if (pi > 0.0 && pj > 0.0)
      w = std::exp(wr * std::log(pi) + (1.0 - wr) * std::log(pj)) * f.eta;
    else if (wr == 1.0)
      w = pi * f.eta;
    else if (wr == 0.0)
      w = pj * f.eta;
    weights[static_cast<size_t>(r)] = w;
  }
  return HybridBelief{normalized_dist(std::move(weights), "hybrid_wep_fuse"),
                      std::move(fused)};
}

HybridKld hybrid_joint_kld(const HybridBelief& truth, const HybridBelief& approx) {
  truth.validate();
  approx.validate();
  if (!truth.grid_backed() || !approx.grid_backed())
    throw ConfigError("hybrid_joint_kld: grid-backed beliefs required");
  const int nr = truth.num_regions();
  if (approx.num_regions() != nr)
    throw DimensionError("hybrid_joint_kld: region counts differ");

  HybridKld out;
  out.region_term = kld_masses(truth.regions.probs(), approx.regions.probs());
  out.per_region.resize(static_cast<size_t>(nr));
  out.total = out.region_term;
  for (int r = 0; r < nr; ++r) {
    const double k = grid_kld(truth.grid_conditional(r), approx.grid_conditional(r));
    out.per_region[static_cast<size_t>(r)] = k;
    out.total += truth.regions.prob(r) * k;
  }
  return out;
}

std::vector<OmegaSweepRow> omega_r_sweep(const HybridBelief& b_i, const HybridBelief& b_j,
                                         const HybridBelief& b_c,
                                         const OmegaAssignment& fixed_conditionals,
                                         const std::vector<double>& omega_grid,
                                         const FactorSelector& select) {
  const HybridBelief exact = hybrid_exact_fuse(b_i, b_j, b_c, select);
  std::vector<OmegaSweepRow> rows;
  rows.reserve(omega_grid.size());
  for (double w : omega_grid) {
    OmegaAssignment fac = fixed_conditionals;
    fac.omega_region = w;
    const HybridBelief fused_fac = hybrid_wep_fuse(b_i, b_j, fac, select);
    const HybridKld kf = hybrid_joint_kld(exact, fused_fac);

    OmegaAssignment tied;
    tied.omega_region = w;
    tied.omega_conditional.assign(static_cast<size_t>(b_i.num_regions()), w);
    const HybridBelief fused_joint =
        hybrid_wep_fuse(b_i, b_j, tied, FactorSelector::all(b_i.num_regions()));
    const HybridKld kj = hybrid_joint_kld(exact, fused_joint);

    rows.push_back(OmegaSweepRow{w, kf.total, kf.region_term, kj.total, kj.region_term});
  }
  return rows;
}

HybridBelief hybrid_local_update(const HybridBelief& b, const Observation& obs,
                                 const SensorModel& sensor, const Eigen::Vector2d& pose,
                                 const std::vector<RegionRect>& regions) {
  b.validate();
  sensor.validate();
  if (!b.grid_backed())
    throw ConfigError("hybrid_local_update: grid-backed belief required");
  if (static_cast<int>(regions.size()) != b.num_regions())
    throw DimensionError("hybrid_local_update: region geometry count mismatch");

  bool any_in_range = false;
  for (const auto& rect : regions)
    any_in_range = any_in_range || rect.intersects_disc(pose, sensor.range);
  // 'No detection' carries likelihood 1 outside the footprint, so a fully
  // out-of-range pose is a no-op; a detection there contradicts the model.
  if (!any_in_range) {
    if (obs == Observation::kDetection)
      throw NumericalError("hybrid_local_update: detection outside sensor range");
    return b;
  }

  std::vector<ConditionalPdf> conds;
  std::vector<double> weights(b.regions.probs());
  conds.reserve(b.conditionals.size());
  for (int r = 0; r < b.num_regions(); ++r) {
    if (!regions[static_cast<size_t>(r)].intersects_disc(pose, sensor.range)) {
      conds.push_back(b.conditionals[static_cast<size_t>(r)]);
      if (obs == Observation::kDetection) weights[static_cast<size_t>(r)] = 0.0;
      continue;
    }
    const GridPdf& g = b.grid_conditional(r);
    if (g.dim() != 2)
      throw DimensionError("hybrid_local_update: 2-D conditionals required");
    std::vector<double> mass(g.size());
    double marginal = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
      const Eigen::Vector2d c = g.center(k);
      mass[k] = g.mass(k) * sensor.likelihood(obs, c, pose);
      marginal += mass[k];
    }
    if (marginal <= 0.0)
      throw NumericalError("hybrid_local_update: observation impossible under belief in "
                           "region " + std::to_string(r));
    conds.push_back(GridPdf(g.axes(), std::move(mass)));
    weights[static_cast<size_t>(r)] *= marginal;
  }
  return HybridBelief{normalized_dist(std::move(weights), "hybrid_local_update"),
                      std::move(conds)};
}

}  // namespace ddf
