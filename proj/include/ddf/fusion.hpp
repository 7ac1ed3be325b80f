#pragma once

#include <utility>

#include "ddf/grid.hpp"

namespace ddf {

/// Exact decentralized fusion: cellwise p_i * p_j / p_c, renormalized.
/// Recovers the centralized Bayes posterior when p_c is the true common
/// information between the two agents.
GridPdf exact_fuse(const GridPdf& p_i, const GridPdf& p_j, const GridPdf& p_c);

/// Conservative weighted-exponential-product fusion:
/// cellwise p_i^w * p_j^(1-w), renormalized. Endpoints return exact copies.
GridPdf wep_fuse(const GridPdf& p_i, const GridPdf& p_j, double omega);

/// Conservative estimate of the common-information pdf,
/// cellwise p_i^(1-w) * p_j^w. Satisfies
/// exact_fuse(p_i, p_j, estimate_common_info(p_i, p_j, w)) == wep_fuse(p_i, p_j, w).
GridPdf estimate_common_info(const GridPdf& p_i, const GridPdf& p_j, double omega);

/// Criterion configuration for omega optimization. The only implemented
/// criterion is the minimax one-sided KLD balance.
struct OmegaCost {
  double tolerance = 1e-4;  // must lie in (0, 0.1]
};

/// argmin over omega in [0,1] of max(KLD(wep||p_i), KLD(wep||p_j)),
/// golden-section search; ties broken toward 0.5.
double optimize_omega(const GridPdf& p_i, const GridPdf& p_j, const OmegaCost& cost = {});

/// Same criterion over bare mass vectors (discrete distributions or
/// flattened joint grids).
double optimize_omega_masses(const std::vector<double>& p_i, const std::vector<double>& p_j,
                             const OmegaCost& cost = {});

/// argmin over omega of KLD(target || wep(p_i, p_j, omega)): the best WEP
/// approximation of a known fusion target. Convex in omega, so the same
/// golden-section machinery applies.
double optimize_omega_toward(const std::vector<double>& target, const std::vector<double>& p_i,
                             const std::vector<double>& p_j, const OmegaCost& cost = {});

/// WEP power product on bare mass vectors, renormalized.
std::vector<double> wep_masses(const std::vector<double>& p_i, const std::vector<double>& p_j,
                               double omega);

/// Per-link common-information bookkeeping for exact DDF (channel filter).
/// Valid for tree topologies only; topology enforcement lives in the
/// simulator's schedule validation.
template <class Pdf>
struct ChannelState {
  int agent_a;
  int agent_b;
  Pdf common;
};

/// After an exchange the fused pdf is exactly what both endpoints share.
template <class Pdf>
ChannelState<Pdf> channel_update(ChannelState<Pdf> ch, Pdf fused) {
  ch.common = std::move(fused);
  return ch;
}

}  // namespace ddf
