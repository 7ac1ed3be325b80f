#pragma once

#include "ddf/mixture.hpp"
#include "ddf/sim.hpp"

namespace ddf {
namespace fixtures {

/// Deterministic 2-D demo mixture: `n` mixands with means spread over
/// [-spread, spread]^2 and randomly oriented covariances. Seeds are the only
/// source of variation, so the same call always yields the same mixture.
GaussianMixture make_demo_mixture(int n, std::uint64_t seed, double spread = 5.0);

/// Domain that comfortably contains the demo mixtures at a given spread.
std::vector<GridAxis> demo_domain(int cells, double spread = 5.0);

/// Two-robot, six-region search reproduction: 3x2 rectangular region
/// partition of a 30x20 world, counterclockwise inward spiral trajectories,
/// region prior [0.1190, 0.1190, 0.2415, 0.1497, 0.1735, 0.1973], one
/// exchange at the final step.
Scenario make_search_scenario(FusionMode mode = FusionMode::kExact, int steps = 600,
                              int cells_per_axis = 100);

}  // namespace fixtures
}  // namespace ddf
