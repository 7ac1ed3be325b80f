#include "ddf/fixtures.hpp"

#include <cmath>

#include "ddf/rng.hpp"

namespace ddf {
namespace fixtures {

GaussianMixture make_demo_mixture(int n, std::uint64_t seed, double spread) {
  SplitMix64 rng(substream_seed(seed, 0xf1f5u));
  std::vector<WeightedGaussian> comps;
  comps.reserve(static_cast<std::size_t>(n));
  std::vector<double> weights;
  double wsum = 0.0;
  for (int q = 0; q < n; ++q) {
    const double w = 0.5 + rng.uniform();
    weights.push_back(w);
    wsum += w;
  }
  for (int q = 0; q < n; ++q) {
    Eigen::Vector2d mu(spread * (2.0 * rng.uniform() - 1.0),
                       spread * (2.0 * rng.uniform() - 1.0));
    const double theta = rng.uniform() * 2.0 * M_PI;
    const double s1 = 0.3 + 1.2 * rng.uniform();
    const double s2 = 0.3 + 1.2 * rng.uniform();
    Eigen::Matrix2d rot;
    rot << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
    Eigen::Matrix2d cov = rot * Eigen::Vector2d(s1, s2).asDiagonal() * rot.transpose();
    cov = 0.5 * (cov + cov.transpose());
    comps.push_back(WeightedGaussian{weights[static_cast<size_t>(q)] / wsum,
                                     Gaussian(mu, cov)});
  }
  return GaussianMixture(std::move(comps));
}

std::vector<GridAxis> demo_domain(int cells, double spread) {
  const double half = spread + 5.0;
  return {GridAxis{-half, half, cells}, GridAxis{-half, half, cells}};
}

Scenario make_search_scenario(FusionMode mode, int steps, int cells_per_axis) {
  Scenario s;
  // 3x2 partition of a 30x20 world; region indices 0..5 laid out as
  //   0 1 2   (top row,    y in [10,20])
  //   3 4 5   (bottom row, y in [0,10])
  s.regions = {
      RegionRect{0.0, 10.0, 10.0, 20.0},  RegionRect{10.0, 20.0, 10.0, 20.0},
      RegionRect{20.0, 30.0, 10.0, 20.0}, RegionRect{0.0, 10.0, 0.0, 10.0},
      RegionRect{10.0, 20.0, 0.0, 10.0},  RegionRect{20.0, 30.0, 0.0, 10.0},
  };
  s.region_prior = {0.1190, 0.1190, 0.2415, 0.1497, 0.1735, 0.1973};
  s.cond_cells_x = cells_per_axis;
  s.cond_cells_y = cells_per_axis;
  s.prior_bumps = PriorBumpSpec{3, 1.0, 0.6, 7};
  s.sensor = SensorModel{1.5, 0.8, 1.0};

  const int leg = std::max(1, steps / 4);
  const int last = steps - 3 * leg;

  // Robot 1: counterclockwise inward spiral through regions 5, 2, 1, 4
  // (bottom-middle, top-middle, top-left, bottom-left). Its footprint never
  // reaches the right column.
  AgentConfig r1;
  r1.id = 1;
  r1.trajectory.waypoints = {{15.0, 5.0}, {15.0, 15.0}, {5.0, 15.0}, {5.0, 5.0}, {12.0, 7.0}};
  r1.trajectory.steps_per_leg = {leg, leg, leg, last};

  // Robot 2: counterclockwise inward spiral through regions 3, 2, 5, 6
  // (top-right, top-middle, bottom-middle, bottom-right); footprint never
  // reaches the left column. Regions 2 and 5 are visited by both robots.
  AgentConfig r2;
  r2.id = 2;
  r2.trajectory.waypoints = {{25.0, 15.0}, {15.0, 15.0}, {15.0, 5.0}, {25.0, 5.0}, {23.0, 12.0}};
  r2.trajectory.steps_per_leg = {leg, leg, leg, last};

  s.agents = {r1, r2};
  s.links = {{1, 2}};
  s.mode = mode;
  s.fixed_omega = 0.5;
  s.exchanges = {ExchangeEvent{steps, 1, 2}};
  s.steps = steps;
  s.seed = 20130617;
  s.target_present = false;
  return s;
}

}  // namespace fixtures
}  // namespace ddf
