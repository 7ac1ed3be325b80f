#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "ddf/hybrid.hpp"
#include "ddf/rng.hpp"

using namespace ddf;

namespace {

const std::vector<GridAxis> kAxes{{0.0, 3.0, 15}, {0.0, 2.0, 12}};

GridPdf random_grid(SplitMix64& rng, const std::vector<GridAxis>& axes = kAxes) {
  std::size_t n = 1;
  for (const auto& ax : axes) n *= static_cast<std::size_t>(ax.cells);
  std::vector<double> mass(n);
  for (auto& m : mass) m = 0.05 + rng.uniform();
  return GridPdf(axes, std::move(mass));
}

DiscreteDist random_regions(SplitMix64& rng, int n) {
  std::vector<double> w(static_cast<size_t>(n));
  double s = 0.0;
  for (auto& v : w) {
    v = 0.1 + rng.uniform();
    s += v;
  }
  for (auto& v : w) v /= s;
  return DiscreteDist(std::move(w));
}

HybridBelief random_hybrid(SplitMix64& rng, int n_regions) {
  std::vector<ConditionalPdf> conds;
  for (int r = 0; r < n_regions; ++r) conds.push_back(random_grid(rng));
  return HybridBelief{random_regions(rng, n_regions), std::move(conds)};
}

std::vector<double> normalized(std::vector<double> v) {
  const double s = std::accumulate(v.begin(), v.end(), 0.0);
  for (auto& x : v) x /= s;
  return v;
}

// Whole-joint oracle for exact fusion: elementwise ratio on the flattened
// (x, R) masses.
std::vector<double> joint_exact(const HybridBelief& bi, const HybridBelief& bj,
                                const HybridBelief& bc) {
  const auto ji = hybrid_joint_masses(bi);
  const auto jj = hybrid_joint_masses(bj);
  const auto jc = hybrid_joint_masses(bc);
  std::vector<double> out(ji.size());
  for (std::size_t k = 0; k < ji.size(); ++k) out[k] = ji[k] * jj[k] / jc[k];
  return normalized(std::move(out));
}

}  // namespace

TEST_CASE("factorized exact fusion equals whole-joint grid fusion") {
  SplitMix64 rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    const int nr = 2 + static_cast<int>(rng.next() % 5);  // 2..6 regions
    const HybridBelief bi = random_hybrid(rng, nr);
    const HybridBelief bj = random_hybrid(rng, nr);
    const HybridBelief bc = random_hybrid(rng, nr);
    const HybridBelief fused = hybrid_exact_fuse(bi, bj, bc, FactorSelector::all(nr));
    CHECK(kld_masses(joint_exact(bi, bj, bc), hybrid_joint_masses(fused)) < 1e-9);
  }
}

TEST_CASE("factorized WEP with tied omegas equals whole-joint WEP") {
  SplitMix64 rng(22);
  for (double w : {0.0, 0.25, 0.56922, 1.0}) {
    const int nr = 4;
    const HybridBelief bi = random_hybrid(rng, nr);
    const HybridBelief bj = random_hybrid(rng, nr);
    OmegaAssignment tied;
    tied.omega_region = w;
    tied.omega_conditional.assign(nr, w);
    const HybridBelief fused = hybrid_wep_fuse(bi, bj, tied, FactorSelector::all(nr));
    const auto truth = wep_masses(hybrid_joint_masses(bi), hybrid_joint_masses(bj), w);
    CHECK(kld_masses(truth, hybrid_joint_masses(fused)) < 1e-12);
  }
}

TEST_CASE("exclusive information is resolved by bit-exact overwrite") {
  SplitMix64 rng(23);
  const int nr = 4;
  const HybridBelief bc = random_hybrid(rng, nr);

  // Agent i has news in regions 0 and 1, agent j in regions 2 and 3; both
  // carry the common conditionals elsewhere.
  HybridBelief bi = bc;
  HybridBelief bj = bc;
  bi.conditionals[0] = random_grid(rng);
  bi.conditionals[1] = random_grid(rng);
  bj.conditionals[2] = random_grid(rng);
  bj.conditionals[3] = random_grid(rng);
  bi.regions = random_regions(rng, nr);
  bj.regions = random_regions(rng, nr);

  // No region needs actual conditional fusion: selecting only the region
  // factor suffices, the conditionals resolve exclusively.
  FactorSelector sel;
  sel.include_region_dist = true;
  const HybridBelief fused = hybrid_exact_fuse(bi, bj, bc, sel);
  CHECK(fused.grid_conditional(0).masses() == bi.grid_conditional(0).masses());
  CHECK(fused.grid_conditional(1).masses() == bi.grid_conditional(1).masses());
  CHECK(fused.grid_conditional(2).masses() == bj.grid_conditional(2).masses());
  CHECK(fused.grid_conditional(3).masses() == bj.grid_conditional(3).masses());

  // And it still matches the whole-joint oracle.
  CHECK(kld_masses(joint_exact(bi, bj, bc), hybrid_joint_masses(fused)) < 1e-9);
}

TEST_CASE("unselected region with two-sided news is rejected") {
  SplitMix64 rng(24);
  const int nr = 3;
  const HybridBelief bc = random_hybrid(rng, nr);
  HybridBelief bi = bc;
  HybridBelief bj = bc;
  bi.conditionals[1] = random_grid(rng);
  bj.conditionals[1] = random_grid(rng);
  FactorSelector sel;  // region 1 not selected
  sel.regions = {0, 2};
  CHECK_THROWS_AS(hybrid_exact_fuse(bi, bj, bc, sel), ConfigError);
  sel.regions = {0, 1, 2};
  CHECK_NOTHROW(hybrid_exact_fuse(bi, bj, bc, sel));
}

TEST_CASE("dropping the denormalization terms visibly distorts the fusion") {
  // Negative control: the fused region weights must carry eta(r). Replacing
  // them with the naive p_i(r) p_j(r) / p_c(r) (no eta) gives a measurably
  // different joint whenever eta varies across regions.
  SplitMix64 rng(25);
  const int nr = 4;
  const HybridBelief bi = random_hybrid(rng, nr);
  const HybridBelief bj = random_hybrid(rng, nr);
  const HybridBelief bc = random_hybrid(rng, nr);
  const HybridBelief fused = hybrid_exact_fuse(bi, bj, bc, FactorSelector::all(nr));

  std::vector<double> naive(static_cast<size_t>(nr));
  for (int r = 0; r < nr; ++r)
    naive[static_cast<size_t>(r)] =
        bi.regions.prob(r) * bj.regions.prob(r) / bc.regions.prob(r);
  const HybridBelief no_eta{DiscreteDist(normalized(naive)), fused.conditionals};

  const auto truth = joint_exact(bi, bj, bc);
  CHECK(kld_masses(truth, hybrid_joint_masses(fused)) < 1e-9);
  CHECK(kld_masses(truth, hybrid_joint_masses(no_eta)) > 1e-4);
}

TEST_CASE("hybrid_joint_kld decomposes the flattened joint divergence") {
  SplitMix64 rng(26);
  const HybridBelief p = random_hybrid(rng, 5);
  const HybridBelief q = random_hybrid(rng, 5);
  const HybridKld k = hybrid_joint_kld(p, q);
  const double flat = kld_masses(hybrid_joint_masses(p), hybrid_joint_masses(q));
  CHECK(k.total == doctest::Approx(flat).epsilon(1e-9));
  CHECK(k.region_term == doctest::Approx(kld_masses(p.regions.probs(), q.regions.probs()))
                             .epsilon(1e-12));
  // Matching conditionals leave only the region term.
  const HybridBelief q2{q.regions, p.conditionals};
  const HybridKld k2 = hybrid_joint_kld(p, q2);
  CHECK(k2.total == doctest::Approx(k2.region_term).epsilon(1e-12));
  for (double v : k2.per_region) CHECK(v == 0.0);
  // Hand-checked two-region value: KLD((0.3,0.7) || (0.5,0.5)).
  const double expect = 0.3 * std::log(0.3 / 0.5) + 0.7 * std::log(0.7 / 0.5);
  const GridPdf shared = random_grid(rng);
  const HybridBelief a{DiscreteDist({0.3, 0.7}), {shared, shared}};
  const HybridBelief b{DiscreteDist({0.5, 0.5}), {shared, shared}};
  CHECK(hybrid_joint_kld(a, b).total == doctest::Approx(expect).epsilon(1e-12));
}

namespace {

// Belief whose conditional domains coincide with the region rectangles, the
// way the search scenario lays them out.
HybridBelief rect_hybrid(SplitMix64& rng, const std::vector<RegionRect>& rects) {
  std::vector<ConditionalPdf> conds;
  for (const auto& r : rects)
    conds.push_back(random_grid(rng, {{r.xlo, r.xhi, 12}, {r.ylo, r.yhi, 10}}));
  return HybridBelief{random_regions(rng, static_cast<int>(rects.size())),
                      std::move(conds)};
}

}  // namespace

TEST_CASE("hybrid_local_update: out-of-range pose is a no-op") {
  SplitMix64 rng(27);
  const std::vector<RegionRect> rects{{0.0, 1.5, 0.0, 2.0}, {1.5, 3.0, 0.0, 2.0}};
  HybridBelief b = rect_hybrid(rng, rects);
  const SensorModel sensor{0.4, 0.8, 1.0};
  const Eigen::Vector2d far(10.0, 10.0);
  const HybridBelief after =
      hybrid_local_update(b, Observation::kNoDetection, sensor, far, rects);
  CHECK(after.regions.probs() == b.regions.probs());
  for (int r = 0; r < 2; ++r)
    CHECK(after.grid_conditional(r).masses() == b.grid_conditional(r).masses());
}

TEST_CASE("hybrid_local_update matches a direct Bayes update of the joint") {
  SplitMix64 rng(28);
  const std::vector<RegionRect> rects{{0.0, 1.5, 0.0, 2.0}, {1.5, 3.0, 0.0, 2.0}};
  const HybridBelief b = rect_hybrid(rng, rects);
  const SensorModel sensor{0.7, 0.8, 0.5};
  const Eigen::Vector2d pose(0.7, 1.0);

  const HybridBelief after =
      hybrid_local_update(b, Observation::kNoDetection, sensor, pose, rects);

  // Direct joint Bayes oracle over all (cell, region) pairs.
  std::vector<double> joint;
  for (int r = 0; r < 2; ++r) {
    const GridPdf& g = b.grid_conditional(r);
    for (std::size_t k = 0; k < g.size(); ++k) {
      const Eigen::Vector2d c = g.center(k);
      joint.push_back(b.regions.prob(r) * g.mass(k) *
                      sensor.likelihood(Observation::kNoDetection, c, pose));
    }
  }
  CHECK(kld_masses(normalized(joint), hybrid_joint_masses(after)) < 1e-12);

  // 'No detection' near the sensor drains probability from the covered
  // region and from cells near the pose.
  CHECK(after.regions.prob(0) < b.regions.prob(0));
  CHECK(after.regions.prob(1) > b.regions.prob(1));

  // A detection concentrates it instead.
  const HybridBelief hit =
      hybrid_local_update(b, Observation::kDetection, sensor, pose, rects);
  CHECK(hit.regions.prob(0) > b.regions.prob(0));
}

TEST_CASE("repeated no-detections drain the observed region monotonically") {
  SplitMix64 rng(29);
  const std::vector<RegionRect> rects{{0.0, 1.5, 0.0, 2.0}, {1.5, 3.0, 0.0, 2.0}};
  HybridBelief b = rect_hybrid(rng, rects);
  const SensorModel sensor{0.7, 0.8, 0.5};
  const Eigen::Vector2d pose(0.7, 1.0);
  double prev = b.regions.prob(0);
  for (int t = 0; t < 10; ++t) {
    b = hybrid_local_update(b, Observation::kNoDetection, sensor, pose, rects);
    CHECK(b.regions.prob(0) < prev);
    prev = b.regions.prob(0);
  }
}

TEST_CASE("omega_r_sweep: factorized beats or ties the whole-joint curve") {
  SplitMix64 rng(30);
  const int nr = 3;
  const HybridBelief bc = random_hybrid(rng, nr);
  // Bayes-consistent agent beliefs: common belief times private likelihoods,
  // so that exact fusion is the natural target.
  const auto perturb = [&](const HybridBelief& base) {
    HybridBelief out = base;
    std::vector<double> w(static_cast<size_t>(nr));
    for (int r = 0; r < nr; ++r) {
      const GridPdf& g = std::get<GridPdf>(base.conditionals[static_cast<size_t>(r)]);
      std::vector<double> m(g.masses());
      double lik = 0.4 + rng.uniform();
      double s = 0.0;
      for (auto& v : m) {
        v *= 0.2 + rng.uniform();
        s += v;
      }
      w[static_cast<size_t>(r)] = base.regions.prob(r) * lik * s;
      out.conditionals[static_cast<size_t>(r)] = GridPdf(g.axes(), std::move(m));
    }
    out.regions = DiscreteDist(normalized(std::move(w)));
    return out;
  };
  const HybridBelief bi = perturb(bc);
  const HybridBelief bj = perturb(bc);

  OmegaAssignment fixed;
  fixed.omega_conditional.assign(nr, 0.5);
  std::vector<double> grid;
  for (int k = 0; k <= 20; ++k) grid.push_back(k / 20.0);
  const auto rows = omega_r_sweep(bi, bj, bc, fixed, grid, FactorSelector::all(nr));
  REQUIRE(rows.size() == grid.size());

  double best_fac = 1e9, best_joint = 1e9;
  for (const auto& row : rows) {
    CHECK(std::isfinite(row.factorized_kld));
    CHECK(std::isfinite(row.whole_joint_kld));
    CHECK(row.factorized_kld >= 0.0);
    best_fac = std::min(best_fac, row.factorized_kld);
    best_joint = std::min(best_joint, row.whole_joint_kld);
  }
  CHECK(best_fac <= best_joint + 1e-12);
}
