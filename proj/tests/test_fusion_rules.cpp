#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <vector>

#include "ddf/fusion.hpp"
#include "ddf/rng.hpp"

using namespace ddf;

namespace {

GridPdf gauss_grid(double mu, double var, const std::vector<GridAxis>& axes) {
  return GridPdf::from_density(
      [&](const Eigen::VectorXd& x) {
        const double d = x[0] - mu;
        return std::exp(-0.5 * d * d / var) / std::sqrt(2.0 * M_PI * var);
      },
      axes);
}

const std::vector<GridAxis> kAxes{{-12.0, 12.0, 1200}};

// A random, strictly positive density on kAxes: log density is a mixture of
// a few random bumps plus a floor, so all fusion ratios are well defined.
GridPdf random_pdf(SplitMix64& rng) {
  struct Bump {
    double mu, var, amp;
  };
  std::vector<Bump> bumps;
  const int n = 2 + static_cast<int>(rng.next() % 3);
  for (int i = 0; i < n; ++i)
    bumps.push_back({-8.0 + 16.0 * rng.uniform(), 0.3 + 2.0 * rng.uniform(),
                     0.2 + rng.uniform()});
  return GridPdf::from_density(
      [bumps](const Eigen::VectorXd& x) {
        double v = 1e-3;
        for (const auto& b : bumps)
          v += b.amp * std::exp(-0.5 * (x[0] - b.mu) * (x[0] - b.mu) / b.var);
        return v;
      },
      kAxes);
}

double max_abs_mass_diff(const GridPdf& a, const GridPdf& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a.mass(i) - b.mass(i)));
  return m;
}

}  // namespace

TEST_CASE("exact_fuse: fusing against the common pdf is the identity") {
  SplitMix64 rng(11);
  const GridPdf p_i = random_pdf(rng);
  const GridPdf p_j = random_pdf(rng);
  // p_c == p_j: agent j contributes nothing new, result is p_i.
  const GridPdf f = exact_fuse(p_i, p_j, p_j);
  CHECK(max_abs_mass_diff(f, p_i) < 1e-12);
  // Fully redundant agents: result is the shared pdf.
  const GridPdf g = exact_fuse(p_i, p_i, p_i);
  CHECK(max_abs_mass_diff(g, p_i) < 1e-12);
}

TEST_CASE("exact_fuse recovers the centralized posterior") {
  // Two agents start from a shared prior and incorporate independent
  // likelihoods. Exact fusion with the prior as common information must equal
  // the centralized posterior prior * L1 * L2, computed independently here.
  const auto prior_f = [](const Eigen::VectorXd& x) {
    return std::exp(-0.5 * x[0] * x[0] / 9.0);
  };
  const auto l1 = [](const Eigen::VectorXd& x) {
    return 0.05 + std::exp(-0.5 * (x[0] - 1.5) * (x[0] - 1.5));
  };
  const auto l2 = [](const Eigen::VectorXd& x) {
    return 0.05 + std::exp(-0.5 * (x[0] + 2.0) * (x[0] + 2.0) / 4.0);
  };
  const GridPdf prior = GridPdf::from_density(prior_f, kAxes);
  const GridPdf p_i = GridPdf::from_density(
      [&](const Eigen::VectorXd& x) { return prior_f(x) * l1(x); }, kAxes);
  const GridPdf p_j = GridPdf::from_density(
      [&](const Eigen::VectorXd& x) { return prior_f(x) * l2(x); }, kAxes);
  const GridPdf central = GridPdf::from_density(
      [&](const Eigen::VectorXd& x) { return prior_f(x) * l1(x) * l2(x); }, kAxes);

  const GridPdf fused = exact_fuse(p_i, p_j, prior);
  CHECK(grid_kld(central, fused) < 1e-12);
  CHECK(max_abs_mass_diff(fused, central) < 1e-12);
}

TEST_CASE("exact_fuse is symmetric in its agent arguments") {
  SplitMix64 rng(12);
  const GridPdf p_i = random_pdf(rng);
  const GridPdf p_j = random_pdf(rng);
  const GridPdf p_c = random_pdf(rng);
  CHECK(max_abs_mass_diff(exact_fuse(p_i, p_j, p_c), exact_fuse(p_j, p_i, p_c)) < 1e-12);
}

TEST_CASE("exact_fuse rejects zero common mass where the product is positive") {
  std::vector<GridAxis> ax{{0.0, 3.0, 3}};
  const GridPdf p(ax, {0.5, 0.3, 0.2});
  const GridPdf c(ax, {0.0, 0.5, 0.5});
  CHECK_THROWS_AS(exact_fuse(p, p, c), NumericalError);
}

TEST_CASE("wep_fuse endpoints return the unfused marginals") {
  SplitMix64 rng(13);
  const GridPdf p_i = random_pdf(rng);
  const GridPdf p_j = random_pdf(rng);
  CHECK(max_abs_mass_diff(wep_fuse(p_i, p_j, 1.0), p_i) == 0.0);
  CHECK(max_abs_mass_diff(wep_fuse(p_i, p_j, 0.0), p_j) == 0.0);
  CHECK_THROWS_AS(wep_fuse(p_i, p_j, 1.5), ConfigError);
  CHECK_THROWS_AS(wep_fuse(p_i, p_j, -0.1), ConfigError);
}

TEST_CASE("wep_fuse of N(0,1) and N(2,1) at omega=0.5 is N(1,1)") {
  // Closed form: the omega-weighted exponential product of Gaussians with
  // equal covariance keeps that covariance and interpolates the means.
  const GridPdf p_i = gauss_grid(0.0, 1.0, kAxes);
  const GridPdf p_j = gauss_grid(2.0, 1.0, kAxes);
  const GridPdf expect = gauss_grid(1.0, 1.0, kAxes);
  const GridPdf f = wep_fuse(p_i, p_j, 0.5);
  CHECK(grid_kld(expect, f) < 1e-10);
  CHECK(std::abs(f.mean()[0] - 1.0) < 1e-9);
  CHECK(std::abs(f.covariance()(0, 0) - 1.0) < 1e-3);  // midpoint-rule bias only
}

TEST_CASE("common-info estimate turns exact fusion into WEP fusion") {
  // exact_fuse(p_i, p_j, p_hat_c) with p_hat_c ~ p_i^(1-w) p_j^w must equal
  // wep_fuse(p_i, p_j, w): the two rules are algebraic rewrites.
  SplitMix64 rng(14);
  for (int t = 0; t < 10; ++t) {
    const GridPdf p_i = random_pdf(rng);
    const GridPdf p_j = random_pdf(rng);
    const double w = 0.05 + 0.9 * rng.uniform();
    const GridPdf via_exact = exact_fuse(p_i, p_j, estimate_common_info(p_i, p_j, w));
    const GridPdf direct = wep_fuse(p_i, p_j, w);
    CHECK(max_abs_mass_diff(via_exact, direct) < 1e-10);
  }
}

TEST_CASE("optimize_omega equals a brute-force scan of the minimax objective") {
  SplitMix64 rng(15);
  for (int t = 0; t < 5; ++t) {
    const GridPdf p_i = random_pdf(rng);
    const GridPdf p_j = random_pdf(rng);
    const double w = optimize_omega(p_i, p_j);

    double best_w = 0.0;
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= 10000; ++k) {
      const double cand = k / 10000.0;
      const GridPdf f = wep_fuse(p_i, p_j, cand);
      const double cost = std::max(grid_kld(f, p_i), grid_kld(f, p_j));
      if (cost < best) {
        best = cost;
        best_w = cand;
      }
    }
    CHECK(std::abs(w - best_w) < 1e-3);
  }
}

TEST_CASE("optimize_omega: mirror symmetry and redundancy tie") {
  SplitMix64 rng(16);
  const GridPdf p_i = random_pdf(rng);
  const GridPdf p_j = random_pdf(rng);
  const double w_ij = optimize_omega(p_i, p_j);
  const double w_ji = optimize_omega(p_j, p_i);
  CHECK(std::abs(w_ij + w_ji - 1.0) < 2e-4);
  // Identical inputs give a flat objective; the tie breaks to 0.5.
  CHECK(optimize_omega(p_i, p_i) == doctest::Approx(0.5).epsilon(1e-9));
  OmegaCost bad;
  bad.tolerance = 0.5;
  CHECK_THROWS_AS(optimize_omega(p_i, p_j, bad), ConfigError);
}

TEST_CASE("channel filter: three-agent chain reaches the centralized posterior") {
  // Chain 0 - 1 - 2. Each agent owns one private likelihood over a shared
  // prior. Sweeping exchanges leafward then back must leave every agent at
  // the centralized posterior, with no double counting through agent 1.
  const auto prior_f = [](const Eigen::VectorXd& x) {
    return std::exp(-0.5 * x[0] * x[0] / 16.0);
  };
  std::vector<std::function<double(double)>> like{
      [](double x) { return 0.1 + std::exp(-0.5 * (x - 2.0) * (x - 2.0)); },
      [](double x) { return 0.1 + std::exp(-0.5 * (x + 1.0) * (x + 1.0) / 2.0); },
      [](double x) { return 0.1 + std::exp(-0.5 * (x - 4.0) * (x - 4.0) / 3.0); }};

  const GridPdf prior = GridPdf::from_density(prior_f, kAxes);
  std::vector<GridPdf> belief;
  for (int a = 0; a < 3; ++a)
    belief.push_back(GridPdf::from_density(
        [&](const Eigen::VectorXd& x) { return prior_f(x) * like[a](x[0]); }, kAxes));
  const GridPdf central = GridPdf::from_density(
      [&](const Eigen::VectorXd& x) {
        return prior_f(x) * like[0](x[0]) * like[1](x[0]) * like[2](x[0]);
      },
      kAxes);

  std::map<std::pair<int, int>, ChannelState<GridPdf>> ch;
  ch.emplace(std::make_pair(0, 1), ChannelState<GridPdf>{0, 1, prior});
  ch.emplace(std::make_pair(1, 2), ChannelState<GridPdf>{1, 2, prior});
  const auto exchange = [&](int a, int b) {
    auto& c = ch.at({std::min(a, b), std::max(a, b)});
    const GridPdf fused = exact_fuse(belief[a], belief[b], c.common);
    belief[a] = fused;
    belief[b] = fused;
    c = channel_update(std::move(c), fused);
  };
  exchange(0, 1);
  exchange(1, 2);
  exchange(0, 1);

  for (int a = 0; a < 3; ++a) CHECK(grid_kld(central, belief[a]) < 1e-10);
}

TEST_CASE("channel filter: random five-agent trees reach consensus") {
  SplitMix64 rng(17);
  for (int trial = 0; trial < 5; ++trial) {
    const int n = 5;
    // Random labeled tree: attach each node to a random earlier node.
    std::vector<std::pair<int, int>> edges;
    for (int v = 1; v < n; ++v)
      edges.push_back({static_cast<int>(rng.next() % v), v});

    const auto prior_f = [](const Eigen::VectorXd& x) {
      return std::exp(-0.5 * x[0] * x[0] / 16.0);
    };
    std::vector<GridPdf> like;
    for (int a = 0; a < n; ++a) like.push_back(random_pdf(rng));
    const GridPdf prior = GridPdf::from_density(prior_f, kAxes);

    std::vector<std::vector<double>> belief(n);
    std::vector<double> central = prior.masses();
    for (int a = 0; a < n; ++a) {
      std::vector<double> b(prior.size());
      for (std::size_t i = 0; i < b.size(); ++i) {
        b[i] = prior.mass(i) * like[a].mass(i);
        central[i] *= like[a].mass(i);
      }
      const double s = std::accumulate(b.begin(), b.end(), 0.0);
      for (auto& v : b) v /= s;
      belief[a] = std::move(b);
    }
    {
      const double s = std::accumulate(central.begin(), central.end(), 0.0);
      for (auto& v : central) v /= s;
    }

    std::map<std::pair<int, int>, std::vector<double>> common;
    for (const auto& e : edges) common[e] = prior.masses();
    const auto exchange = [&](int a, int b) {
      auto& c = common.at({std::min(a, b), std::max(a, b)});
      std::vector<double> fused(c.size());
      double s = 0.0;
      for (std::size_t i = 0; i < c.size(); ++i) {
        fused[i] = belief[a][i] * belief[b][i] / c[i];
        s += fused[i];
      }
      for (auto& v : fused) v /= s;
      belief[a] = fused;
      belief[b] = fused;
      c = std::move(fused);
    };
    // Leaves-to-root sweep, then root-to-leaves: one round trip over a tree
    // propagates everything everywhere. Edge v was created after all of v's
    // children, so reverse creation order visits children before parents.
    for (auto it = edges.rbegin(); it != edges.rend(); ++it) exchange(it->first, it->second);
    for (const auto& [a, b] : edges) exchange(a, b);

    for (int a = 0; a < n; ++a) CHECK(kld_masses(central, belief[a]) < 1e-9);
  }
}

TEST_CASE("wep_masses and optimize_omega_masses agree with the grid versions") {
  SplitMix64 rng(18);
  const GridPdf p_i = random_pdf(rng);
  const GridPdf p_j = random_pdf(rng);
  const double w = 0.37;
  const std::vector<double> m = wep_masses(p_i.masses(), p_j.masses(), w);
  const GridPdf f = wep_fuse(p_i, p_j, w);
  for (std::size_t i = 0; i < m.size(); ++i)
    CHECK(std::abs(m[i] - f.mass(i)) < 1e-14);
  CHECK(std::abs(optimize_omega_masses(p_i.masses(), p_j.masses()) -
                 optimize_omega(p_i, p_j)) < 1e-6);
}
