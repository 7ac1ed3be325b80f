// Command-line front end for the fusion library: demo fusions against grid
// oracles, mixture fusion, the search simulation, omega sweeps, and fixture
// verification. Exit codes: 0 success, 1 usage error, 2 numerical or
// consistency failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "ddf/fixtures.hpp"
#include "ddf/fusion.hpp"
#include "ddf/hybrid.hpp"
#include "ddf/io.hpp"
#include "ddf/mixture_fusion.hpp"
#include "ddf/sim.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;

ddf::GaussianMixture as_mixture(const ddf::PdfValue& v, const std::string& path) {
  if (std::holds_alternative<ddf::GaussianMixture>(v))
    return std::get<ddf::GaussianMixture>(v);
  if (std::holds_alternative<ddf::Gaussian>(v))
    return ddf::GaussianMixture({{1.0, std::get<ddf::Gaussian>(v)}});
  throw ddf::ConfigError(path + ": expected kind 'gaussian' or 'gm'");
}

// Bounding box covering every component mean +/- 5 sigma, shared by all
// mixtures passed in.
std::vector<ddf::GridAxis> bounding_axes(const std::vector<const ddf::GaussianMixture*>& ms,
                                         int cells) {
  const int d = ms.front()->dim();
  if (d < 1 || d > 3) throw ddf::ConfigError("fuse-demo: 1-3 dimensional pdfs required");
  std::vector<ddf::GridAxis> axes;
  for (int k = 0; k < d; ++k) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto* m : ms) {
      for (const auto& c : m->components()) {
        const double s = std::sqrt(c.gaussian.cov()(k, k));
        lo = std::min(lo, c.gaussian.mean()[k] - 5.0 * s);
        hi = std::max(hi, c.gaussian.mean()[k] + 5.0 * s);
      }
    }
    axes.push_back(ddf::GridAxis{lo, hi, cells});
  }
  return axes;
}

ddf::GridPdf rasterize(const ddf::GaussianMixture& m, const std::vector<ddf::GridAxis>& axes) {
  return ddf::GridPdf::from_log_density(
      [&](const Eigen::VectorXd& x) { return m.log_evaluate(x); }, axes);
}

void dump_grid(const fs::path& path, const ddf::GridPdf& g) {
  std::ofstream f(path);
  if (!f) throw ddf::DdfError("cannot write " + path.string());
  ddf::write_grid_csv(f, g);
}

void dump_json(const fs::path& path, const json& j) {
  std::ofstream f(path);
  if (!f) throw ddf::DdfError("cannot write " + path.string());
  f << j.dump(2) << "\n";
}

struct CommonOpts {
  std::uint64_t seed = 20130617;
  int samples = 2000;
  double alpha = 1.0;
  int grid = 200;
  int threads = 1;
  std::string out = "out";
};

ddf::FusionParams fusion_params(const CommonOpts& o) {
  ddf::FusionParams p;
  p.n_samples = o.samples;
  p.alpha = o.alpha;
  p.seed = o.seed;
  p.threads = o.threads;
  return p;
}

int run_fuse_demo(const std::string& pi_path, const std::string& pj_path,
                  const std::string& pc_path, const std::string& mode, double omega,
                  bool omega_set, const CommonOpts& opts) {
  const ddf::GaussianMixture p_i = as_mixture(ddf::load_pdf(pi_path), pi_path);
  const ddf::GaussianMixture p_j = as_mixture(ddf::load_pdf(pj_path), pj_path);
  std::vector<const ddf::GaussianMixture*> all{&p_i, &p_j};
  std::optional<ddf::GaussianMixture> p_c;
  if (mode == "exact") {
    if (pc_path.empty())
      throw CLI::ValidationError("fuse-demo", "--pc is required for mode=exact");
    p_c = as_mixture(ddf::load_pdf(pc_path), pc_path);
    all.push_back(&*p_c);
  }

  const auto axes = bounding_axes(all, opts.grid);
  const ddf::GridPdf gi = rasterize(p_i, axes);
  const ddf::GridPdf gj = rasterize(p_j, axes);

  fs::create_directories(opts.out);
  dump_grid(fs::path(opts.out) / "p_i_grid.csv", gi);
  dump_grid(fs::path(opts.out) / "p_j_grid.csv", gj);

  double used_omega = omega;
  ddf::GridPdf oracle = gi;  // replaced below
  ddf::GmFusionResult fused{p_i, 0.0, false};
  if (mode == "wep") {
    if (!omega_set) used_omega = ddf::optimize_omega(gi, gj);
    oracle = ddf::wep_fuse(gi, gj, used_omega);
    fused = ddf::gm_wep_fuse(p_i, p_j, used_omega, fusion_params(opts));
  } else if (mode == "exact") {
    const ddf::GridPdf gc = rasterize(*p_c, axes);
    dump_grid(fs::path(opts.out) / "p_c_grid.csv", gc);
    oracle = ddf::exact_fuse(gi, gj, gc);
    fused = ddf::gm_exact_fuse(p_i, p_j, *p_c, fusion_params(opts));
    used_omega = std::numeric_limits<double>::quiet_NaN();
  } else {
    throw CLI::ValidationError("fuse-demo", "mode must be 'wep' or 'exact'");
  }

  const ddf::GridPdf approx = rasterize(fused.mixture, axes);
  dump_grid(fs::path(opts.out) / "oracle_grid.csv", oracle);
  dump_grid(fs::path(opts.out) / "approx_grid.csv", approx);
  ddf::save_pdf((fs::path(opts.out) / "fused_gm.json").string(), fused.mixture);

  const double kld = ddf::grid_kld(oracle, approx);
  json report{{"mode", mode},
              {"kld_nats", kld},
              {"components", fused.mixture.size()},
              {"log_eta", fused.log_eta},
              {"any_low_ess", fused.any_low_ess},
              {"seed", opts.seed},
              {"samples", opts.samples}};
  if (mode == "wep") report["omega"] = used_omega;
  dump_json(fs::path(opts.out) / "kld.json", report);
  std::cout << "fuse-demo: kld = " << kld << " nats, " << fused.mixture.size()
            << " components\n";
  return kExitOk;
}

int run_gm_fuse(const std::string& pi_path, const std::string& pj_path,
                const std::string& pc_path, double omega, bool omega_set,
                const CommonOpts& opts) {
  const ddf::GaussianMixture p_i = as_mixture(ddf::load_pdf(pi_path), pi_path);
  const ddf::GaussianMixture p_j = as_mixture(ddf::load_pdf(pj_path), pj_path);
  ddf::GmFusionResult res{p_i, 0.0, false};
  if (!pc_path.empty()) {
    const ddf::GaussianMixture p_c = as_mixture(ddf::load_pdf(pc_path), pc_path);
    res = ddf::gm_exact_fuse(p_i, p_j, p_c, fusion_params(opts));
  } else {
    const double w = omega_set ? omega : 0.5;
    res = ddf::gm_wep_fuse(p_i, p_j, w, fusion_params(opts));
  }
  fs::create_directories(opts.out);
  ddf::save_pdf((fs::path(opts.out) / "fused_gm.json").string(), res.mixture);
  dump_json(fs::path(opts.out) / "fusion_info.json",
            json{{"components", res.mixture.size()},
                 {"log_eta", res.log_eta},
                 {"any_low_ess", res.any_low_ess},
                 {"seed", opts.seed}});
  std::cout << "gm-fuse: " << res.mixture.size() << " components, log_eta = "
            << res.log_eta << "\n";
  return kExitOk;
}

ddf::Scenario load_or_default_scenario(const std::string& path, const std::string& mode,
                                       int steps, int cells) {
  ddf::Scenario sc =
      path.empty()
          ? ddf::fixtures::make_search_scenario(ddf::FusionMode::kExact, steps, cells)
          : ddf::load_scenario(path);
  if (mode == "exact")
    sc.mode = ddf::FusionMode::kExact;
  else if (mode == "wep_minimax")
    sc.mode = ddf::FusionMode::kWepMinimax;
  else if (mode == "wep_fixed")
    sc.mode = ddf::FusionMode::kWepFixed;
  else if (!mode.empty())
    throw CLI::ValidationError("search-sim",
                               "mode must be exact, wep_minimax, or wep_fixed");
  return sc;
}

int run_search_sim(const std::string& scenario_path, const std::string& mode, int steps,
                   const CommonOpts& opts) {
  const ddf::Scenario sc = load_or_default_scenario(scenario_path, mode, steps, opts.grid);
  const ddf::RunReport rep = ddf::run(sc);
  ddf::write_run_report(rep, opts.out);
  double final_kld = 0.0;
  for (const auto& m : rep.metrics)
    if (m.step == sc.steps) final_kld = std::max(final_kld, m.kld_to_oracle);
  std::cout << "search-sim: " << sc.steps << " steps, final max KLD to oracle = "
            << final_kld << " nats, factorized payload " << rep.factorized_payload_cells
            << " cells (whole-joint " << rep.whole_joint_payload_cells << ")\n";
  return kExitOk;
}

// Sweep setup: run the scenario without its exchanges, then sweep omega_R on
// the two final pre-exchange beliefs against their exact fusion.
int run_omega_sweep(const std::string& scenario_path, int points, int steps,
                    const CommonOpts& opts) {
  ddf::Scenario sc = load_or_default_scenario(scenario_path, "exact", steps, opts.grid);
  sc.exchanges.clear();
  const ddf::RunReport rep = ddf::run(sc);
  const ddf::HybridBelief& b1 = rep.final_beliefs[0];
  const ddf::HybridBelief& b2 = rep.final_beliefs[1];
  const ddf::HybridBelief common = sc.make_prior_belief();

  // Conditional omegas follow the exchange policy: exclusive information is
  // taken wholesale (omega 1 or 0), shared regions tuned toward the exact
  // fused conditional (the reference the sweep is scored against anyway).
  const int nr = b1.num_regions();
  const ddf::HybridBelief exact =
      ddf::hybrid_exact_fuse(b1, b2, common, ddf::FactorSelector::all(nr));
  std::vector<std::set<int>> touched(2);
  for (std::size_t a = 0; a < 2; ++a) {
    for (int k = 1; k <= sc.steps; ++k) {
      const Eigen::Vector2d pose = sc.agents[a].trajectory.pose_at(k);
      for (int r = 0; r < nr; ++r)
        if (sc.regions[static_cast<size_t>(r)].intersects_disc(pose, sc.sensor.range))
          touched[a].insert(r);
    }
  }
  ddf::OmegaAssignment fixed;
  fixed.omega_conditional.resize(static_cast<size_t>(nr));
  for (int r = 0; r < nr; ++r) {
    const bool t1 = touched[0].count(r) > 0;
    const bool t2 = touched[1].count(r) > 0;
    double w;
    if (t1 && t2)
      w = ddf::optimize_omega_toward(exact.grid_conditional(r).masses(),
                                     b1.grid_conditional(r).masses(),
                                     b2.grid_conditional(r).masses());
    else if (t1)
      w = 1.0;
    else if (t2)
      w = 0.0;
    else
      w = 0.5;
    fixed.omega_conditional[static_cast<size_t>(r)] = w;
  }

  std::vector<double> grid;
  for (int k = 0; k < points; ++k) grid.push_back(k / static_cast<double>(points - 1));
  const auto rows =
      ddf::omega_r_sweep(b1, b2, common, fixed, grid, ddf::FactorSelector::all(nr));

  fs::create_directories(opts.out);
  std::ofstream csv(fs::path(opts.out) / "omega_sweep.csv");
  if (!csv) throw ddf::DdfError("cannot write omega_sweep.csv");
  csv << "curve,omega_r,kld_total,kld_region_term\n";
  char buf[256];
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof(buf), "factorized,%.17g,%.17g,%.17g\n", row.omega_region,
                  row.factorized_kld, row.factorized_region_term);
    csv << buf;
  }
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof(buf), "whole_joint,%.17g,%.17g,%.17g\n", row.omega_region,
                  row.whole_joint_kld, row.whole_joint_region_term);
    csv << buf;
  }

  double best_fac = 1e300, best_joint = 1e300;
  for (const auto& row : rows) {
    best_fac = std::min(best_fac, row.factorized_kld);
    best_joint = std::min(best_joint, row.whole_joint_kld);
  }
  std::cout << "omega-sweep: min factorized KLD = " << best_fac
            << " nats, min whole-joint KLD = " << best_joint << " nats\n";
  return kExitOk;
}

struct CheckResult {
  std::string name;
  bool pass;
  std::string detail;
};

int run_oracle_check(const std::string& fixtures_dir, const CommonOpts& opts) {
  std::vector<CheckResult> results;
  const auto check = [&](const std::string& name, const std::function<void()>& body) {
    try {
      body();
      results.push_back({name, true, "ok"});
    } catch (const std::exception& e) {
      results.push_back({name, false, e.what()});
    }
  };

  const fs::path dir(fixtures_dir);
  for (const char* name :
       {"gm_pi.json", "gm_pj.json", "wep_regression.json", "scenario_search.json"}) {
    check(std::string("present: ") + name, [&] {
      if (!fs::exists(dir / name)) throw ddf::DdfError("missing fixture: " + (dir / name).string());
    });
  }

  check("gm fixtures parse and weights sum to 1", [&] {
    for (const char* name : {"gm_pi.json", "gm_pj.json"}) {
      const auto m = as_mixture(ddf::load_pdf((dir / name).string()), name);
      double s = 0.0;
      for (const auto& c : m.components()) s += c.weight;
      if (std::abs(s - 1.0) > 1e-9)
        throw ddf::NumericalError(std::string(name) + ": weights sum to " + std::to_string(s));
      if (m.size() != 14) throw ddf::ConfigError(std::string(name) + ": expected 14 components");
    }
  });

  check("wep regression fixture reproduces", [&] {
    const auto p_i = as_mixture(ddf::load_pdf((dir / "gm_pi.json").string()), "gm_pi");
    const auto p_j = as_mixture(ddf::load_pdf((dir / "gm_pj.json").string()), "gm_pj");
    const auto stored =
        as_mixture(ddf::load_pdf((dir / "wep_regression.json").string()), "wep_regression");
    ddf::FusionParams params;
    params.n_samples = 2000;
    params.seed = opts.seed;
    const auto res = ddf::gm_wep_fuse(p_i, p_j, 0.56922, params);
    if (res.mixture.size() != stored.size())
      throw ddf::NumericalError("component count drift: got " +
                                std::to_string(res.mixture.size()) + ", stored " +
                                std::to_string(stored.size()));
    for (int q = 0; q < stored.size(); ++q) {
      const double dw =
          std::abs(res.mixture.component(q).weight - stored.component(q).weight);
      const double dm = (res.mixture.component(q).gaussian.mean() -
                         stored.component(q).gaussian.mean())
                            .cwiseAbs()
                            .maxCoeff();
      if (dw > 1e-9 || dm > 1e-9)
        throw ddf::NumericalError("component " + std::to_string(q) + " drifted (dw=" +
                                  std::to_string(dw) + ", dm=" + std::to_string(dm) + ")");
    }
  });

  check("search scenario parses and validates", [&] {
    const ddf::Scenario sc = ddf::load_scenario((dir / "scenario_search.json").string());
    sc.validate();
    if (sc.regions.size() != 6) throw ddf::ConfigError("expected 6 regions");
  });

  json report = json::array();
  bool all_pass = true;
  for (const auto& r : results) {
    report.push_back({{"check", r.name}, {"pass", r.pass}, {"detail", r.detail}});
    all_pass = all_pass && r.pass;
    std::cout << (r.pass ? "[pass] " : "[FAIL] ") << r.name
              << (r.pass ? "" : (": " + r.detail)) << "\n";
  }
  fs::create_directories(opts.out);
  dump_json(fs::path(opts.out) / "oracle_check.json",
            json{{"all_pass", all_pass}, {"checks", report}});
  std::cout << (all_pass ? "oracle-check: all checks passed\n"
                         : "oracle-check: FAILURES present\n");
  return all_pass ? kExitOk : kExitNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decentralized Bayesian fusion toolkit"};
  app.require_subcommand(1);

  CommonOpts opts;
  app.add_option("--seed", opts.seed, "RNG seed")->capture_default_str();
  app.add_option("--samples", opts.samples, "IS samples per component")->capture_default_str();
  app.add_option("--alpha", opts.alpha, "fallback proposal variance")->capture_default_str();
  app.add_option("--grid", opts.grid, "grid cells per axis")->capture_default_str();
  app.add_option("--threads", opts.threads, "worker threads")->capture_default_str();
  app.add_option("--out", opts.out, "output directory")->capture_default_str();

  std::string pi_path, pj_path, pc_path, mode = "wep", scenario_path;
  double omega = 0.5;
  int steps = 600;
  int points = 11;

  auto* demo = app.add_subcommand("fuse-demo", "fuse two pdfs and compare to a grid oracle");
  demo->add_option("p_i", pi_path, "first pdf json")->required();
  demo->add_option("p_j", pj_path, "second pdf json")->required();
  demo->add_option("--pc", pc_path, "common-information pdf json (exact mode)");
  demo->add_option("--mode", mode, "wep or exact")->capture_default_str();
  auto* demo_omega = demo->add_option("--omega", omega, "WEP weight (default: minimax)");

  auto* gmf = app.add_subcommand("gm-fuse", "mixture fusion without grid oracle");
  gmf->add_option("p_i", pi_path, "first pdf json")->required();
  gmf->add_option("p_j", pj_path, "second pdf json")->required();
  gmf->add_option("--pc", pc_path, "common-information pdf json (exact fusion)");
  auto* gmf_omega = gmf->add_option("--omega", omega, "WEP weight (default 0.5)");

  auto* sim = app.add_subcommand("search-sim", "run the multi-robot search scenario");
  sim->add_option("--scenario", scenario_path, "scenario json (default: built-in)");
  std::string sim_mode;
  sim->add_option("--mode", sim_mode, "exact, wep_minimax, or wep_fixed");
  sim->add_option("--steps", steps, "steps for the built-in scenario")->capture_default_str();

  auto* sweep = app.add_subcommand("omega-sweep", "omega_R sensitivity sweep");
  sweep->add_option("--scenario", scenario_path, "scenario json (default: built-in)");
  sweep->add_option("--points", points, "sweep resolution")->capture_default_str();
  sweep->add_option("--steps", steps, "steps for the built-in scenario")->capture_default_str();

  std::string fixtures_dir = "fixtures";
  auto* oc = app.add_subcommand("oracle-check", "verify repo fixtures");
  oc->add_option("--fixtures", fixtures_dir, "fixture directory")->capture_default_str();

  for (auto* sub : {demo, gmf, sim, sweep, oc}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (demo->parsed())
      return run_fuse_demo(pi_path, pj_path, pc_path, mode, omega,
                           demo_omega->count() > 0, opts);
    if (gmf->parsed())
      return run_gm_fuse(pi_path, pj_path, pc_path, omega, gmf_omega->count() > 0, opts);
    if (sim->parsed()) return run_search_sim(scenario_path, sim_mode, steps, opts);
    if (sweep->parsed()) return run_omega_sweep(scenario_path, points, steps, opts);
    if (oc->parsed()) return run_oracle_check(fixtures_dir, opts);
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ddf::DdfError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitUsage;
}
