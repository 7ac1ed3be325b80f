#include "ddf/sim.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "ddf/io.hpp"
#include "ddf/rng.hpp"

namespace ddf {

namespace {

double joint_entropy(const HybridBelief& b) {
  double h = 0.0;
  for (double m : hybrid_joint_masses(b))
    if (m > 0.0) h -= m * std::log(m);
  return h;
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(static_cast<size_t>(n)) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) { return parent[static_cast<size_t>(x)] == x ? x : parent[static_cast<size_t>(x)] = find(parent[static_cast<size_t>(x)]); }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[static_cast<size_t>(a)] = b;
    return true;
  }
};

int agent_index(const Scenario& s, int id) {
  for (std::size_t i = 0; i < s.agents.size(); ++i)
    if (s.agents[i].id == id) return static_cast<int>(i);
  throw ConfigError("scenario: unknown agent id " + std::to_string(id));
}

bool linked(const Scenario& s, int a, int b) {
  for (const auto& [x, y] : s.links)
    if ((x == a && y == b) || (x == b && y == a)) return true;
  return false;
}

}  // namespace

int TrajectorySpec::total_steps() const {
  int n = 0;
  for (int s : steps_per_leg) n += s;
  return n;
}

Eigen::Vector2d TrajectorySpec::pose_at(int step) const {
  if (waypoints.empty()) throw ConfigError("trajectory: no waypoints");
  if (waypoints.size() == 1 || step <= 0) return waypoints.front();
  int acc = 0;
  for (std::size_t leg = 0; leg + 1 < waypoints.size() && leg < steps_per_leg.size(); ++leg) {
    const int n = steps_per_leg[leg];
    if (step <= acc + n) {
      const double t = static_cast<double>(step - acc) / n;
      return (1.0 - t) * waypoints[leg] + t * waypoints[leg + 1];
    }
    acc += n;
  }
  return waypoints.back();
}

void Scenario::validate() const {
  if (regions.empty()) throw ConfigError("scenario: at least one region required");
  if (region_prior.size() != regions.size())
    throw ConfigError("scenario: region prior size must match region count");
  double sum = 0.0;
  for (double p : region_prior) {
    if (!(p >= 0.0)) throw ConfigError("scenario: negative region prior");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("scenario: region prior must sum to 1");
  if (cond_cells_x < 1 || cond_cells_y < 1)
    throw ConfigError("scenario: conditional grid resolution must be positive");
  sensor.validate();
  if (steps < 1) throw ConfigError("scenario: steps must be >= 1");
  if (agents.empty()) throw ConfigError("scenario: at least one agent required");
  for (const auto& a : agents) {
    if (a.trajectory.waypoints.empty())
      throw ConfigError("scenario: agent " + std::to_string(a.id) + " has no trajectory");
  }
  for (const auto& [x, y] : links) {
    agent_index(*this, x);
    agent_index(*this, y);
    if (x == y) throw ConfigError("scenario: self-link");
  }
  if (mode == FusionMode::kExact) {
    // Channel filters are only exact on singly connected topologies.
    UnionFind uf(static_cast<int>(agents.size()));
    for (const auto& [x, y] : links)
      if (!uf.unite(agent_index(*this, x), agent_index(*this, y)))
        throw ConfigError("scenario: exact fusion requires a tree topology, link " +
                          std::to_string(x) + "-" + std::to_string(y) + " closes a cycle");
  }
  for (const auto& e : exchanges) {
    if (e.step < 1 || e.step > steps)
      throw ConfigError("scenario: exchange step outside run");
    if (!linked(*this, e.agent_a, e.agent_b))
      throw ConfigError("scenario: exchange between unlinked agents " +
                        std::to_string(e.agent_a) + "," + std::to_string(e.agent_b));
  }
}

HybridBelief Scenario::make_prior_belief() const {
  std::vector<ConditionalPdf> conds;
  conds.reserve(regions.size());
  for (std::size_t r = 0; r < regions.size(); ++r) {
    const RegionRect& rect = regions[r];
    SplitMix64 rng(substream_seed(prior_bumps.seed, r));
    std::vector<Eigen::Vector2d> centers;
    for (int b = 0; b < prior_bumps.bumps; ++b)
      centers.emplace_back(rect.xlo + rng.uniform() * (rect.xhi - rect.xlo),
                           rect.ylo + rng.uniform() * (rect.yhi - rect.ylo));
    const double sig = 0.25 * std::min(rect.xhi - rect.xlo, rect.yhi - rect.ylo);
    const auto density = [&](const Eigen::VectorXd& x) {
      double v = prior_bumps.floor;
      for (const auto& c : centers) {
        const double d2 = (Eigen::Vector2d(x[0], x[1]) - c).squaredNorm();
        v += prior_bumps.amplitude * std::exp(-0.5 * d2 / (sig * sig));
      }
      return v;
    };
    conds.push_back(GridPdf::from_density(
        density, {GridAxis{rect.xlo, rect.xhi, cond_cells_x},
                  GridAxis{rect.ylo, rect.yhi, cond_cells_y}}));
  }
  return HybridBelief{DiscreteDist(region_prior), std::move(conds)};
}

std::size_t FactorMessage::payload_cells() const {
  std::size_t cells = 0;
  for (const auto& c : conditionals) {
    if (std::holds_alternative<GridPdf>(c))
      cells += std::get<GridPdf>(c).size();
    else
      cells += static_cast<std::size_t>(std::get<GaussianMixture>(c).size());
  }
  if (selector.include_region_dist) cells += region_probs.size();
  return cells;
}

SimState init_sim(const Scenario& scenario) {
  scenario.validate();
  const HybridBelief prior = scenario.make_prior_belief();
  std::vector<AgentState> agents;
  for (const auto& cfg : scenario.agents)
    agents.push_back(AgentState{cfg, prior, {}, 0});
  std::vector<ChannelState<HybridBelief>> channels;
  if (scenario.mode == FusionMode::kExact) {
    for (const auto& [a, b] : scenario.links)
      channels.push_back(ChannelState<HybridBelief>{a, b, prior});
  }
  return SimState{scenario, 0, std::move(agents), std::move(channels), {}, prior, {}, {}};
}

void schedule_exchange(SimState& sim, int agent_a, int agent_b, int step) {
  if (!linked(sim.scenario, agent_a, agent_b))
    throw ConfigError("schedule_exchange: agents " + std::to_string(agent_a) + "," +
                      std::to_string(agent_b) + " are not linked");
  if (step <= sim.step) throw ConfigError("schedule_exchange: step already passed");
  if (sim.scenario.mode == FusionMode::kExact) {
    bool found = false;
    for (const auto& ch : sim.channels)
      found = found || ((ch.agent_a == agent_a && ch.agent_b == agent_b) ||
                        (ch.agent_a == agent_b && ch.agent_b == agent_a));
    if (!found)
      throw ConfigError("schedule_exchange: no channel filter for exact-mode link");
  }
  sim.scenario.exchanges.push_back(ExchangeEvent{step, agent_a, agent_b});
}

FactorSelector new_information_selector(const AgentState& agent,
                                        const ChannelState<HybridBelief>& channel) {
  FactorSelector sel;
  const HybridBelief& b = agent.belief;
  const HybridBelief& c = channel.common;
  for (int r = 0; r < b.num_regions(); ++r) {
    const GridPdf& gb = b.grid_conditional(r);
    const GridPdf& gc = c.grid_conditional(r);
    double max_diff = 0.0;
    for (std::size_t k = 0; k < gb.size(); ++k)
      max_diff = std::max(max_diff, std::abs(gb.mass(k) - gc.mass(k)));
    if (max_diff > 1e-12) sel.regions.push_back(r);
  }
  sel.include_region_dist = false;
  for (int r = 0; r < b.num_regions(); ++r)
    if (std::abs(b.regions.prob(r) - c.regions.prob(r)) > 1e-12)
      sel.include_region_dist = true;
  return sel;
}

namespace {

ChannelState<HybridBelief>* find_channel(SimState& sim, int a, int b) {
  for (auto& ch : sim.channels)
    if ((ch.agent_a == a && ch.agent_b == b) || (ch.agent_a == b && ch.agent_b == a))
      return &ch;
  return nullptr;
}

FactorMessage make_message(const SimState& sim, const AgentState& from, const AgentState& to,
                           int step, const FactorSelector& sel) {
  FactorMessage msg;
  msg.sender = from.config.id;
  msg.receiver = to.config.id;
  msg.step = step;
  msg.selector = sel;
  for (int r : sel.regions)
    msg.conditionals.push_back(from.belief.conditionals[static_cast<size_t>(r)]);
  msg.region_probs = from.belief.regions.probs();
  msg.touched_regions = from.touched_regions;
  (void)sim;
  return msg;
}

void process_exchange(SimState& sim, const ExchangeEvent& ev, int step) {
  AgentState& a = sim.agents[static_cast<size_t>(agent_index(sim.scenario, ev.agent_a))];
  AgentState& b = sim.agents[static_cast<size_t>(agent_index(sim.scenario, ev.agent_b))];
  const int nr = a.belief.num_regions();

  HybridBelief fused = a.belief;  // replaced below
  FactorMessage msg_ab, msg_ba;

  if (sim.scenario.mode == FusionMode::kExact) {
    ChannelState<HybridBelief>* ch = find_channel(sim, ev.agent_a, ev.agent_b);
    if (ch == nullptr)
      throw ConfigError("exchange: exact mode requires a channel on the link");
    msg_ab = make_message(sim, a, b, step, new_information_selector(a, *ch));
    msg_ba = make_message(sim, b, a, step, new_information_selector(b, *ch));
    fused = hybrid_exact_fuse(a.belief, b.belief, ch->common, FactorSelector::all(nr));
    *ch = channel_update(std::move(*ch), fused);
  } else {
    OmegaAssignment assign;
    assign.omega_conditional.resize(static_cast<size_t>(nr));
    for (int r = 0; r < nr; ++r) {
      const bool ta = a.touched_regions.count(r) > 0;
      const bool tb = b.touched_regions.count(r) > 0;
      double w;
      if (ta && tb) {
        w = sim.scenario.mode == FusionMode::kWepFixed
                ? sim.scenario.fixed_omega
                : optimize_omega(a.belief.grid_conditional(r), b.belief.grid_conditional(r));
      } else if (ta) {
        w = 1.0;
      } else if (tb) {
        w = 0.0;
      } else {
        w = 0.5;  // both sides still hold the prior; fusion is a no-op
      }
      assign.omega_conditional[static_cast<size_t>(r)] = w;
    }
    assign.omega_region =
        sim.scenario.mode == FusionMode::kWepFixed
            ? sim.scenario.fixed_omega
            : optimize_omega_masses(a.belief.regions.probs(), b.belief.regions.probs());

    FactorSelector sel_a;  // WEP senders ship the conditionals they touched
    FactorSelector sel_b;
    for (int r : a.touched_regions) sel_a.regions.push_back(r);
    for (int r : b.touched_regions) sel_b.regions.push_back(r);
    msg_ab = make_message(sim, a, b, step, sel_a);
    msg_ba = make_message(sim, b, a, step, sel_b);
    fused = hybrid_wep_fuse(a.belief, b.belief, assign, FactorSelector::all(nr));
  }

  a.cells_received_this_step += msg_ba.payload_cells();
  b.cells_received_this_step += msg_ab.payload_cells();

  a.belief = fused;
  b.belief = fused;
  std::set<int> merged = a.touched_regions;
  merged.insert(b.touched_regions.begin(), b.touched_regions.end());
  a.touched_regions = merged;
  b.touched_regions = std::move(merged);
}

}  // namespace

void step(SimState& sim) {
  if (sim.step >= sim.scenario.steps) throw ConfigError("step: run already complete");
  const int k = sim.step + 1;
  const Scenario& sc = sim.scenario;

  for (auto& agent : sim.agents) {
    const Eigen::Vector2d pose = agent.config.trajectory.pose_at(k);
    Observation obs = Observation::kNoDetection;
    if (sc.target_present) {
      SplitMix64 rng(substream_seed(sc.seed, static_cast<std::uint64_t>(agent.config.id),
                                    static_cast<std::uint64_t>(k)));
      obs = rng.uniform() < sc.sensor.detect_prob(sc.target, pose)
                ? Observation::kDetection
                : Observation::kNoDetection;
    }
    agent.belief = hybrid_local_update(agent.belief, obs, sc.sensor, pose, sc.regions);
    for (std::size_t r = 0; r < sc.regions.size(); ++r)
      if (sc.regions[r].intersects_disc(pose, sc.sensor.range))
        agent.touched_regions.insert(static_cast<int>(r));
    sim.observation_log.push_back(
        ObservationRecord{k, agent.config.id, pose, obs});
    sim.oracle = hybrid_local_update(sim.oracle, obs, sc.sensor, pose, sc.regions);
  }

  for (const auto& ev : sc.exchanges)
    if (ev.step == k) process_exchange(sim, ev, k);

  const std::vector<double> oracle_joint = hybrid_joint_masses(sim.oracle);
  for (auto& agent : sim.agents) {
    const std::vector<double> aj = hybrid_joint_masses(agent.belief);
    sim.metrics.push_back(MetricsRecord{k, agent.config.id,
                                        kld_masses(oracle_joint, aj),
                                        joint_entropy(agent.belief),
                                        agent.cells_received_this_step});
    agent.cells_received_this_step = 0;
  }
  ++sim.step;
}

RunReport run(const Scenario& scenario) {
  SimState sim = init_sim(scenario);
  while (sim.step < scenario.steps) step(sim);

  std::vector<HybridBelief> final_beliefs;
  for (auto& a : sim.agents) final_beliefs.push_back(std::move(a.belief));
  RunReport report{std::move(sim.metrics), std::move(sim.observation_log),
                   std::move(final_beliefs), std::move(sim.oracle), 0, 0};

  const std::size_t cond_cells =
      static_cast<std::size_t>(scenario.cond_cells_x) * scenario.cond_cells_y;
  const std::size_t nr = scenario.regions.size();
  for (const auto& m : report.metrics) {
    if (m.message_cells > 0) {
      report.factorized_payload_cells += m.message_cells;
      report.whole_joint_payload_cells += nr * cond_cells + nr;
    }
  }
  return report;
}

namespace {

const nlohmann::json& sfield(const nlohmann::json& j, const char* name) {
  const auto it = j.find(name);
  if (it == j.end())
    throw ConfigError(std::string("scenario json: missing field '") + name + "'");
  return *it;
}

FusionMode mode_from_string(const std::string& s) {
  if (s == "exact") return FusionMode::kExact;
  if (s == "wep_minimax") return FusionMode::kWepMinimax;
  if (s == "wep_fixed") return FusionMode::kWepFixed;
  throw ConfigError("scenario json: unknown mode '" + s + "'");
}

std::string mode_to_string(FusionMode m) {
  switch (m) {
    case FusionMode::kExact: return "exact";
    case FusionMode::kWepMinimax: return "wep_minimax";
    case FusionMode::kWepFixed: return "wep_fixed";
  }
  return "exact";
}

}  // namespace

Scenario scenario_from_json(const nlohmann::json& j) {
  Scenario s;
  for (const auto& r : sfield(j, "regions"))
    s.regions.push_back(RegionRect{sfield(r, "xlo").get<double>(), sfield(r, "xhi").get<double>(),
                                   sfield(r, "ylo").get<double>(), sfield(r, "yhi").get<double>()});
  s.region_prior = sfield(j, "region_prior").get<std::vector<double>>();
  const auto& grid = sfield(j, "grid");
  s.cond_cells_x = sfield(grid, "cells_x").get<int>();
  s.cond_cells_y = sfield(grid, "cells_y").get<int>();
  if (j.contains("prior_bumps")) {
    const auto& pb = j["prior_bumps"];
    s.prior_bumps.bumps = sfield(pb, "bumps").get<int>();
    s.prior_bumps.floor = sfield(pb, "floor").get<double>();
    s.prior_bumps.amplitude = sfield(pb, "amplitude").get<double>();
    s.prior_bumps.seed = sfield(pb, "seed").get<std::uint64_t>();
  }
  const auto& sen = sfield(j, "sensor");
  s.sensor = SensorModel{sfield(sen, "range").get<double>(), sfield(sen, "p_max").get<double>(),
                         sfield(sen, "sigma").get<double>()};
  for (const auto& a : sfield(j, "agents")) {
    AgentConfig cfg;
    cfg.id = sfield(a, "id").get<int>();
    for (const auto& w : sfield(a, "waypoints"))
      cfg.trajectory.waypoints.emplace_back(w[0].get<double>(), w[1].get<double>());
    cfg.trajectory.steps_per_leg = sfield(a, "steps_per_leg").get<std::vector<int>>();
    s.agents.push_back(std::move(cfg));
  }
  for (const auto& l : sfield(j, "links"))
    s.links.emplace_back(l[0].get<int>(), l[1].get<int>());
  s.mode = mode_from_string(sfield(j, "mode").get<std::string>());
  if (j.contains("fixed_omega")) s.fixed_omega = j["fixed_omega"].get<double>();
  for (const auto& e : sfield(j, "exchanges"))
    s.exchanges.push_back(ExchangeEvent{sfield(e, "step").get<int>(), sfield(e, "a").get<int>(),
                                        sfield(e, "b").get<int>()});
  s.steps = sfield(j, "steps").get<int>();
  s.seed = sfield(j, "seed").get<std::uint64_t>();
  if (j.contains("target") && !j["target"].is_null()) {
    s.target_present = true;
    s.target = Eigen::Vector2d(j["target"][0].get<double>(), j["target"][1].get<double>());
  }
  s.validate();
  return s;
}

nlohmann::json scenario_to_json(const Scenario& s) {
  nlohmann::json j;
  j["regions"] = nlohmann::json::array();
  for (const auto& r : s.regions)
    j["regions"].push_back({{"xlo", r.xlo}, {"xhi", r.xhi}, {"ylo", r.ylo}, {"yhi", r.yhi}});
  j["region_prior"] = s.region_prior;
  j["grid"] = {{"cells_x", s.cond_cells_x}, {"cells_y", s.cond_cells_y}};
  j["prior_bumps"] = {{"bumps", s.prior_bumps.bumps},
                      {"floor", s.prior_bumps.floor},
                      {"amplitude", s.prior_bumps.amplitude},
                      {"seed", s.prior_bumps.seed}};
  j["sensor"] = {{"range", s.sensor.range}, {"p_max", s.sensor.p_max}, {"sigma", s.sensor.sigma}};
  j["agents"] = nlohmann::json::array();
  for (const auto& a : s.agents) {
    nlohmann::json wp = nlohmann::json::array();
    for (const auto& w : a.trajectory.waypoints) wp.push_back({w.x(), w.y()});
    j["agents"].push_back(
        {{"id", a.id}, {"waypoints", wp}, {"steps_per_leg", a.trajectory.steps_per_leg}});
  }
  j["links"] = nlohmann::json::array();
  for (const auto& [a, b] : s.links) j["links"].push_back({a, b});
  j["mode"] = mode_to_string(s.mode);
  j["fixed_omega"] = s.fixed_omega;
  j["exchanges"] = nlohmann::json::array();
  for (const auto& e : s.exchanges)
    j["exchanges"].push_back({{"step", e.step}, {"a", e.agent_a}, {"b", e.agent_b}});
  j["steps"] = s.steps;
  j["seed"] = s.seed;
  if (s.target_present)
    j["target"] = {s.target.x(), s.target.y()};
  else
    j["target"] = nullptr;
  return j;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open scenario file: " + path);
  nlohmann::json j;
  f >> j;
  return scenario_from_json(j);
}

void write_run_report(const RunReport& report, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  {
    std::ofstream m(fs::path(out_dir) / "metrics.csv");
    m << "step,agent,kld_to_oracle,entropy,message_cells\n";
    char buf[64];
    for (const auto& rec : report.metrics) {
      std::snprintf(buf, sizeof(buf), "%.17g", rec.kld_to_oracle);
      m << rec.step << "," << rec.agent << "," << buf << ",";
      std::snprintf(buf, sizeof(buf), "%.17g", rec.entropy);
      m << buf << "," << rec.message_cells << "\n";
    }
  }
  {
    std::ofstream o(fs::path(out_dir) / "observations.csv");
    o << "step,agent,pose_x,pose_y,outcome\n";
    char buf[64];
    for (const auto& rec : report.observation_log) {
      o << rec.step << "," << rec.agent << ",";
      std::snprintf(buf, sizeof(buf), "%.17g", rec.pose.x());
      o << buf << ",";
      std::snprintf(buf, sizeof(buf), "%.17g", rec.pose.y());
      o << buf << "," << (rec.outcome == Observation::kDetection ? "detection" : "no_detection")
        << "\n";
    }
  }
  // Belief snapshots in the shared pdf JSON format (kind: "hybrid").
  for (std::size_t i = 0; i < report.final_beliefs.size(); ++i)
    save_pdf((fs::path(out_dir) / ("belief_agent" + std::to_string(i) + ".json")).string(),
             report.final_beliefs[i]);
  save_pdf((fs::path(out_dir) / "oracle.json").string(), report.oracle);

  {
    nlohmann::json summary;
    summary["factorized_payload_cells"] = report.factorized_payload_cells;
    summary["whole_joint_payload_cells"] = report.whole_joint_payload_cells;
    std::ofstream f(fs::path(out_dir) / "summary.json");
    f << summary.dump(2) << "\n";
  }
}

}  // namespace ddf
