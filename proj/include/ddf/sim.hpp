#pragma once

#include <deque>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ddf/fusion.hpp"
#include "ddf/hybrid.hpp"
#include "ddf/sensor.hpp"

#include <json.hpp>

namespace ddf {

/// Piecewise-linear trajectory: waypoint i -> i+1 covered in
/// steps_per_leg[i] steps. Total steps must cover the scenario length.
struct TrajectorySpec {
  std::vector<Eigen::Vector2d> waypoints;
  std::vector<int> steps_per_leg;

  int total_steps() const;
  Eigen::Vector2d pose_at(int step) const;
};

struct AgentConfig {
  int id;
  TrajectorySpec trajectory;
};

enum class FusionMode { kExact, kWepMinimax, kWepFixed };

struct ExchangeEvent {
  int step;  // processed after the local updates of this step
  int agent_a;
  int agent_b;
};

/// Pseudo-uniform GM prior for each region conditional: a smooth floor plus
/// a few Gaussian bumps placed deterministically from the seed.
struct PriorBumpSpec {
  int bumps = 3;
  double floor = 1.0;
  double amplitude = 0.6;
  std::uint64_t seed = 7;
};

struct Scenario {
  std::vector<RegionRect> regions;
  std::vector<double> region_prior;  // p0(R)
  int cond_cells_x = 100;
  int cond_cells_y = 100;
  PriorBumpSpec prior_bumps;
  SensorModel sensor{2.0, 0.9, 1.0};
  std::vector<AgentConfig> agents;
  std::vector<std::pair<int, int>> links;  // undirected, by agent id
  FusionMode mode = FusionMode::kExact;
  double fixed_omega = 0.5;
  std::vector<ExchangeEvent> exchanges;
  int steps = 0;
  std::uint64_t seed = 0;
  bool target_present = false;
  Eigen::Vector2d target{0.0, 0.0};

  void validate() const;
  HybridBelief make_prior_belief() const;
};

Scenario scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const Scenario& s);
Scenario load_scenario(const std::string& path);

/// Wire unit of one factorized exchange: the sender's selected conditionals
/// plus region-weight information and fusion metadata.
struct FactorMessage {
  int sender;
  int receiver;
  int step;
  FactorSelector selector;
  std::vector<ConditionalPdf> conditionals;  // one per selector region, same order
  std::vector<double> region_probs;
  std::set<int> touched_regions;  // regions the sender has locally updated
  std::size_t payload_cells() const;
};

struct ObservationRecord {
  int step;
  int agent;
  Eigen::Vector2d pose;
  Observation outcome;
};

struct MetricsRecord {
  int step;
  int agent;
  double kld_to_oracle;
  double entropy;
  std::size_t message_cells;  // cells received by this agent at this step
};

struct AgentState {
  AgentConfig config;
  HybridBelief belief;
  std::set<int> touched_regions;
  std::size_t cells_received_this_step = 0;
};

struct SimState {
  Scenario scenario;
  int step = 0;
  std::vector<AgentState> agents;
  std::vector<ChannelState<HybridBelief>> channels;  // exact mode only
  std::deque<FactorMessage> inbox;                   // FIFO across the whole network
  HybridBelief oracle;  // centralized Bayes filter over all observation streams
  std::vector<ObservationRecord> observation_log;
  std::vector<MetricsRecord> metrics;
};

SimState init_sim(const Scenario& scenario);

/// Registers a DDF exchange between a linked pair. Exact mode demands the
/// link belong to the (validated) tree topology.
void schedule_exchange(SimState& sim, int agent_a, int agent_b, int step);

/// Regions whose conditionals differ from the channel's common pdf, plus the
/// region-weight factor when it differs. Exact mode bookkeeping.
FactorSelector new_information_selector(const AgentState& agent,
                                        const ChannelState<HybridBelief>& channel);

/// Advances one time step: local sensor updates, then FIFO processing of all
/// messages scheduled for this step.
void step(SimState& sim);

struct RunReport {
  std::vector<MetricsRecord> metrics;
  std::vector<ObservationRecord> observation_log;
  std::vector<HybridBelief> final_beliefs;  // by agent index
  HybridBelief oracle;
  std::size_t factorized_payload_cells = 0;
  std::size_t whole_joint_payload_cells = 0;  // what full-copy messaging would cost
};

RunReport run(const Scenario& scenario);

/// Writes metrics.csv, observation log, and belief snapshots into `out_dir`.
void write_run_report(const RunReport& report, const std::string& out_dir);

}  // namespace ddf
