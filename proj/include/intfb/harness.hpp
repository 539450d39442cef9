#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "intfb/dynamics.hpp"
#include "intfb/integrator.hpp"
#include "intfb/metrics.hpp"
#include "intfb/oracle.hpp"

namespace intfb {

// Mixing weights for the objective families drawn by the random generator.
struct FamilyWeights {
  double norm = 0.4;
  double exp = 0.3;
  double linear = 0.3;
};

struct RandomInstanceSpec {
  int m = 10;
  int n = 5;
  int n_i = 0;
  std::uint64_t seed = 1;
  FamilyWeights weights;
  // Dimension of a row space shared by all A_i. 0 draws independent rows when
  // m * n_i < n and a shared row space of dimension min(n - 1, n_i + 1)
  // otherwise.
  int row_rank = 0;
};

// Five agents, n = 20, n_i = 3, on the fixed neighbor lists N_1..N_5 with
// f1 = ||x||^2, f2 = ||x - c2||^2, f3 = sum e^{x[k]}, f4 = sum e^{-2x[k]},
// f5 = ||x - c5||^4. c2, c5 and all (A_i, b_i) come from `seed`; every A_i
// is drawn inside one shared 3-dimensional row space.
Problem build_paper_example_5agent(std::uint64_t seed);
// Same graph and constraints; objectives are Linear and ExpSum only, none of
// them strongly convex alone, while their sum is.
Problem build_relaxed_example_5agent(std::uint64_t seed);
// Connected random graph (spanning tree plus m extra edges), objectives drawn
// from the norm, exponential and linear families with agent 0 always a
// scaled squared norm, constraints sharing one feasible point. Retries a
// bounded number of times, then throws kGenerationFailed.
Problem generate_random_instance(const RandomInstanceSpec& spec);

std::vector<std::vector<int>> paper_neighbor_lists();

struct DisturbanceSpec {
  double lo = 0.0;
  double hi = 0.01;
  double hold = 0.1;
  std::uint64_t seed = 1;
};

struct ExperimentConfig {
  // Problem source: exactly one of builtin / random / explicit.
  std::string builtin;  // "paper_5agent" or "relaxed_5agent"
  std::uint64_t builtin_seed = 1;
  std::optional<RandomInstanceSpec> random;
  std::optional<nlohmann::json> explicit_problem;

  double initial_scale = 1.0;
  std::uint64_t initial_seed = 1;

  std::string flow = "integral";  // integral | diminishing | consensus
  std::string gain = "inverse_time";  // inverse_time | constant
  double gain_value = 1.0;
  std::optional<double> t0;  // default 0, or 1 for the inverse-time gain
  std::optional<DisturbanceSpec> disturbance;

  IntegratorConfig integrator;
  double oracle_tol = 1e-10;
  std::string oracle_method = "auto";

  double w_threshold = 0.0;  // 0 disables the convergence stop
  double t_max = 200.0;
  int samples = 400;
  double sample_dt = 0.0;  // overrides `samples` when positive

  std::string csv_path;
  std::string json_path;
  std::string plot_path;

  double start_time() const;
  // Throws kInvalidConfig.
  void validate() const;

  static ExperimentConfig from_json(const nlohmann::json& j);
  // Canonical form with every default filled in. Outputs are omitted unless
  // `with_outputs`, so the dump identifies the computation only.
  nlohmann::json to_json(bool with_outputs = false) const;
};

ExperimentConfig load_config(const std::string& path);

// Recommended configurations for the two reference experiments.
ExperimentConfig paper_fig1_config(std::uint64_t seed, const std::string& flow);
ExperimentConfig paper_fig2_config(std::uint64_t seed, const std::string& flow, int m = 30);

Problem build_problem(const ExperimentConfig& cfg);

struct ExperimentResult {
  TrajectoryRecord record;
  OracleResult oracle;
  nlohmann::json summary;
  std::map<std::string, bool> checks;
  bool passed = true;
  std::string stop_reason;
};

// Builds the problem, solves the oracle, integrates, computes metrics and
// analysis, and writes any configured outputs. Errors carry the stage name.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// First sample time with W <= threshold, if any.
std::optional<double> first_time_below(const TrajectoryRecord& rec, double threshold);

// ln W against t as a standalone SVG document.
std::string render_log_w_svg(const std::vector<std::pair<std::string, const TrajectoryRecord*>>& series);

std::uint64_t fnv1a(const std::string& text);

struct CheckOutcome {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Quick invariant suite on small instances.
std::vector<CheckOutcome> run_check_suite();

}  // namespace intfb
