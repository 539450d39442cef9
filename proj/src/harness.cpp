#include "intfb/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "intfb/analysis.hpp"
#include "intfb/error.hpp"
#include "intfb/random.hpp"

namespace intfb {

using nlohmann::json;

namespace {

constexpr int kGenerationAttempts = 10;

template <class Fn>
auto in_stage(const char* stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    if (!e.stage().empty()) throw;
    throw e.with_stage(stage);
  }
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  Rng rng({seed, index});
  return static_cast<std::uint64_t>(rng.canonical() * 0x1.0p53);
}

Eigen::VectorXd to_vector(const json& j, const char* what) {
  if (!j.is_array()) throw Error(ErrorCode::kInvalidConfig, std::string(what) + " must be an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t k = 0; k < j.size(); ++k) v[static_cast<Eigen::Index>(k)] = j[k].get<double>();
  return v;
}

Eigen::MatrixXd to_matrix(const json& j, int cols) {
  if (!j.is_array()) throw Error(ErrorCode::kInvalidConfig, "constraint A must be an array of rows");
  Eigen::MatrixXd a(static_cast<Eigen::Index>(j.size()), cols);
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || static_cast<int>(j[r].size()) != cols) {
      throw Error(ErrorCode::kInvalidConfig, "constraint row " + std::to_string(r) + " must have n entries");
    }
    for (int c = 0; c < cols; ++c) a(static_cast<Eigen::Index>(r), c) = j[r][static_cast<std::size_t>(c)].get<double>();
  }
  return a;
}

Objective parse_objective(const json& j, int n) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "scaled_squared_norm") {
    return Objective::scaled_squared_norm(j.value("weight", 1.0),
                                          j.contains("center") ? to_vector(j["center"], "center") : Eigen::VectorXd::Zero(n));
  }
  if (type == "exp_sum") return Objective::exp_sum(j.at("coefficient").get<double>(), n);
  if (type == "quartic_norm") {
    return Objective::quartic_norm(j.contains("center") ? to_vector(j["center"], "center") : Eigen::VectorXd::Zero(n));
  }
  if (type == "linear") return Objective::linear(to_vector(j.at("slope"), "slope"));
  if (type == "zero") return Objective::zero(n);
  throw Error(ErrorCode::kInvalidConfig, "unknown objective type '" + type + "'");
}

Problem parse_explicit_problem(const json& j) {
  const int n = j.at("n").get<int>();
  const int base = j.value("index_base", 1);
  const auto lists = j.at("neighbors").get<std::vector<std::vector<int>>>();
  Graph g = Graph::from_neighbor_lists(lists, base);

  std::vector<Objective> fs;
  for (const auto& o : j.at("objectives")) fs.push_back(parse_objective(o, n));

  std::vector<LinearConstraint> cs;
  if (j.contains("constraints")) {
    for (const auto& c : j["constraints"]) {
      if (c.is_null()) {
        cs.push_back(LinearConstraint::unconstrained(n));
      } else {
        cs.push_back(LinearConstraint::build(to_matrix(c.at("A"), n), to_vector(c.at("b"), "b"),
                                             c.value("rank_tol", LinearConstraint::kDefaultRankTol)));
      }
    }
  } else {
    cs.assign(lists.size(), LinearConstraint::unconstrained(n));
  }
  return Problem(std::move(g), std::move(fs), std::move(cs));
}

// Random constraints through a common feasible point.
// With row_rank > 0 every A_i is drawn inside one shared row space of that
// dimension. Otherwise rows are independent when m * n_i < n, and share a
// row space of dimension min(n - 1, n_i + 1) when they would fill R^n. A
// nearly full-rank stack leaves P_bar L_bar P_bar with tiny nonzero
// eigenvalues and the flow crawls.
std::vector<LinearConstraint> shared_feasibility_constraints(Rng& rng, int m, int n, int n_i, int row_rank) {
  std::vector<LinearConstraint> cs;
  if (n_i == 0) {
    cs.assign(static_cast<std::size_t>(m), LinearConstraint::unconstrained(n));
    return cs;
  }
  const Eigen::VectorXd x_feas = rng.uniform_vector(n, -1.0, 1.0);
  const bool independent = row_rank == 0 && m * n_i < n;
  Eigen::MatrixXd rows;
  if (!independent) rows = rng.uniform_matrix(row_rank > 0 ? row_rank : std::min(n - 1, n_i + 1), n, -1.0, 1.0);
  for (int i = 0; i < m; ++i) {
    Eigen::MatrixXd a = independent ? rng.uniform_matrix(n_i, n, -1.0, 1.0)
                                    : Eigen::MatrixXd(rng.uniform_matrix(n_i, rows.rows(), -1.0, 1.0) * rows);
    cs.push_back(LinearConstraint::build(a, a * x_feas));
  }
  return cs;
}

Problem paper_family_problem(std::uint64_t seed, bool relaxed) {
  constexpr int n = 20;
  constexpr int n_i = 3;
  Rng rng(seed);
  std::vector<Objective> fs;
  if (!relaxed) {
    const Eigen::VectorXd c2 = rng.uniform_vector(n, -1.0, 1.0);
    const Eigen::VectorXd c5 = rng.uniform_vector(n, -1.0, 1.0);
    fs = {Objective::scaled_squared_norm(1.0, Eigen::VectorXd::Zero(n)), Objective::scaled_squared_norm(1.0, c2),
          Objective::exp_sum(1.0, n), Objective::exp_sum(-2.0, n), Objective::quartic_norm(c5)};
  } else {
    const Eigen::VectorXd g1 = rng.uniform_vector(n, -1.0, 1.0);
    const Eigen::VectorXd g3 = rng.uniform_vector(n, -1.0, 1.0);
    const Eigen::VectorXd g5 = rng.uniform_vector(n, -1.0, 1.0);
    fs = {Objective::linear(g1), Objective::exp_sum(1.0, n), Objective::linear(g3), Objective::exp_sum(-2.0, n),
          Objective::linear(g5)};
  }
  auto cs = shared_feasibility_constraints(rng, 5, n, n_i, n_i);
  Problem p(Graph::from_neighbor_lists(paper_neighbor_lists(), 1), std::move(fs), std::move(cs));

  for (const auto& c : p.constraints()) {
    if (c.rows() != n_i) throw Error(ErrorCode::kGenerationFailed, "builtin constraint has wrong row count");
  }
  if (p.agent_count() != 5 || p.dim() != n) throw Error(ErrorCode::kGenerationFailed, "builtin has wrong shape");
  if (stacked_rank_guard(p.constraints(), n).status != RankStatus::kOk) {
    throw Error(ErrorCode::kGenerationFailed, "builtin constraint stack has full rank");
  }
  return p;
}

Objective draw_objective(Rng& rng, const FamilyWeights& w, int n, bool force_norm) {
  const double total = w.norm + w.exp + w.linear;
  const double u = rng.canonical() * total;
  if (force_norm || u < w.norm) return Objective::scaled_squared_norm(rng.uniform(0.5, 2.0), rng.uniform_vector(n, -1.0, 1.0));
  if (u < w.norm + w.exp) {
    const double sign = rng.canonical() < 0.5 ? -1.0 : 1.0;
    return Objective::exp_sum(sign * rng.uniform(0.5, 2.0), n);
  }
  return Objective::linear(rng.uniform_vector(n, -1.0, 1.0));
}

json vector_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

double max_of(const std::vector<double>& v) {
  double out = 0.0;
  for (double x : v)
    if (!std::isnan(x)) out = std::max(out, x);
  return out;
}

json nullable(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

std::vector<std::vector<int>> paper_neighbor_lists() {
  return {{1, 2, 3, 4}, {1, 2, 3}, {1, 2, 3, 4}, {1, 3, 4, 5}, {4, 5}};
}

Problem build_paper_example_5agent(std::uint64_t seed) { return paper_family_problem(seed, false); }

Problem build_relaxed_example_5agent(std::uint64_t seed) { return paper_family_problem(seed, true); }

Problem generate_random_instance(const RandomInstanceSpec& spec) {
  if (spec.m < 2 || spec.n < 1 || spec.n_i < 0) {
    throw Error(ErrorCode::kInvalidConfig, "random instance needs m >= 2, n >= 1, n_i >= 0");
  }
  const FamilyWeights& w = spec.weights;
  if (w.norm < 0 || w.exp < 0 || w.linear < 0 || !(w.norm + w.exp + w.linear > 0)) {
    throw Error(ErrorCode::kInvalidConfig, "family weights must be non-negative with a positive sum");
  }
  if (spec.row_rank < 0 || (spec.row_rank > 0 && spec.row_rank >= spec.n)) {
    throw Error(ErrorCode::kInvalidConfig, "row_rank must be 0 or in [1, n)");
  }

  std::string last_failure;
  for (int attempt = 0; attempt < kGenerationAttempts; ++attempt) {
    Rng rng({spec.seed, static_cast<std::uint64_t>(attempt)});
    std::vector<Graph::Edge> edges;
    for (int k = 1; k < spec.m; ++k) edges.emplace_back(static_cast<int>(rng.below(static_cast<std::uint64_t>(k))), k);
    for (int e = 0; e < spec.m; ++e) {
      const auto i = static_cast<int>(rng.below(static_cast<std::uint64_t>(spec.m)));
      const auto j = static_cast<int>(rng.below(static_cast<std::uint64_t>(spec.m)));
      if (i != j) edges.emplace_back(i, j);
    }
    Graph g = Graph::from_edges(spec.m, edges);

    std::vector<Objective> fs;
    for (int i = 0; i < spec.m; ++i) fs.push_back(draw_objective(rng, w, spec.n, i == 0));

    try {
      auto cs = shared_feasibility_constraints(rng, spec.m, spec.n, spec.n_i, spec.row_rank);
      if (stacked_rank_guard(cs, spec.n).status != RankStatus::kOk) {
        last_failure = "constraint stack has full rank";
        continue;
      }
      return Problem(std::move(g), std::move(fs), std::move(cs));
    } catch (const Error& e) {
      last_failure = e.what();
    }
  }
  throw Error(ErrorCode::kGenerationFailed, "no valid instance after " + std::to_string(kGenerationAttempts) +
                                                " attempts: " + last_failure);
}

double ExperimentConfig::start_time() const {
  if (t0) return *t0;
  return flow == "diminishing" && gain == "inverse_time" ? 1.0 : 0.0;
}

void ExperimentConfig::validate() const {
  const int sources = (builtin.empty() ? 0 : 1) + (random ? 1 : 0) + (explicit_problem ? 1 : 0);
  if (sources != 1) throw Error(ErrorCode::kInvalidConfig, "exactly one problem source is required");
  if (!builtin.empty() && builtin != "paper_5agent" && builtin != "relaxed_5agent") {
    throw Error(ErrorCode::kInvalidConfig, "unknown builtin '" + builtin + "'");
  }
  if (!builtin.empty() && builtin_seed == 0) throw Error(ErrorCode::kInvalidConfig, "seeds must be positive");
  if (random && random->seed == 0) throw Error(ErrorCode::kInvalidConfig, "seeds must be positive");
  if (initial_seed == 0) throw Error(ErrorCode::kInvalidConfig, "seeds must be positive");
  if (disturbance && disturbance->seed == 0) throw Error(ErrorCode::kInvalidConfig, "seeds must be positive");
  if (flow != "integral" && flow != "diminishing" && flow != "consensus") {
    throw Error(ErrorCode::kInvalidConfig, "unknown flow '" + flow + "'");
  }
  if (gain != "inverse_time" && gain != "constant") throw Error(ErrorCode::kInvalidConfig, "unknown gain '" + gain + "'");
  if (flow == "diminishing" && gain == "inverse_time" && !(start_time() > 0.0)) {
    throw Error(ErrorCode::kInvalidConfig, "the 1/t gain needs t0 > 0");
  }
  if (!(oracle_tol > 0.0)) throw Error(ErrorCode::kInvalidConfig, "oracle tolerance must be positive");
  if (oracle_method != "auto" && oracle_method != "kkt_direct" && oracle_method != "reduced_newton") {
    throw Error(ErrorCode::kInvalidConfig, "unknown oracle method '" + oracle_method + "'");
  }
  if (!(t_max > start_time())) throw Error(ErrorCode::kInvalidConfig, "t_max must exceed the start time");
  if (w_threshold < 0.0) throw Error(ErrorCode::kInvalidConfig, "w_threshold must be non-negative");
  if (samples < 1 && !(sample_dt > 0.0)) throw Error(ErrorCode::kInvalidConfig, "need samples >= 1 or sample_dt > 0");
  if (!(initial_scale >= 0.0)) throw Error(ErrorCode::kInvalidConfig, "initial scale must be non-negative");
  integrator.validate();
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  ExperimentConfig cfg;
  try {
    const json& prob = j.at("problem");
    if (prob.contains("builtin")) {
      cfg.builtin = prob["builtin"].get<std::string>();
      cfg.builtin_seed = prob.value("seed", std::uint64_t{1});
    }
    if (prob.contains("random")) {
      const json& r = prob["random"];
      RandomInstanceSpec spec;
      spec.m = r.value("m", spec.m);
      spec.n = r.value("n", spec.n);
      spec.n_i = r.value("n_i", spec.n_i);
      spec.seed = r.value("seed", spec.seed);
      spec.row_rank = r.value("row_rank", spec.row_rank);
      if (r.contains("family_weights")) {
        const json& w = r["family_weights"];
        spec.weights.norm = w.value("norm", spec.weights.norm);
        spec.weights.exp = w.value("exp", spec.weights.exp);
        spec.weights.linear = w.value("linear", spec.weights.linear);
      }
      cfg.random = spec;
    }
    if (prob.contains("explicit")) cfg.explicit_problem = prob["explicit"];

    if (j.contains("initial")) {
      cfg.initial_scale = j["initial"].value("scale", cfg.initial_scale);
      cfg.initial_seed = j["initial"].value("seed", cfg.initial_seed);
    }

    if (j.contains("algorithm")) {
      const json& a = j["algorithm"];
      cfg.flow = a.value("flow", cfg.flow);
      if (a.contains("gain")) {
        cfg.gain = a["gain"].value("kind", cfg.gain);
        cfg.gain_value = a["gain"].value("value", cfg.gain_value);
      }
      if (a.contains("t0") && !a["t0"].is_null()) cfg.t0 = a["t0"].get<double>();
      if (a.contains("disturbance") && !a["disturbance"].is_null()) {
        const json& d = a["disturbance"];
        DisturbanceSpec ds;
        if (d.contains("range")) {
          ds.lo = d["range"].at(0).get<double>();
          ds.hi = d["range"].at(1).get<double>();
        }
        ds.hold = d.value("hold", ds.hold);
        ds.seed = d.value("seed", ds.seed);
        cfg.disturbance = ds;
      }
    }

    if (j.contains("integrator")) {
      const json& ij = j["integrator"];
      IntegratorConfig& ic = cfg.integrator;
      ic.method = method_from_string(ij.value("method", to_string(ic.method)));
      ic.step = ij.value("step", ic.step);
      ic.rel_tol = ij.value("rel_tol", ic.rel_tol);
      ic.abs_tol = ij.value("abs_tol", ic.abs_tol);
      ic.h_min = ij.value("h_min", ic.h_min);
      if (ij.contains("h_max") && !ij["h_max"].is_null()) ic.h_max = ij["h_max"].get<double>();
      ic.align_breakpoints = ij.value("align_breakpoints", ic.align_breakpoints);
    }

    if (j.contains("oracle")) {
      cfg.oracle_tol = j["oracle"].value("tol", cfg.oracle_tol);
      cfg.oracle_method = j["oracle"].value("method", cfg.oracle_method);
    }

    if (j.contains("stop")) {
      const json& s = j["stop"];
      cfg.w_threshold = s.value("w_threshold", cfg.w_threshold);
      cfg.t_max = s.value("t_max", cfg.t_max);
      cfg.samples = s.value("samples", cfg.samples);
      cfg.sample_dt = s.value("sample_dt", cfg.sample_dt);
    }

    if (j.contains("outputs")) {
      cfg.csv_path = j["outputs"].value("csv", "");
      cfg.json_path = j["outputs"].value("json", "");
      cfg.plot_path = j["outputs"].value("plot", "");
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, e.what());
  }
  cfg.validate();
  return cfg;
}

json ExperimentConfig::to_json(bool with_outputs) const {
  json j;
  if (!builtin.empty()) j["problem"] = {{"builtin", builtin}, {"seed", builtin_seed}};
  if (random) {
    j["problem"] = {{"random",
                     {{"m", random->m},
                      {"n", random->n},
                      {"n_i", random->n_i},
                      {"seed", random->seed},
                      {"row_rank", random->row_rank},
                      {"family_weights",
                       {{"norm", random->weights.norm}, {"exp", random->weights.exp}, {"linear", random->weights.linear}}}}}};
  }
  if (explicit_problem) j["problem"] = {{"explicit", *explicit_problem}};
  j["initial"] = {{"scale", initial_scale}, {"seed", initial_seed}};
  json alg = {{"flow", flow}, {"gain", {{"kind", gain}, {"value", gain_value}}}, {"t0", start_time()}};
  if (disturbance) {
    alg["disturbance"] = {
        {"range", {disturbance->lo, disturbance->hi}}, {"hold", disturbance->hold}, {"seed", disturbance->seed}};
  }
  j["algorithm"] = alg;
  j["integrator"] = {{"method", to_string(integrator.method)},
                     {"step", integrator.step},
                     {"rel_tol", integrator.rel_tol},
                     {"abs_tol", integrator.abs_tol},
                     {"h_min", integrator.h_min},
                     {"h_max", std::isfinite(integrator.h_max) ? json(integrator.h_max) : json(nullptr)},
                     {"align_breakpoints", integrator.align_breakpoints}};
  j["oracle"] = {{"tol", oracle_tol}, {"method", oracle_method}};
  j["stop"] = {{"w_threshold", w_threshold}, {"t_max", t_max}, {"samples", samples}, {"sample_dt", sample_dt}};
  if (with_outputs) j["outputs"] = {{"csv", csv_path}, {"json", json_path}, {"plot", plot_path}};
  return j;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open config '" + path + "'");
  json j;
  try {
    j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, path + ": " + e.what());
  }
  return ExperimentConfig::from_json(j);
}

ExperimentConfig paper_fig1_config(std::uint64_t seed, const std::string& flow) {
  ExperimentConfig cfg;
  cfg.builtin = "paper_5agent";
  cfg.builtin_seed = seed;
  cfg.initial_seed = seed;
  cfg.flow = flow;
  cfg.integrator.rel_tol = 1e-10;
  cfg.integrator.abs_tol = 1e-12;
  cfg.t_max = 200.0;
  cfg.sample_dt = 0.1;
  cfg.samples = 0;
  if (flow == "integral") cfg.w_threshold = 1e-16;
  return cfg;
}

ExperimentConfig paper_fig2_config(std::uint64_t seed, const std::string& flow, int m) {
  ExperimentConfig cfg;
  RandomInstanceSpec spec;
  spec.m = m;
  spec.n = 5;
  spec.n_i = 0;
  spec.seed = seed;
  cfg.random = spec;
  cfg.initial_seed = seed;
  cfg.flow = flow;
  cfg.disturbance = DisturbanceSpec{0.0, 0.01, 0.1, seed};
  cfg.t_max = 500.0;
  cfg.samples = 1000;
  return cfg;
}

Problem build_problem(const ExperimentConfig& cfg) {
  if (cfg.builtin == "paper_5agent") return build_paper_example_5agent(cfg.builtin_seed);
  if (cfg.builtin == "relaxed_5agent") return build_relaxed_example_5agent(cfg.builtin_seed);
  if (cfg.random) return generate_random_instance(*cfg.random);
  if (cfg.explicit_problem) return parse_explicit_problem(*cfg.explicit_problem);
  throw Error(ErrorCode::kInvalidConfig, "no problem source");
}

std::optional<double> first_time_below(const TrajectoryRecord& rec, double threshold) {
  for (std::size_t k = 0; k < rec.size(); ++k)
    if (rec.w[k] <= threshold) return rec.times[k];
  return std::nullopt;
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  const auto wall_start = std::chrono::steady_clock::now();
  in_stage("config", [&] {
    cfg.validate();
    return 0;
  });

  auto problem = in_stage("problem", [&] { return std::make_shared<const Problem>(build_problem(cfg)); });
  const Problem& p = *problem;
  const int m = p.agent_count();
  const int n = p.dim();
  const RankDiagnostic guard = stacked_rank_guard(p.constraints(), n);

  ExperimentResult result;
  result.oracle = in_stage("oracle", [&] {
    OracleMethod method = OracleMethod::kAuto;
    if (cfg.oracle_method == "kkt_direct") method = OracleMethod::kKktDirect;
    if (cfg.oracle_method == "reduced_newton") method = OracleMethod::kReducedNewton;
    return solve(p, cfg.oracle_tol, method);
  });
  const Eigen::VectorXd& x_star = result.oracle.x_star;
  const double curvature = reduced_curvature(p, x_star, result.oracle.subspace.basis);
  const bool strongly_convex = result.oracle.subspace.empty_kernel() || curvature > 1e-8;

  const bool integral = cfg.flow == "integral";
  const bool disturbed = cfg.disturbance.has_value();
  Eigen::VectorXd y_star;
  CoordinateSplit split;
  double equilibrium_residual = std::numeric_limits<double>::quiet_NaN();
  const double grad_scale = 1.0 + p.stacked_gradient(p.replicate(x_star)).norm();
  if (integral) {
    in_stage("analysis", [&] {
      y_star = equilibrium_y_star(p, x_star);
      split = build_split(p);
      const IntegralRate r = rhs_integral({p.replicate(x_star), y_star}, p, 0.0);
      equilibrium_residual = r.dx.norm() + r.dy.norm();
      return 0;
    });
  }

  Eigen::VectorXd x0(p.stacked_dim());
  for (int i = 0; i < m; ++i) {
    p.agent(x0, i) = p.constraints()[static_cast<std::size_t>(i)].randomize_feasible(
        derive_seed(cfg.initial_seed, static_cast<std::uint64_t>(i)), cfg.initial_scale);
  }

  Flow flow;
  Eigen::VectorXd s0;
  if (integral) {
    flow = integral_flow(problem);
    s0 = NetworkState::initial(x0).pack();
  } else if (cfg.flow == "diminishing") {
    flow = diminishing_flow(problem, cfg.gain == "constant" ? constant_gain(cfg.gain_value) : inverse_time_gain());
    s0 = x0;
  } else {
    flow = consensus_flow(problem);
    s0 = x0;
  }
  if (disturbed) {
    const DisturbanceSpec& d = *cfg.disturbance;
    flow = with_disturbance(std::move(flow), DisturbanceSource(d.seed, d.lo, d.hi, d.hold, n), m);
  }

  const double t0 = cfg.start_time();
  const Eigen::Index mn = p.stacked_dim();
  const Trajectory traj = in_stage("integrate", [&] {
    if (cfg.w_threshold > 0.0) {
      StopRule stop;
      stop.metric = [&](double, const Eigen::VectorXd& s) { return w_metric(s.head(mn), x_star); };
      stop.threshold = cfg.w_threshold;
      stop.t_max = cfg.t_max;
      stop.sample_dt = cfg.sample_dt > 0.0 ? cfg.sample_dt : (cfg.t_max - t0) / cfg.samples;
      return integrate_to_convergence(flow, s0, t0, cfg.integrator, stop);
    }
    std::vector<double> grid;
    if (cfg.sample_dt > 0.0) {
      for (long k = 0;; ++k) {
        const double t = t0 + static_cast<double>(k) * cfg.sample_dt;
        if (t >= cfg.t_max) break;
        grid.push_back(t);
      }
      grid.push_back(cfg.t_max);
    } else {
      grid = uniform_grid(t0, cfg.t_max, cfg.samples);
    }
    return integrate(flow, s0, t0, cfg.t_max, grid, cfg.integrator);
  });
  result.stop_reason = to_string(traj.reason);

  AnalysisContext ctx;
  if (integral) ctx = {&split, &y_star};
  result.record = build_record(p, traj, integral, x_star, ctx);
  TrajectoryRecord& rec = result.record;

  const json canonical = cfg.to_json(false);
  const std::string canonical_text = canonical.dump();
  char hash_hex[17];
  std::snprintf(hash_hex, sizeof(hash_hex), "%016llx", static_cast<unsigned long long>(fnv1a(canonical_text)));
  rec.metadata = {
      {"config_hash", hash_hex},
      {"config", canonical_text},
      {"flow", flow.name},
      {"agents", std::to_string(m)},
      {"dim", std::to_string(n)},
      {"initial_seed", std::to_string(cfg.initial_seed)},
      {"integrator", to_string(cfg.integrator.method)},
      {"rel_tol", format_double(cfg.integrator.rel_tol)},
      {"abs_tol", format_double(cfg.integrator.abs_tol)},
      {"h_min", format_double(cfg.integrator.h_min)},
      {"h_max", format_double(cfg.integrator.h_max)},
      {"rk4_step", format_double(cfg.integrator.step)},
      {"align_breakpoints", cfg.integrator.align_breakpoints ? "true" : "false"},
      {"oracle_method", result.oracle.method},
      {"oracle_tol", format_double(cfg.oracle_tol)},
      {"f_star", format_double(result.oracle.f_star)},
      {"stop_reason", result.stop_reason},
  };

  // Embedded invariant checks.
  const double max_constraint = max_of(rec.constraint_res);
  double max_v_increase = 0.0;
  for (std::size_t k = 1; k < rec.size(); ++k)
    if (integral) max_v_increase = std::max(max_v_increase, rec.v[k] - rec.v[k - 1]);
  const double max_y1 = integral ? max_of(rec.y1_norm) : std::numeric_limits<double>::quiet_NaN();
  const double max_sum_y = integral ? max_of(rec.sum_y_norm) : std::numeric_limits<double>::quiet_NaN();

  auto& checks = result.checks;
  checks["oracle_certificate"] = result.oracle.stationarity <= std::max(cfg.oracle_tol, 1e-8) &&
                                 result.oracle.feasibility <= 1e-8 * (1.0 + stack_rhs(p.constraints()).norm());
  if (!disturbed) checks["constraint_feasibility"] = max_constraint <= 1e-7;
  if (integral) {
    checks["sum_y_conservation"] = max_sum_y <= 1e-8;
    checks["equilibrium_fixed_point"] = equilibrium_residual <= 1e-8 * grad_scale;
    if (!disturbed) {
      checks["lyapunov_descent"] = max_v_increase <= 1e-9;
      checks["y1_conservation"] = max_y1 <= 1e-6;
    }
  }
  double gap_initial = std::numeric_limits<double>::quiet_NaN();
  double gap_final = gap_initial;
  if (rec.size() > 0) {
    gap_initial = sum_value(p.objectives(), p.agent_mean(rec.states.front().x)) - result.oracle.f_star;
    gap_final = sum_value(p.objectives(), p.agent_mean(rec.states.back().x)) - result.oracle.f_star;
  }
  if (!strongly_convex && !disturbed) checks["optimality_gap_decrease"] = std::abs(gap_final) <= std::abs(gap_initial);

  result.passed = true;
  for (const auto& [name, ok] : checks) result.passed = result.passed && ok;

  json rate = nullptr;
  if (integral && strongly_convex && !disturbed) {
    try {
      const RateFit fit = rate_fit(rec.times, rec.w, 1e-8, 1e-2);
      rate = {{"slope", fit.slope}, {"intercept", fit.intercept}, {"r_squared", fit.r_squared}, {"samples", fit.samples},
              {"window", {1e-8, 1e-2}}};
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kInsufficientSamples) throw;
    }
  }

  json s2_min = nullptr;
  if (integral && split.s2.rows() > 0) {
    s2_min = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(split.s2).eigenvalues()[0];
  }

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  json& summary = result.summary;
  summary["config"] = canonical;
  summary["config_hash"] = hash_hex;
  summary["problem"] = {{"agents", m},
                        {"dim", n},
                        {"edges", p.graph().edges().size()},
                        {"degrees", p.graph().degrees()},
                        {"stacked_rank", guard.rank},
                        {"rank_guard", guard.status == RankStatus::kOk ? "OK" : "WARN"}};
  summary["oracle"] = {{"x_star", vector_json(x_star)},
                       {"f_star", result.oracle.f_star},
                       {"stationarity", result.oracle.stationarity},
                       {"feasibility", result.oracle.feasibility},
                       {"method", result.oracle.method},
                       {"iterations", result.oracle.iterations},
                       {"kernel_dim", result.oracle.subspace.basis.cols()},
                       {"reduced_curvature", curvature},
                       {"strongly_convex", strongly_convex}};
  summary["analysis"] = {{"rate_fit", rate},
                         {"max_v_increase", integral ? json(max_v_increase) : json(nullptr)},
                         {"max_y1_norm", nullable(max_y1)},
                         {"max_sum_y_norm", nullable(max_sum_y)},
                         {"equilibrium_residual", nullable(equilibrium_residual)},
                         {"kernel_dim", integral ? json(split.kernel_dim()) : json(nullptr)},
                         {"range_dim", integral ? json(split.range_dim()) : json(nullptr)},
                         {"s2_min_eigenvalue", s2_min}};
  const std::size_t last = rec.size() - 1;
  summary["run"] = {{"flow", flow.name},
                    {"t0", t0},
                    {"t_final", rec.times[last]},
                    {"stop_reason", result.stop_reason},
                    {"samples", rec.size()},
                    {"w_initial", rec.w.front()},
                    {"w_final", rec.w[last]},
                    {"consensus_error_final", rec.consensus_err[last]},
                    {"constraint_violation_final", rec.constraint_res[last]},
                    {"optimality_gap_initial", nullable(gap_initial)},
                    {"optimality_gap_final", nullable(gap_final)},
                    {"steps_accepted", traj.stats.accepted},
                    {"steps_rejected", traj.stats.rejected},
                    {"rhs_evaluations", traj.stats.rhs_evals},
                    {"wall_seconds", wall}};
  json first_hits = json::object();
  for (double thr : {1e-2, 1e-4, 1e-6, 1e-8}) {
    const auto t = first_time_below(rec, thr);
    first_hits[format_double(thr)] = t ? json(*t) : json(nullptr);
  }
  summary["run"]["first_time_w_below"] = first_hits;
  summary["checks"] = checks;
  summary["passed"] = result.passed;

  in_stage("output", [&] {
    if (!cfg.csv_path.empty()) {
      std::ofstream out(cfg.csv_path, std::ios::binary);
      if (!out) throw Error(ErrorCode::kIo, "cannot write '" + cfg.csv_path + "'");
      write_csv(rec, out);
    }
    if (!cfg.json_path.empty()) {
      std::ofstream out(cfg.json_path, std::ios::binary);
      if (!out) throw Error(ErrorCode::kIo, "cannot write '" + cfg.json_path + "'");
      out << summary.dump(2) << '\n';
    }
    if (!cfg.plot_path.empty()) {
      std::ofstream out(cfg.plot_path, std::ios::binary);
      if (!out) throw Error(ErrorCode::kIo, "cannot write '" + cfg.plot_path + "'");
      out << render_log_w_svg({{flow.name, &rec}});
    }
    return 0;
  });
  return result;
}

std::string render_log_w_svg(const std::vector<std::pair<std::string, const TrajectoryRecord*>>& series) {
  constexpr double kWidth = 720, kHeight = 440, kLeft = 70, kRight = 20, kTop = 20, kBottom = 50;
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

  double t_lo = INFINITY, t_hi = -INFINITY, l_lo = INFINITY, l_hi = -INFINITY;
  for (const auto& [name, rec] : series) {
    for (std::size_t k = 0; k < rec->size(); ++k) {
      if (!(rec->w[k] > 0.0)) continue;
      const double l = std::log(rec->w[k]);
      t_lo = std::min(t_lo, rec->times[k]);
      t_hi = std::max(t_hi, rec->times[k]);
      l_lo = std::min(l_lo, l);
      l_hi = std::max(l_hi, l);
    }
  }
  if (!(t_hi > t_lo)) t_hi = t_lo + 1.0;
  if (!(l_hi > l_lo)) l_hi = l_lo + 1.0;
  auto px = [&](double t) { return kLeft + (t - t_lo) / (t_hi - t_lo) * (kWidth - kLeft - kRight); };
  auto py = [&](double l) { return kTop + (l_hi - l) / (l_hi - l_lo) * (kHeight - kTop - kBottom); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<line x1=\"" << kLeft << "\" y1=\"" << kHeight - kBottom << "\" x2=\"" << kWidth - kRight << "\" y2=\""
      << kHeight - kBottom << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << kHeight - kBottom
      << "\" stroke=\"black\"/>\n";
  svg << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 10 << "\" font-size=\"14\">t</text>\n";
  svg << "<text x=\"10\" y=\"" << kHeight / 2 << "\" font-size=\"14\">ln W</text>\n";
  svg << "<text x=\"" << kLeft << "\" y=\"" << kHeight - kBottom + 18 << "\" font-size=\"11\">" << format_double(t_lo)
      << "</text>\n";
  svg << "<text x=\"" << kWidth - kRight - 40 << "\" y=\"" << kHeight - kBottom + 18 << "\" font-size=\"11\">"
      << format_double(t_hi) << "</text>\n";
  svg << "<text x=\"" << 5 << "\" y=\"" << kTop + 10 << "\" font-size=\"11\">" << std::round(l_hi) << "</text>\n";
  svg << "<text x=\"" << 5 << "\" y=\"" << kHeight - kBottom << "\" font-size=\"11\">" << std::round(l_lo)
      << "</text>\n";

  std::size_t index = 0;
  for (const auto& [name, rec] : series) {
    const char* color = kColors[index % 5];
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t k = 0; k < rec->size(); ++k) {
      if (!(rec->w[k] > 0.0)) continue;
      svg << px(rec->times[k]) << ',' << py(std::log(rec->w[k])) << ' ';
    }
    svg << "\"/>\n";
    svg << "<text x=\"" << kWidth - 200 << "\" y=\"" << kTop + 16 * (index + 1) << "\" font-size=\"12\" fill=\"" << color
        << "\">" << name << "</text>\n";
    ++index;
  }
  svg << "</svg>\n";
  return svg.str();
}

std::vector<CheckOutcome> run_check_suite() {
  std::vector<CheckOutcome> out;
  auto record = [&](std::string name, auto&& fn) {
    CheckOutcome c;
    c.name = std::move(name);
    try {
      c.passed = fn(c.detail);
    } catch (const std::exception& e) {
      c.passed = false;
      c.detail = e.what();
    }
    out.push_back(std::move(c));
  };

  record("projector_contract", [](std::string& detail) {
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      Rng rng(seed);
      const int n = 2 + static_cast<int>(rng.below(6));
      const int rows = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
      const Eigen::MatrixXd a = rng.uniform_matrix(rows, n, -1, 1);
      const auto c = LinearConstraint::build(a, a * rng.uniform_vector(n, -1, 1));
      const Eigen::MatrixXd& pr = c.projector();
      worst = std::max({worst, (pr * pr - pr).norm(), (a * pr).norm(), (pr - pr.transpose()).norm()});
    }
    detail = "max defect " + format_double(worst);
    return worst <= 1e-10;
  });

  record("gradient_finite_difference", [](std::string& detail) {
    double worst = 0.0;
    Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
      const int n = 4;
      const std::vector<Objective> fs = {Objective::scaled_squared_norm(1.5, rng.uniform_vector(n, -1, 1)),
                                         Objective::exp_sum(-1.3, n), Objective::quartic_norm(rng.uniform_vector(n, -1, 1)),
                                         Objective::linear(rng.uniform_vector(n, -1, 1)), Objective::zero(n)};
      const Eigen::VectorXd x = rng.uniform_vector(n, -1, 1);
      for (const auto& f : fs) {
        const Eigen::VectorXd g = f.gradient(x);
        const Eigen::VectorXd fd = finite_diff_gradient(f, x, 1e-5 * (1.0 + x.norm()));
        worst = std::max(worst, (g - fd).norm() / (1.0 + g.norm()));
      }
    }
    detail = "max relative error " + format_double(worst);
    return worst <= 1e-5;
  });

  record("laplacian_kernel_connectivity", [](std::string& detail) {
    int mismatches = 0;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
      Rng rng(seed);
      const int m = 1 + static_cast<int>(rng.below(8));
      std::vector<Graph::Edge> edges;
      for (int e = 0; e < m; ++e)
        edges.emplace_back(static_cast<int>(rng.below(static_cast<std::uint64_t>(m))),
                           static_cast<int>(rng.below(static_cast<std::uint64_t>(m))));
      const Graph g = Graph::from_edges(m, edges);
      const Eigen::MatrixXd lap = g.laplacian();
      const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(lap).eigenvalues();
      int zeros = 0;
      for (Eigen::Index k = 0; k < ev.size(); ++k)
        if (std::abs(ev[k]) < 1e-9) ++zeros;
      if ((lap * Eigen::VectorXd::Ones(m)).norm() != 0.0 || zeros != g.component_count()) ++mismatches;
    }
    detail = std::to_string(mismatches) + " mismatches";
    return mismatches == 0;
  });

  record("equilibrium_and_lyapunov", [](std::string& detail) {
    RandomInstanceSpec spec;
    spec.m = 4;
    spec.n = 3;
    spec.n_i = 1;
    spec.seed = 3;
    ExperimentConfig cfg;
    cfg.random = spec;
    cfg.t_max = 20.0;
    cfg.samples = 200;
    const ExperimentResult r = run_experiment(cfg);
    std::ostringstream msg;
    for (const auto& [name, ok] : r.checks) msg << name << '=' << (ok ? "ok" : "FAIL") << ' ';
    detail = msg.str();
    return r.passed;
  });

  record("integrator_exponential", [](std::string& detail) {
    Flow f;
    f.dim = 1;
    f.rhs = [](double, const Eigen::VectorXd& x, Eigen::VectorXd& dx) { dx = -x; };
    IntegratorConfig ic;
    ic.rel_tol = 1e-9;
    ic.abs_tol = 1e-12;
    const Trajectory t = integrate(f, Eigen::VectorXd::Ones(1), 0.0, 1.0, {1.0}, ic);
    const double err = std::abs(t.states.back()[0] - std::exp(-1.0));
    detail = "error " + format_double(err);
    return err <= 1e-8;
  });

  return out;
}

}  // namespace intfb
