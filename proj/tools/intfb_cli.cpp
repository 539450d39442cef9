#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "intfb/error.hpp"
#include "intfb/harness.hpp"

namespace fs = std::filesystem;
using namespace intfb;

namespace {

struct Options {
  std::string out_dir = ".";
  bool quiet = false;
  bool emit_plot = false;
};

void assign_outputs(ExperimentConfig& cfg, const Options& opt, const std::string& stem) {
  const fs::path dir(opt.out_dir);
  cfg.csv_path = (dir / (stem + ".csv")).string();
  cfg.json_path = (dir / (stem + ".json")).string();
  cfg.plot_path = opt.emit_plot ? (dir / (stem + ".svg")).string() : std::string();
}

void report(const std::string& label, const ExperimentResult& r, bool quiet) {
  if (quiet) return;
  const auto& run = r.summary["run"];
  std::cout << label << ": flow=" << run["flow"].get<std::string>() << " t_final=" << run["t_final"].get<double>()
            << " W_final=" << run["w_final"].get<double>() << " stop=" << r.stop_reason
            << " checks=" << (r.passed ? "pass" : "FAIL") << '\n';
  for (const auto& [name, ok] : r.checks)
    if (!ok) std::cout << "  failed check: " << name << '\n';
}

// W of `rec` at the sample nearest to t.
double w_near(const TrajectoryRecord& rec, double t) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < rec.size(); ++k)
    if (std::abs(rec.times[k] - t) < std::abs(rec.times[best] - t)) best = k;
  return rec.w[best];
}

int run_pair(ExperimentConfig integral, ExperimentConfig baseline, const std::string& prefix, const Options& opt) {
  assign_outputs(integral, opt, prefix + "_integral");
  assign_outputs(baseline, opt, prefix + "_diminishing");
  integral.plot_path.clear();
  baseline.plot_path.clear();

  auto pending = std::async(std::launch::async, [baseline] { return run_experiment(baseline); });
  const ExperimentResult a = run_experiment(integral);
  const ExperimentResult b = pending.get();

  report(prefix + " integral", a, opt.quiet);
  report(prefix + " diminishing", b, opt.quiet);
  if (opt.emit_plot) {
    const fs::path plot = fs::path(opt.out_dir) / (prefix + ".svg");
    std::ofstream out(plot, std::ios::binary);
    if (!out) throw Error(ErrorCode::kIo, "cannot write '" + plot.string() + "'");
    out << render_log_w_svg({{"integral", &a.record}, {"diminishing", &b.record}});
  }

  if (!opt.quiet && prefix == "fig1") {
    if (const auto hit = first_time_below(a.record, 1e-6)) {
      const double elapsed = *hit - integral.start_time();
      std::cout << "integral W <= 1e-6 at t=" << *hit << "; diminishing W after the same elapsed time: "
                << w_near(b.record, baseline.start_time() + elapsed) << '\n';
    } else {
      std::cout << "integral flow did not reach W <= 1e-6\n";
    }
  }
  if (!opt.quiet && prefix == "fig2") {
    std::cout << "W(50) -> W(t_max): integral " << w_near(a.record, 50.0) << " -> " << a.record.w.back()
              << ", diminishing " << w_near(b.record, 50.0) << " -> " << b.record.w.back() << '\n';
  }
  return a.passed && b.passed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Consensus optimization with integral feedback"};
  app.require_subcommand(1);
  Options opt;
  app.add_option("--out-dir", opt.out_dir, "Directory for CSV, JSON and SVG outputs");
  app.add_flag("--quiet", opt.quiet, "Suppress progress output");
  app.add_flag("--emit-plot", opt.emit_plot, "Write an SVG of ln W against t");

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run one experiment from a JSON config");
  run->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);

  std::uint64_t seed1 = 1;
  auto* fig1 = app.add_subcommand("paper-fig1", "Five-agent example, integral flow against the 1/t baseline");
  fig1->add_option("--seed", seed1, "Instance seed")->check(CLI::PositiveNumber);

  std::uint64_t seed2 = 1;
  int agents = 30;
  auto* fig2 = app.add_subcommand("paper-fig2", "Disturbed random network, integral flow against the 1/t baseline");
  fig2->add_option("--seed", seed2, "Instance seed")->check(CLI::PositiveNumber);
  fig2->add_option("--agents", agents, "Number of agents")->check(CLI::Range(2, 1000));

  auto* check = app.add_subcommand("check", "Invariant suite on small instances");

  CLI11_PARSE(app, argc, argv);

  try {
    std::error_code ec;
    fs::create_directories(opt.out_dir, ec);
    if (ec) throw Error(ErrorCode::kIo, "cannot create '" + opt.out_dir + "': " + ec.message());

    if (run->parsed()) {
      ExperimentConfig cfg = load_config(config_path);
      const std::string stem = fs::path(config_path).stem().string();
      const bool had_paths = !cfg.csv_path.empty() || !cfg.json_path.empty();
      if (!had_paths || app.get_option("--out-dir")->count() > 0) {
        assign_outputs(cfg, opt, stem);
      } else if (opt.emit_plot && cfg.plot_path.empty()) {
        cfg.plot_path = (fs::path(opt.out_dir) / (stem + ".svg")).string();
      }
      const ExperimentResult r = run_experiment(cfg);
      report(stem, r, opt.quiet);
      return r.passed ? 0 : 1;
    }
    if (fig1->parsed()) {
      return run_pair(paper_fig1_config(seed1, "integral"), paper_fig1_config(seed1, "diminishing"), "fig1", opt);
    }
    if (fig2->parsed()) {
      return run_pair(paper_fig2_config(seed2, "integral", agents), paper_fig2_config(seed2, "diminishing", agents),
                      "fig2", opt);
    }
    if (check->parsed()) {
      bool ok = true;
      for (const auto& c : run_check_suite()) {
        ok = ok && c.passed;
        if (!opt.quiet || !c.passed) {
          std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << "  " << c.detail << '\n';
        }
      }
      return ok ? 0 : 1;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
