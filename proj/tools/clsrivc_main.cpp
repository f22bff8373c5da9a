// Command-line front end: simulate / estimate / sweep / certify on a
// key-value experiment config. Outputs land in --out as
// <command>_<timestamp>.csv plus summary.txt; bodies depend only on the
// config and seed so repeated runs diff clean.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "clsrivc/analysis.hpp"
#include "clsrivc/config.hpp"
#include "clsrivc/estimator.hpp"
#include "clsrivc/sim.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitConvergence = 3;
constexpr int kExitIo = 4;

struct CliError : std::runtime_error {
  int code;
  CliError(int c, const std::string& what) : std::runtime_error(what), code(c) {}
};

std::string timestamp_now() {
  const std::time_t t =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d%02d%02d-%02d%02d%02d",
                tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday, tm.tm_hour,
                tm.tm_min, tm.tm_sec);
  return buf;
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", x);
  return buf;
}

clsrivc::SampledSignal zero_signal(int n, double h) {
  return clsrivc::SampledSignal{std::vector<double>(static_cast<std::size_t>(n), 0.0),
                                h, clsrivc::Hold::kZoh};
}

clsrivc::ThetaVector plant_theta(const clsrivc::ExperimentConfig& cfg) {
  return clsrivc::ThetaVector::from_model(
      clsrivc::TransferFunction(cfg.plant_b, cfg.plant_a));
}

struct CommandResult {
  std::string csv_path;             // file written by the command
  std::vector<std::string> headlines;
};

CommandResult run_simulate(const clsrivc::ExperimentConfig& cfg,
                           std::uint64_t seed, const std::string& csv_path) {
  const int n = cfg.run_n.front();
  clsrivc::SampledSignal r = cfg.make_reference(n, seed);
  clsrivc::SampledSignal v = cfg.make_noise(n, seed + 1000);
  clsrivc::Dataset data = clsrivc::simulate(cfg.make_system(), r, v);
  data.write_csv(csv_path);

  double y2 = 0.0, v2 = 0.0;
  for (int k = 0; k < n; ++k) {
    y2 += data.y.values[static_cast<std::size_t>(k)] *
          data.y.values[static_cast<std::size_t>(k)];
    v2 += data.v.values[static_cast<std::size_t>(k)] *
          data.v.values[static_cast<std::size_t>(k)];
  }
  CommandResult res;
  res.csv_path = csv_path;
  res.headlines = {
      "samples = " + std::to_string(n),
      "controller = " + clsrivc::to_string(cfg.controller_kind),
      "mean square y = " + fmt(y2 / n),
      "mean square v = " + fmt(v2 / n),
  };
  return res;
}

CommandResult run_estimate(const clsrivc::ExperimentConfig& cfg,
                           std::uint64_t seed, const std::string& csv_path) {
  const int n = cfg.run_n.front();
  clsrivc::SampledSignal r = cfg.make_reference(n, seed);
  clsrivc::SampledSignal v = cfg.make_noise(n, seed + 1000);
  clsrivc::Dataset data = clsrivc::simulate(cfg.make_system(), r, v);

  clsrivc::EstimateResult est;
  try {
    est = clsrivc::clsrivc(data, cfg.controller_f, cfg.controller_l,
                           cfg.make_estimator_options());
  } catch (const std::exception& e) {
    throw CliError(kExitConvergence, std::string("estimate: ") + e.what());
  }
  if (!est.converged) {
    throw CliError(kExitConvergence,
                   "estimate: iteration budget exhausted before the relative "
                   "step fell below tol");
  }
  est.write_trace_csv(csv_path);

  const Eigen::VectorXd err =
      est.theta.stacked() - plant_theta(cfg).stacked();
  std::ostringstream theta_line;
  theta_line << "theta =";
  for (double x : est.theta.a) theta_line << " " << fmt(x);
  for (double x : est.theta.b) theta_line << " " << fmt(x);
  CommandResult res;
  res.csv_path = csv_path;
  res.headlines = {
      theta_line.str(),
      "iterations = " + std::to_string(est.iterations),
      "fixed point residual = " + fmt(est.fixed_point_residual),
      "parameter error norm = " + fmt(err.norm()),
  };
  return res;
}

CommandResult run_sweep(const clsrivc::ExperimentConfig& cfg,
                        std::uint64_t seed, const std::string& csv_path) {
  clsrivc::SweepSpec spec;
  spec.n_grid = cfg.run_n;
  spec.replicates = cfg.run_replicates;
  spec.seed = seed;
  spec.noise_variance = cfg.noise_variance;
  spec.reference_factory = [&cfg](int n, std::uint64_t s) {
    return cfg.make_reference(n, s);
  };
  spec.estimator = cfg.make_estimator_options();
  spec.theta_true = plant_theta(cfg);

  clsrivc::SweepTable table;
  try {
    table = clsrivc::consistency_sweep(cfg.make_system(), spec);
  } catch (const std::exception& e) {
    throw CliError(kExitConvergence, std::string("sweep: ") + e.what());
  }
  table.write_csv(csv_path);

  CommandResult res;
  res.csv_path = csv_path;
  res.headlines = {"failure rate = " + fmt(table.failure_rate),
                   "excitation moment min eig = " + fmt(table.phi_star_min_eig)};
  for (auto kind : {clsrivc::ControllerKind::kContinuous,
                    clsrivc::ControllerKind::kDiscreteWithHold}) {
    for (const auto& row : table.rows) {
      if (row.controller_kind == kind && row.replicate < 0) {
        res.headlines.push_back("bias norm (" + clsrivc::to_string(kind) +
                                ", N=" + std::to_string(row.n) +
                                ") = " + fmt(row.bias_norm));
      }
    }
    for (int n : spec.n_grid) {
      if (spec.replicates > 0) {
        res.headlines.push_back("median error (" + clsrivc::to_string(kind) +
                                ", N=" + std::to_string(n) +
                                ") = " + fmt(table.median_err(kind, n)));
      }
    }
  }
  return res;
}

CommandResult run_certify(const clsrivc::ExperimentConfig& cfg,
                          std::uint64_t seed, const std::string& csv_path) {
  const int n = cfg.run_n.back();
  clsrivc::ClosedLoopSystem sys = cfg.make_system();
  clsrivc::SampledSignal r = cfg.make_reference(n, seed);
  clsrivc::SampledSignal v = zero_signal(n, cfg.period);
  clsrivc::Dataset data = clsrivc::simulate(sys, r, v);
  const clsrivc::ThetaVector theta_true = plant_theta(cfg);

  clsrivc::EstimateResult est;
  try {
    est = clsrivc::clsrivc(data, cfg.controller_f, cfg.controller_l,
                           cfg.make_estimator_options());
  } catch (const std::exception& e) {
    throw CliError(kExitConvergence, std::string("certify: ") + e.what());
  }
  if (!est.converged) {
    throw CliError(kExitConvergence,
                   "certify: noise-free run did not reach a fixed point");
  }

  clsrivc::NormalMatrixDecomposition d =
      clsrivc::decompose_normal_matrix(sys, r, v, theta_true, cfg.est_hold);
  clsrivc::Theorem1Condition cond = clsrivc::theorem1_condition(d);
  clsrivc::BiasCertificate cert =
      clsrivc::bias_certificate(sys, r, est.theta, theta_true, cfg.est_hold);
  cert.write_csv(csv_path);

  const double bias = (est.theta.stacked() - theta_true.stacked()).norm();
  CommandResult res;
  res.csv_path = csv_path;
  res.headlines = {
      "bias norm = " + fmt(bias),
      "nonsingularity lhs = " + fmt(cond.lhs),
      "nonsingularity sigma_min = " + fmt(cond.sigma_min),
      std::string("nonsingularity holds = ") + (cond.holds ? "yes" : "no"),
      "certificate relative match = " + fmt(cert.relative_match),
  };
  return res;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"closed-loop continuous-time system identification toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed_override;
  std::string out_dir = ".";
  bool force = false;

  std::vector<CLI::App*> subs;
  for (const char* name : {"simulate", "estimate", "sweep", "certify"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "experiment config file")
        ->required();
    sub->add_option("--seed", seed_override, "override sim.noise.seed");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_flag("--force", force, "run even if validation fails");
    subs.push_back(sub);
  }
  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  clsrivc::ExperimentConfig cfg;
  try {
    cfg = clsrivc::ExperimentConfig::parse_file(config_path);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitValidation;
  }
  const std::uint64_t seed = seed_override.value_or(cfg.noise_seed);
  cfg.noise_seed = seed;

  clsrivc::ValidationReport report;
  try {
    report = clsrivc::validate(cfg, seed);
  } catch (const std::exception& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  }
  std::cout << report.to_string();
  if (!report.all_pass() && !force) {
    std::cerr << "validation failed; rerun with --force to proceed anyway\n";
    return kExitValidation;
  }

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    std::cerr << "output directory error: " << ec.message() << "\n";
    return kExitIo;
  }
  const std::string csv_path =
      (std::filesystem::path(out_dir) / (command + "_" + timestamp_now() + ".csv"))
          .string();

  CommandResult result;
  try {
    if (command == "simulate") {
      result = run_simulate(cfg, seed, csv_path);
    } else if (command == "estimate") {
      result = run_estimate(cfg, seed, csv_path);
    } else if (command == "sweep") {
      result = run_sweep(cfg, seed, csv_path);
    } else {
      result = run_certify(cfg, seed, csv_path);
    }
  } catch (const CliError& e) {
    std::cerr << e.what() << "\n";
    return e.code;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << command << ": " << e.what() << "\n";
    return kExitIo;
  }

  char hash_hex[32];
  std::snprintf(hash_hex, sizeof(hash_hex), "%016llx",
                static_cast<unsigned long long>(cfg.hash));
  std::ofstream summary(std::filesystem::path(out_dir) / "summary.txt");
  if (!summary.good()) {
    std::cerr << "i/o error: cannot write summary.txt\n";
    return kExitIo;
  }
  summary << "command = " << command << "\n";
  summary << "config hash = " << hash_hex << "\n";
  summary << "seed = " << seed << "\n";
  summary << report.to_string();
  for (const auto& line : result.headlines) summary << line << "\n";
  summary.close();
  if (!summary.good()) {
    std::cerr << "i/o error: failed writing summary.txt\n";
    return kExitIo;
  }

  for (const auto& line : result.headlines) std::cout << line << "\n";
  std::cout << "wrote " << result.csv_path << "\n";
  return 0;
}
