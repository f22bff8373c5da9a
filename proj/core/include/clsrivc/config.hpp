#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "clsrivc/analysis.hpp"
#include "clsrivc/estimator.hpp"
#include "clsrivc/sim.hpp"

namespace clsrivc {

enum class ReferenceType { kMultisine, kPiecewiseConstant };

/// Flat key-value experiment description (dotted section keys, `#` comments).
struct ExperimentConfig {
  // plant.a / plant.b: descending coefficient lists
  Polynomial plant_a, plant_b;
  // controller.f / controller.l / controller.kind
  Polynomial controller_f, controller_l;
  ControllerKind controller_kind = ControllerKind::kContinuous;
  // sim.*
  double period = 0.1;
  ReferenceType reference_type = ReferenceType::kMultisine;
  Hold reference_hold = Hold::kZoh;
  Hold noise_hold = Hold::kZoh;
  std::vector<double> multisine_freqs, multisine_amps, multisine_phases;
  std::vector<double> pwc_levels;
  int pwc_dwell = 5;
  double noise_variance = 0.0;
  double noise_color = 0.0;  // AR(1) shaping pole; 0 = white
  std::uint64_t noise_seed = 1;
  // est.*
  double est_tol = 1e-8;
  int est_max_iter = 100;
  Hold est_hold = Hold::kZoh;
  int est_n = 0, est_m = 0;  // 0,0: inherit plant orders
  std::optional<std::vector<double>> theta_0;  // stacked [a_1..a_n, b_0..b_m]
  // run.*
  std::vector<int> run_n;
  int run_replicates = 1;

  /// 64-bit FNV-1a hash of the canonical key=value form.
  std::uint64_t hash = 0;

  static ExperimentConfig parse_file(const std::string& path);
  static ExperimentConfig parse_string(const std::string& text);

  int model_n() const { return est_n > 0 ? est_n : plant_a.degree(); }
  int model_m() const {
    return est_m > 0 ? est_m : (plant_b.is_zero() ? 0 : plant_b.degree());
  }
  int required_excitation_order() const;

  ClosedLoopSystem make_system() const;
  ClosedLoopSystem make_system(ControllerKind kind) const;
  SampledSignal make_reference(int n, std::uint64_t seed) const;
  SampledSignal make_noise(int n, std::uint64_t seed) const;
  EstimatorOptions make_estimator_options() const;
};

struct AssumptionCheck {
  std::string name;  // "A1".."A6"
  bool pass = false;
  std::string detail;
};

struct ValidationReport {
  std::vector<AssumptionCheck> checks;
  bool all_pass() const;
  std::string to_string() const;
};

/// Evaluates Assumptions A1-A6 on the configured system, reference and
/// initial model; every check is evaluated even after failures.
ValidationReport validate(const ExperimentConfig& config,
                          std::uint64_t seed = 1);

}  // namespace clsrivc
