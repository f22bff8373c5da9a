#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "clsrivc/estimator.hpp"
#include "clsrivc/sim.hpp"

namespace clsrivc {

/// Number of leading samples discarded before any time average: ten times
/// the slowest time constant among the loop and filter poles.
int warmup_samples(const ClosedLoopSystem& sys, const ThetaVector& theta_j);

/// Empirical decomposition of the modified normal matrix E{phi_hat phi^T}
/// into the coefficient-factorized term E{phi_hat phi_tilde^T}, the
/// interpolation-error term and the noise term. The interpolation-error
/// term here uses the full filter/sample discrepancy on both the output and
/// input blocks, so the residual noise term vanishes identically in
/// noise-free data.
struct NormalMatrixDecomposition {
  Eigen::MatrixXd total;
  Eigen::MatrixXd sylvester_term;
  Eigen::MatrixXd delta_term;
  Eigen::MatrixXd noise_term;
  int n_samples = 0;
};

NormalMatrixDecomposition decompose_normal_matrix(const ClosedLoopSystem& sys,
                                                  const SampledSignal& r,
                                                  const SampledSignal& v,
                                                  const ThetaVector& theta_j,
                                                  Hold est_hold = Hold::kZoh);

/// The nonsingularity condition: the spectral norm of the
/// interpolation-error cross moment must stay below the smallest singular
/// value of the factorized term.
struct Theorem1Condition {
  double lhs = 0.0;
  double sigma_min = 0.0;
  bool holds = false;
};

Theorem1Condition theorem1_condition(const NormalMatrixDecomposition& d);

/// Converging-point bias certificate: compares the coefficients h of
/// H(p) = B* A_bar - B_bar A* against the prediction -Phi_bar^{-1} Psi_bar
/// built from filtered reference-derivative stacks and the input-channel
/// commutation error.
struct BiasCertificate {
  Eigen::VectorXd h;
  Eigen::MatrixXd phi_bar;
  Eigen::VectorXd psi_bar;
  Eigen::VectorXd predicted_h;
  double relative_match = 0.0;

  /// CSV `index,h,predicted_h,relative_match`.
  void write_csv(const std::string& path) const;
};

BiasCertificate bias_certificate(const ClosedLoopSystem& sys,
                                 const SampledSignal& r,
                                 const ThetaVector& theta_bar,
                                 const ThetaVector& theta_true,
                                 Hold est_hold = Hold::kZoh);

/// One consistency-sweep cell.
struct SweepRow {
  ControllerKind controller_kind;
  int n = 0;
  int replicate = 0;
  double err_norm = 0.0;   // noisy-run parameter error
  double bias_norm = 0.0;  // noise-free parameter error at this N
  bool converged = false;
};

struct SweepSpec {
  std::vector<int> n_grid;
  int replicates = 1;
  std::uint64_t seed = 0;
  double noise_variance = 0.0;
  /// Builds the reference realization for (length, seed).
  std::function<SampledSignal(int, std::uint64_t)> reference_factory;
  EstimatorOptions estimator;
  ThetaVector theta_true;
  /// Controller kinds to sweep; defaults to both.
  std::vector<ControllerKind> kinds = {ControllerKind::kContinuous,
                                       ControllerKind::kDiscreteWithHold};
  int threads = 0;  // 0: hardware concurrency
};

struct SweepTable {
  std::vector<SweepRow> rows;
  /// Fraction of replicates that failed to converge.
  double failure_rate = 0.0;
  /// Smallest eigenvalue of the empirical reference-stack moment matrix at
  /// theta_true (positive under sufficient excitation).
  double phi_star_min_eig = 0.0;

  double median_err(ControllerKind kind, int n) const;
  /// CSV `controller_kind,N,replicate,err_norm,bias_norm,converged`.
  void write_csv(const std::string& path) const;
};

SweepTable consistency_sweep(const ClosedLoopSystem& sys,
                             const SweepSpec& spec);

}  // namespace clsrivc
