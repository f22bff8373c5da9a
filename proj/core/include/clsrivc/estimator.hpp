#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "clsrivc/lti.hpp"
#include "clsrivc/sim.hpp"
#include "clsrivc/signals.hpp"
#include "clsrivc/theta.hpp"

namespace clsrivc {

/// Filtered regressor matrix (rows indexed by sample) and filtered output.
struct RegressorSet {
  Eigen::MatrixXd phi_f;
  Eigen::MatrixXd phi_hat_f;
  Eigen::VectorXd y_f;
};

/// phi_f column i (i <= n) = -p^{n+1-i}/A_j applied to y; column n+j =
/// p^{m+1-j}/A_j applied to u; y_f = 1/A_j applied to y. All filters are
/// hold-equivalent discretizations at the common sampling period.
std::pair<Eigen::MatrixXd, Eigen::VectorXd> build_regressor(
    const SampledSignal& u, const SampledSignal& y, const ThetaVector& theta_j,
    Hold hold);

/// Instrument matrix built from the reference through the model-based
/// sensitivity functions: column i (i <= n) = -p^{n+1-i} B_j L/(A_j Q_j)
/// applied to r; column n+j = p^{m+1-j} L/Q_j applied to r, where
/// Q_j = A_j L + B_j F.
Eigen::MatrixXd build_instruments(const SampledSignal& r,
                                  const ThetaVector& theta_j,
                                  const Polynomial& f, const Polynomial& l,
                                  Hold hold);

/// Same instrument matrix through the coefficient-matrix factorization:
/// S(-B_j, A_j) applied to the stack of p^{n+m+1-d} L/(A_j Q_j) filtered
/// references. Used as the independent second route in tests.
Eigen::MatrixXd instruments_via_sylvester(const SampledSignal& r,
                                          const ThetaVector& theta_j,
                                          const Polynomial& f,
                                          const Polynomial& l, Hold hold);

/// One iteration: solves [(1/N) sum phi_hat phi^T] theta = (1/N) sum
/// phi_hat y_f. Throws if the normal matrix condition number exceeds 1e12
/// (usually an excitation-order problem or the inconsistency condition).
ThetaVector clsrivc_step(const Eigen::MatrixXd& phi_hat,
                         const Eigen::MatrixXd& phi, const Eigen::VectorXd& y_f,
                         int n, int m);

/// Reflects unstable model-denominator roots into the left half plane
/// (preserving magnitude, hence filter bandwidth), then shrinks b toward 0
/// by bisection until A_j L + B_j F is Hurwitz as well.
ThetaVector stabilize(const ThetaVector& theta, const Polynomial& f,
                      const Polynomial& l);

struct IterationRecord {
  ThetaVector theta;
  double rel_step = 0.0;
};

struct EstimateResult {
  ThetaVector theta;
  int iterations = 0;
  bool converged = false;
  std::vector<IterationRecord> trace;
  double fixed_point_residual = 0.0;

  /// CSV trace `iter,a_1..a_n,b_0..b_m,rel_step`.
  void write_trace_csv(const std::string& path) const;
};

struct EstimatorOptions {
  double tol = 1e-8;
  int max_iter = 100;
  Hold hold = Hold::kZoh;  // intersample behaviour assumed by all filters
  std::optional<ThetaVector> theta_0;  // default: self-instrumented LS
  int model_n = 0;  // used when theta_0 is not given
  int model_m = 0;
};

/// The iterative closed-loop estimator: instruments are rebuilt from the
/// reference at each iterate; stops when the relative parameter step falls
/// below tol.
EstimateResult clsrivc(const Dataset& data, const Polynomial& f,
                       const Polynomial& l, const EstimatorOptions& options);

}  // namespace clsrivc
