#pragma once

#include <Eigen/Dense>

#include "clsrivc/lti.hpp"
#include "clsrivc/poly.hpp"
#include "clsrivc/signals.hpp"
#include "clsrivc/theta.hpp"

namespace clsrivc {

enum class ControllerKind { kContinuous, kDiscreteWithHold };
enum class RefChannel { kR1, kR2 };

std::string to_string(ControllerKind kind);

/// The continuous-time loop y = G u + v, u = r - C y, driven by held
/// external inputs. With controller_kind == kDiscreteWithHold the
/// continuous controller is replaced by its hold-equivalent discretization
/// followed by a ZOH, so the plant input is exactly piecewise-held.
struct ClosedLoopSystem {
  TransferFunction plant;  // B/A with the A(0) = 1 normalization
  Polynomial f, l;         // controller C = F/L
  ControllerKind controller_kind = ControllerKind::kContinuous;
  double sample_period = 0.1;
  Hold reference_hold = Hold::kZoh;
  Hold noise_hold = Hold::kZoh;
  RefChannel ref_channel = RefChannel::kR1;

  /// Rescales the plant so A(0) = 1 and checks the loop is well formed.
  static ClosedLoopSystem make(const TransferFunction& plant,
                               const Polynomial& f, const Polynomial& l,
                               ControllerKind kind, double sample_period,
                               Hold reference_hold = Hold::kZoh,
                               Hold noise_hold = Hold::kZoh,
                               RefChannel ref_channel = RefChannel::kR1);

  TransferFunction controller() const { return TransferFunction(f, l); }
  /// Q = A L + B F.
  Polynomial char_poly() const {
    return closed_loop_char(plant.den(), plant.num(), l, f);
  }

  /// Throws listing the first violated stability/coprimeness requirement:
  /// plant proper and stable, coprime B/A, stable L, Hurwitz Q.
  void validate() const;
};

struct Dataset {
  SampledSignal r, u, y, u_star, x_star, v;

  int size() const { return r.size(); }
  /// CSV with header `t,r,u,y,u_star,x_star,v`.
  void write_csv(const std::string& path) const;
};

/// Exact samples of the closed loop driven by the held reference and held
/// noise. No numerical integration error: all continuous evolution is
/// computed through matrix exponentials over one sampling period.
/// u_star/x_star are the v == 0 responses.
Dataset simulate(const ClosedLoopSystem& sys, const SampledSignal& r,
                 const SampledSignal& v);

enum class ProbeChannel { kPlantInput, kPlantOutput };

struct Probe {
  TransferFunction filt;
  ProbeChannel channel;
};

/// Exact samples of each probe filter applied to the continuous, noise-free
/// plant input u(t) or output x(t) of the closed loop, computed by
/// augmenting the loop state space with the filter states.
std::vector<std::vector<double>> simulate_probes(const ClosedLoopSystem& sys,
                                                 const SampledSignal& r,
                                                 const std::vector<Probe>& probes);

/// Single-probe convenience wrapper.
SampledSignal true_filtered_derivative(const ClosedLoopSystem& sys,
                                       const SampledSignal& r,
                                       const TransferFunction& filt,
                                       ProbeChannel channel);

/// Interpolation-error samples at model theta_j.
///
/// delta: N x (n+m+1); column i (i = 1..n) is the filter-then-sample minus
/// sample-then-filter discrepancy of p^{n+1-i}/A_j on the plant output;
/// the input-block columns are identically zero. u_discrepancy: N x (m+1);
/// the analogous discrepancy of p^{m+1-j}/A_j on the plant input, reported
/// separately. est_hold is the intersample behaviour the sample-then-filter
/// path assumes.
struct DeltaResult {
  Eigen::MatrixXd delta;
  Eigen::MatrixXd u_discrepancy;
};

DeltaResult delta_vector(const ClosedLoopSystem& sys, const SampledSignal& r,
                         const ThetaVector& theta_j, Hold est_hold);

/// Input-channel commutation error at theta_bar:
///   {B/(A(1+G*C)) r(t)}_{t_k}  -  [B/A]_d { (1/(1+G*C)) r(t) }_{t_k}.
SampledSignal epsilon_u(const ClosedLoopSystem& sys, const SampledSignal& r,
                        const ThetaVector& theta_bar, Hold est_hold);

}  // namespace clsrivc
