#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace clsrivc {

/// Intersample reconstruction assumed for a sampled sequence.
enum class Hold { kZoh, kFoh };

std::string to_string(Hold hold);

/// Uniformly sampled real sequence with its sampling period and the
/// intersample behaviour of the underlying continuous signal.
struct SampledSignal {
  std::vector<double> values;
  double period = 0.0;
  Hold hold = Hold::kZoh;

  int size() const { return static_cast<int>(values.size()); }
};

/// values[k] = sum_i amps[i] * sin(freqs[i] * k * period + phases[i]).
/// Frequencies are rad/s and must be strictly sub-Nyquist.
SampledSignal gen_multisine(const std::vector<double>& freqs,
                            const std::vector<double>& amps,
                            const std::vector<double>& phases, int n,
                            double period);

/// Piecewise-constant reference: one level drawn uniformly from `levels`
/// per dwell block, reproducible from the seed. Tagged ZOH.
SampledSignal gen_piecewise_constant(const std::vector<double>& levels,
                                     int dwell, int n, std::uint64_t seed,
                                     double period);

/// Zero-mean Gaussian sequence with the given variance, seeded.
SampledSignal gen_white_noise(double variance, int n, std::uint64_t seed,
                              double period);

/// Colored noise: white Gaussian shaped by a stable discrete AR(1) filter
/// 1/(1 - pole z^-1), output rescaled to the requested variance.
SampledSignal gen_colored_noise(double variance, double pole, int n,
                                std::uint64_t seed, double period);

/// Largest q <= max_order such that the q x q Toeplitz matrix of circular
/// second moments has all eigenvalues > rank_tol times its largest one.
int excitation_order(const SampledSignal& x, int max_order,
                     double rank_tol = 1e-6);

/// Two-column CSV (header `t,value`), 17 significant digits.
void write_signal_csv(const std::string& path, const SampledSignal& x);
SampledSignal read_signal_csv(const std::string& path, Hold hold = Hold::kZoh);

}  // namespace clsrivc
