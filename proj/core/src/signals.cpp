#include "clsrivc/signals.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>

namespace clsrivc {

std::string to_string(Hold hold) {
  return hold == Hold::kZoh ? "zoh" : "foh";
}

SampledSignal gen_multisine(const std::vector<double>& freqs,
                            const std::vector<double>& amps,
                            const std::vector<double>& phases, int n,
                            double period) {
  if (freqs.size() != amps.size() || freqs.size() != phases.size()) {
    throw std::invalid_argument("gen_multisine: length mismatch");
  }
  if (period <= 0.0) throw std::invalid_argument("gen_multisine: period <= 0");
  const double nyquist = std::numbers::pi / period;
  for (double w : freqs) {
    if (w >= nyquist) {
      throw std::invalid_argument("gen_multisine: frequency above Nyquist");
    }
  }
  SampledSignal out{std::vector<double>(static_cast<std::size_t>(n), 0.0),
                    period, Hold::kZoh};
  for (int k = 0; k < n; ++k) {
    double v = 0.0;
    for (std::size_t i = 0; i < freqs.size(); ++i) {
      v += amps[i] * std::sin(freqs[i] * k * period + phases[i]);
    }
    out.values[static_cast<std::size_t>(k)] = v;
  }
  return out;
}

SampledSignal gen_piecewise_constant(const std::vector<double>& levels,
                                     int dwell, int n, std::uint64_t seed,
                                     double period) {
  if (levels.empty()) {
    throw std::invalid_argument("gen_piecewise_constant: empty level set");
  }
  if (dwell < 1) throw std::invalid_argument("gen_piecewise_constant: dwell < 1");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, levels.size() - 1);
  SampledSignal out{std::vector<double>(static_cast<std::size_t>(n), 0.0),
                    period, Hold::kZoh};
  double level = 0.0;
  for (int k = 0; k < n; ++k) {
    if (k % dwell == 0) level = levels[pick(rng)];
    out.values[static_cast<std::size_t>(k)] = level;
  }
  return out;
}

SampledSignal gen_white_noise(double variance, int n, std::uint64_t seed,
                              double period) {
  if (variance < 0.0) throw std::invalid_argument("gen_white_noise: variance < 0");
  SampledSignal out{std::vector<double>(static_cast<std::size_t>(n), 0.0),
                    period, Hold::kZoh};
  if (variance == 0.0) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, std::sqrt(variance));
  for (auto& v : out.values) v = dist(rng);
  return out;
}

SampledSignal gen_colored_noise(double variance, double pole, int n,
                                std::uint64_t seed, double period) {
  if (std::abs(pole) >= 1.0) {
    throw std::invalid_argument("gen_colored_noise: shaping pole must be stable");
  }
  SampledSignal white = gen_white_noise(1.0, n, seed, period);
  SampledSignal out{std::vector<double>(static_cast<std::size_t>(n), 0.0),
                    period, Hold::kZoh};
  double state = 0.0;
  double sumsq = 0.0;
  for (int k = 0; k < n; ++k) {
    state = pole * state + white.values[static_cast<std::size_t>(k)];
    out.values[static_cast<std::size_t>(k)] = state;
    sumsq += state * state;
  }
  if (variance == 0.0 || sumsq == 0.0) {
    for (auto& v : out.values) v = 0.0;
    return out;
  }
  const double scale = std::sqrt(variance / (sumsq / n));
  for (auto& v : out.values) v *= scale;
  return out;
}

int excitation_order(const SampledSignal& x, int max_order, double rank_tol) {
  const int n = x.size();
  if (max_order < 1) throw std::invalid_argument("excitation_order: max_order < 1");
  if (n < 10 * max_order) {
    throw std::invalid_argument("excitation_order: signal too short");
  }
  // Circular second moments; exact (no edge leakage) for periodic inputs.
  std::vector<double> c(static_cast<std::size_t>(max_order), 0.0);
  for (int lag = 0; lag < max_order; ++lag) {
    double s = 0.0;
    for (int k = 0; k < n; ++k) {
      s += x.values[static_cast<std::size_t>(k)] *
           x.values[static_cast<std::size_t>((k + lag) % n)];
    }
    c[static_cast<std::size_t>(lag)] = s / n;
  }
  int order = 0;
  for (int q = 1; q <= max_order; ++q) {
    Eigen::MatrixXd t(q, q);
    for (int i = 0; i < q; ++i) {
      for (int j = 0; j < q; ++j) {
        t(i, j) = c[static_cast<std::size_t>(std::abs(i - j))];
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(t);
    const double lmax = eig.eigenvalues().maxCoeff();
    if (lmax <= 0.0) break;
    if (eig.eigenvalues().minCoeff() <= rank_tol * lmax) break;
    order = q;
  }
  return order;
}

void write_signal_csv(const std::string& path, const SampledSignal& x) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_signal_csv: cannot open " + path);
  out << "t,value\n";
  char buf[64];
  for (int k = 0; k < x.size(); ++k) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", k * x.period,
                  x.values[static_cast<std::size_t>(k)]);
    out << buf;
  }
}

SampledSignal read_signal_csv(const std::string& path, Hold hold) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_signal_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("t,value", 0) != 0) {
    throw std::runtime_error("read_signal_csv: missing `t,value` header");
  }
  SampledSignal out;
  out.hold = hold;
  double t0 = 0.0, t1 = 0.0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    double t, v;
    char comma;
    if (!(row >> t >> comma >> v)) {
      throw std::runtime_error("read_signal_csv: bad row: " + line);
    }
    if (out.values.empty()) t0 = t;
    if (out.values.size() == 1) t1 = t;
    out.values.push_back(v);
  }
  out.period = out.values.size() > 1 ? t1 - t0 : 1.0;
  return out;
}

}  // namespace clsrivc
