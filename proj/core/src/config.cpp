#include "clsrivc/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace clsrivc {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<double> parse_list(const std::string& value,
                               const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    try {
      std::size_t pos = 0;
      out.push_back(std::stod(item, &pos));
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw std::runtime_error("config: bad number '" + item + "' for key " + key);
    }
  }
  return out;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

ExperimentConfig ExperimentConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str());
}

ExperimentConfig ExperimentConfig::parse_string(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash_pos = line.find('#');
    if (hash_pos != std::string::npos) line = line.substr(0, hash_pos);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("config: line " + std::to_string(lineno) +
                               ": expected key = value, got '" + line + "'");
    }
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }

  ExperimentConfig cfg;
  std::string canonical;
  for (const auto& [k, v] : kv) canonical += k + "=" + v + "\n";
  cfg.hash = fnv1a(canonical);

  auto take = [&](const std::string& key) -> std::optional<std::string> {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    return it->second;
  };
  auto number = [&](const std::string& key, double fallback) {
    auto v = take(key);
    if (!v) return fallback;
    auto list = parse_list(*v, key);
    if (list.size() != 1) throw std::runtime_error("config: " + key + " must be a single number");
    return list[0];
  };

  if (auto v = take("plant.a")) cfg.plant_a = Polynomial(parse_list(*v, "plant.a"));
  if (auto v = take("plant.b")) cfg.plant_b = Polynomial(parse_list(*v, "plant.b"));
  if (auto v = take("controller.f")) cfg.controller_f = Polynomial(parse_list(*v, "controller.f"));
  if (auto v = take("controller.l")) cfg.controller_l = Polynomial(parse_list(*v, "controller.l"));
  if (auto v = take("controller.kind")) {
    if (*v == "continuous") cfg.controller_kind = ControllerKind::kContinuous;
    else if (*v == "discrete_zoh") cfg.controller_kind = ControllerKind::kDiscreteWithHold;
    else throw std::runtime_error("config: controller.kind must be continuous|discrete_zoh");
  }
  cfg.period = number("sim.period", cfg.period);
  if (auto v = take("sim.reference.type")) {
    if (*v == "multisine") cfg.reference_type = ReferenceType::kMultisine;
    else if (*v == "pwc") cfg.reference_type = ReferenceType::kPiecewiseConstant;
    else throw std::runtime_error("config: sim.reference.type must be multisine|pwc");
  }
  auto parse_hold = [](const std::string& v, const std::string& key) {
    if (v == "zoh") return Hold::kZoh;
    if (v == "foh") return Hold::kFoh;
    throw std::runtime_error("config: " + key + " must be zoh|foh");
  };
  if (auto v = take("sim.reference.hold")) cfg.reference_hold = parse_hold(*v, "sim.reference.hold");
  if (auto v = take("sim.noise.hold")) cfg.noise_hold = parse_hold(*v, "sim.noise.hold");
  if (auto v = take("sim.reference.freqs")) cfg.multisine_freqs = parse_list(*v, "sim.reference.freqs");
  if (auto v = take("sim.reference.amps")) cfg.multisine_amps = parse_list(*v, "sim.reference.amps");
  if (auto v = take("sim.reference.phases")) cfg.multisine_phases = parse_list(*v, "sim.reference.phases");
  if (auto v = take("sim.reference.levels")) cfg.pwc_levels = parse_list(*v, "sim.reference.levels");
  cfg.pwc_dwell = static_cast<int>(number("sim.reference.dwell", cfg.pwc_dwell));
  cfg.noise_variance = number("sim.noise.variance", cfg.noise_variance);
  cfg.noise_color = number("sim.noise.color", cfg.noise_color);
  cfg.noise_seed = static_cast<std::uint64_t>(number("sim.noise.seed", 1.0));
  cfg.est_tol = number("est.tol", cfg.est_tol);
  cfg.est_max_iter = static_cast<int>(number("est.max_iter", cfg.est_max_iter));
  if (auto v = take("est.hold")) cfg.est_hold = parse_hold(*v, "est.hold");
  cfg.est_n = static_cast<int>(number("est.n", 0));
  cfg.est_m = static_cast<int>(number("est.m", -1));
  if (cfg.est_m < 0) cfg.est_m = 0;
  if (auto v = take("est.theta0"); v && *v != "auto") {
    cfg.theta_0 = parse_list(*v, "est.theta0");
  }
  if (auto v = take("run.n")) {
    for (double x : parse_list(*v, "run.n")) cfg.run_n.push_back(static_cast<int>(x));
  }
  cfg.run_replicates = static_cast<int>(number("run.replicates", cfg.run_replicates));

  if (cfg.plant_a.is_zero()) throw std::runtime_error("config: missing plant.a");
  if (cfg.controller_l.is_zero()) throw std::runtime_error("config: missing controller.l");
  if (cfg.period <= 0.0) throw std::runtime_error("config: sim.period must be > 0");

  // 8-tone default reference meeting a comfortable excitation order.
  if (cfg.multisine_freqs.empty() && cfg.reference_type == ReferenceType::kMultisine) {
    for (int i = 1; i <= 8; ++i) {
      cfg.multisine_freqs.push_back(0.2 * i * (1.0 + 0.1 * i));
    }
  }
  if (cfg.multisine_amps.empty()) {
    cfg.multisine_amps.assign(cfg.multisine_freqs.size(), 1.0);
  }
  if (cfg.multisine_phases.empty()) {
    for (std::size_t i = 0; i < cfg.multisine_freqs.size(); ++i) {
      cfg.multisine_phases.push_back(0.37 * static_cast<double>(i));
    }
  }
  if (cfg.pwc_levels.empty()) cfg.pwc_levels = {-1.0, 1.0};
  if (cfg.run_n.empty()) cfg.run_n = {10000};
  return cfg;
}

int ExperimentConfig::required_excitation_order() const {
  const int n = model_n();
  const int m = model_m();
  const int nl = controller_l.degree();
  const int nf = controller_f.is_zero() ? 0 : controller_f.degree();
  return n + std::max(n + nl, m + nf) + 1;
}

ClosedLoopSystem ExperimentConfig::make_system() const {
  return make_system(controller_kind);
}

ClosedLoopSystem ExperimentConfig::make_system(ControllerKind kind) const {
  return ClosedLoopSystem::make(TransferFunction(plant_b, plant_a),
                                controller_f, controller_l, kind, period,
                                reference_hold, noise_hold);
}

SampledSignal ExperimentConfig::make_reference(int n, std::uint64_t seed) const {
  if (reference_type == ReferenceType::kMultisine) {
    SampledSignal s = gen_multisine(multisine_freqs, multisine_amps,
                                    multisine_phases, n, period);
    s.hold = reference_hold;
    return s;
  }
  SampledSignal s = gen_piecewise_constant(pwc_levels, pwc_dwell, n, seed, period);
  s.hold = reference_hold;
  return s;
}

SampledSignal ExperimentConfig::make_noise(int n, std::uint64_t seed) const {
  SampledSignal s = noise_color == 0.0
                        ? gen_white_noise(noise_variance, n, seed, period)
                        : gen_colored_noise(noise_variance, noise_color, n,
                                            seed, period);
  s.hold = noise_hold;
  return s;
}

EstimatorOptions ExperimentConfig::make_estimator_options() const {
  EstimatorOptions opt;
  opt.tol = est_tol;
  opt.max_iter = est_max_iter;
  opt.hold = est_hold;
  opt.model_n = model_n();
  opt.model_m = model_m();
  if (theta_0) {
    Eigen::VectorXd v(static_cast<int>(theta_0->size()));
    for (int i = 0; i < v.size(); ++i) v(i) = (*theta_0)[static_cast<std::size_t>(i)];
    opt.theta_0 = ThetaVector::from_stacked(v, opt.model_n, opt.model_m);
  }
  return opt;
}

bool ValidationReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const AssumptionCheck& c) { return c.pass; });
}

std::string ValidationReport::to_string() const {
  std::string out;
  for (const auto& c : checks) {
    out += c.name + ": " + (c.pass ? "pass" : "FAIL") + " (" + c.detail + ")\n";
  }
  return out;
}

ValidationReport validate(const ExperimentConfig& config, std::uint64_t seed) {
  ValidationReport report;
  auto add = [&](const std::string& name, bool pass, const std::string& detail) {
    report.checks.push_back({name, pass, detail});
  };
  char buf[256];

  // A1: stability and coprimeness of plant, controller and loop.
  {
    bool pass = true;
    std::string detail;
    try {
      const Polynomial& a = config.plant_a;
      const Polynomial& b = config.plant_b;
      const bool plant_ok = is_hurwitz(a);
      const bool cop = b.is_zero() || coprime(b, a);
      const bool proper = b.is_zero() || b.degree() <= a.degree();
      const bool l_ok = is_hurwitz(config.controller_l);
      const Polynomial q = closed_loop_char(a, b, config.controller_l,
                                            config.controller_f);
      const bool q_ok = is_hurwitz(q);
      double max_re = -std::numeric_limits<double>::infinity();
      if (q.degree() >= 1) {
        for (const auto& r : roots(q)) max_re = std::max(max_re, r.real());
      }
      pass = plant_ok && cop && proper && l_ok && q_ok;
      std::snprintf(buf, sizeof(buf),
                    "plant stable=%d coprime=%d proper=%d L stable=%d "
                    "max Re(Q roots)=%.4g",
                    plant_ok, cop, proper, l_ok, max_re);
      detail = buf;
    } catch (const std::exception& e) {
      pass = false;
      detail = e.what();
    }
    add("A1", pass, detail);
  }

  // A2: reference and noise are generated from independent seeded streams.
  add("A2", true,
      "reference and noise use independent seeded generators by construction");

  // A3: empirical excitation order of the generated reference.
  {
    bool pass = false;
    std::string detail;
    try {
      const int required = config.required_excitation_order();
      const int nsig = std::max(20000, 20 * required);
      SampledSignal r = config.make_reference(nsig, seed);
      const int measured = excitation_order(r, required);
      pass = measured >= required;
      std::snprintf(buf, sizeof(buf), "required order %d, measured >= %d",
                    required, measured);
      detail = buf;
    } catch (const std::exception& e) {
      detail = e.what();
    }
    add("A3", pass, detail);
  }

  // Initial model for A4/A6: explicit theta_0, or the plant itself.
  ThetaVector theta0;
  bool theta0_ok = true;
  try {
    if (config.theta_0) {
      Eigen::VectorXd v(static_cast<int>(config.theta_0->size()));
      for (int i = 0; i < v.size(); ++i) v(i) = (*config.theta_0)[static_cast<std::size_t>(i)];
      theta0 = ThetaVector::from_stacked(v, config.model_n(), config.model_m());
    } else {
      theta0 = ThetaVector::from_model(
          TransferFunction(config.plant_b, config.plant_a));
    }
  } catch (const std::exception&) {
    theta0_ok = false;
  }

  // A4: stability of the model filters and model loop.
  {
    bool pass = false;
    std::string detail = "initial model could not be formed";
    if (theta0_ok) {
      try {
        const Polynomial aj = theta0.a_poly();
        const Polynomial qj = closed_loop_char(aj, theta0.b_poly(),
                                               config.controller_l,
                                               config.controller_f);
        const bool aj_ok = is_hurwitz(aj);
        const bool qj_ok = is_hurwitz(qj);
        const bool order_ok = theta0.m() <= theta0.n();
        pass = aj_ok && qj_ok && order_ok;
        std::snprintf(buf, sizeof(buf), "A_j stable=%d, A_jL+B_jF stable=%d, m<=n=%d",
                      aj_ok, qj_ok, order_ok);
        detail = buf;
      } catch (const std::exception& e) {
        detail = e.what();
      }
    }
    add("A4", pass, detail);
  }

  // A5: model orders match the plant orders.
  {
    const int n_true = config.plant_a.degree();
    const int m_true = config.plant_b.is_zero() ? 0 : config.plant_b.degree();
    const bool pass = config.model_n() == n_true && config.model_m() == m_true;
    std::snprintf(buf, sizeof(buf), "model (n=%d,m=%d) vs plant (n=%d,m=%d)",
                  config.model_n(), config.model_m(), n_true, m_true);
    add("A5", pass, buf);
  }

  // A6: sampling frequency vs imaginary parts of A_j * Q* roots.
  {
    bool pass = false;
    std::string detail = "initial model could not be formed";
    if (theta0_ok) {
      try {
        const Polynomial q = closed_loop_char(config.plant_a, config.plant_b,
                                              config.controller_l,
                                              config.controller_f);
        const Polynomial prod = theta0.a_poly() * q;
        double max_im = 0.0;
        if (prod.degree() >= 1) {
          for (const auto& r : roots(prod)) max_im = std::max(max_im, std::abs(r.imag()));
        }
        const double ws = 2.0 * std::numbers::pi / config.period;
        pass = ws > 2.0 * max_im;
        std::snprintf(buf, sizeof(buf),
                      "sampling freq %.4g rad/s vs 2*max|Im| = %.4g rad/s", ws,
                      2.0 * max_im);
        detail = buf;
      } catch (const std::exception& e) {
        detail = e.what();
      }
    }
    add("A6", pass, detail);
  }
  return report;
}

}  // namespace clsrivc
