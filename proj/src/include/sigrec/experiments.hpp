#pragma once

#include "sigrec/forward.hpp"
#include "sigrec/grid.hpp"
#include "sigrec/metrics.hpp"
#include "sigrec/operators.hpp"
#include "sigrec/rng.hpp"
#include "sigrec/signals.hpp"
#include "sigrec/solver.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sigrec {

enum class Task { Denoise, Deblur, Undersample };
enum class OperatorChoice { Local, Global, Residual };

inline const char* task_name(Task t) {
  switch (t) {
    case Task::Denoise: return "denoise";
    case Task::Deblur: return "deblur";
    case Task::Undersample: return "undersample";
  }
  return "?";
}

inline const char* operator_name(OperatorChoice op) {
  switch (op) {
    case OperatorChoice::Local: return "local";
    case OperatorChoice::Global: return "global";
    case OperatorChoice::Residual: return "residual";
  }
  return "?";
}

inline const char* signal_name(SignalId id) { return id == SignalId::f1 ? "f1" : "f2"; }

struct AlphaMode {
  bool auto_rule = true;
  double value = 0.0;
  static AlphaMode automatic() { return AlphaMode{true, 0.0}; }
  // zero is a valid fixed value: it asks for the plain least squares limit
  static AlphaMode fixed(double v) {
    if (!(v >= 0.0)) throw std::invalid_argument("AlphaMode: fixed alpha must be nonnegative");
    return AlphaMode{false, v};
  }
};

struct ExperimentConfig {
  SignalId signal = SignalId::f1;
  int n = 128;
  Task task = Task::Denoise;
  int p = 0;
  OperatorChoice op = OperatorChoice::Residual;
  double zeta = 0.25;
  std::optional<double> snr_db;   // noise level, one of the two
  std::optional<double> sigma2;
  double gamma = 0.0;             // deblurring only
  BlurUnits blur_units = BlurUnits::Physical;
  double ratio = 0.0;             // undersampling only
  AlphaMode alpha = AlphaMode::automatic();
  int trials = 20;
  std::uint64_t base_seed = 0;
  SolverConfig solver;
};

inline void validate_config(const ExperimentConfig& cfg) {
  if (cfg.n < 4 || cfg.n % 2 != 0)
    throw std::invalid_argument("ExperimentConfig: n must be even and at least 4");
  if (cfg.p < 0) throw std::invalid_argument("ExperimentConfig: p must be nonnegative");
  if (!(cfg.zeta >= 0.0 && cfg.zeta < 1.0))
    throw std::invalid_argument("ExperimentConfig: zeta must lie in [0, 1)");
  if (cfg.trials < 1) throw std::invalid_argument("ExperimentConfig: trials must be positive");
  if (cfg.snr_db && cfg.sigma2)
    throw std::invalid_argument("ExperimentConfig: give snr_db or sigma2, not both");
  const bool has_noise = cfg.snr_db.has_value() || cfg.sigma2.has_value();
  switch (cfg.task) {
    case Task::Denoise:
      if (!has_noise)
        throw std::invalid_argument("ExperimentConfig: denoising needs a noise level");
      if (cfg.gamma != 0.0 || cfg.ratio != 0.0)
        throw std::invalid_argument("ExperimentConfig: blur width and ratio do not apply to denoising");
      break;
    case Task::Deblur:
      if (!(cfg.gamma > 0.0))
        throw std::invalid_argument("ExperimentConfig: deblurring needs gamma > 0");
      if (cfg.ratio != 0.0)
        throw std::invalid_argument("ExperimentConfig: ratio does not apply to deblurring");
      if (has_noise)
        throw std::invalid_argument("ExperimentConfig: deblurring is run noise free; drop the noise level");
      if (cfg.alpha.auto_rule)
        throw std::invalid_argument(
            "ExperimentConfig: the automatic alpha rule needs a noise variance; "
            "deblurring requires a fixed alpha");
      break;
    case Task::Undersample:
      if (!(cfg.ratio > 0.0 && cfg.ratio < 1.0))
        throw std::invalid_argument("ExperimentConfig: undersampling needs ratio in (0, 1)");
      if (!has_noise)
        throw std::invalid_argument("ExperimentConfig: undersampling needs a noise level");
      if (cfg.gamma != 0.0)
        throw std::invalid_argument("ExperimentConfig: blur width does not apply to undersampling");
      break;
  }
}

inline Eigen::MatrixXd build_operator(const ExperimentConfig& cfg) {
  switch (cfg.op) {
    case OperatorChoice::Local: return local_diff_matrix(cfg.n, cfg.p).matrix;
    case OperatorChoice::Global: return global_edge_matrix(cfg.n, cfg.p, cfg.zeta).matrix;
    case OperatorChoice::Residual: return residual_operator(cfg.n, cfg.p, cfg.zeta).matrix;
  }
  throw std::logic_error("build_operator: unreachable");
}

struct TrialResult {
  std::uint64_t seed = 0;
  Eigen::VectorXd x;
  Eigen::VectorXd e_abs;
  std::vector<std::pair<std::string, double>> e_rel_windows;
  double alpha_used = 0.0;
  int iterations = 0;
  bool converged = false;
  double objective = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
};

// Seed plumbing. Every trial gets its own seed base_seed + trial, recorded in
// the result; the noise stream uses one SplitMix64 step of it and the mask
// stream two, so the two streams never share raw material even though both
// derive from the same trial seed.
inline std::uint64_t trial_seed(std::uint64_t base_seed, int trial) {
  return base_seed + static_cast<std::uint64_t>(trial);
}
inline std::uint64_t noise_seed(std::uint64_t t_seed) { return mix_seed(t_seed); }
inline std::uint64_t mask_seed(std::uint64_t t_seed) { return mix_seed(mix_seed(t_seed)); }

// One trial end to end: build the measurement, pick alpha, solve, score.
// Everything is a pure function of (cfg, trial), which is what makes every
// result row reproducible from its recorded seed.
inline TrialResult run_trial(const ExperimentConfig& cfg, int trial) {
  const UniformGrid grid = build_grid(cfg.n);
  const Eigen::VectorXd f = make_signal(cfg.signal).sample(grid).values;
  const std::uint64_t t_seed = trial_seed(cfg.base_seed, trial);
  const Eigen::MatrixXd L = build_operator(cfg);
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(cfg.n, cfg.n);

  Eigen::MatrixXd A_recover;  // the model the solver is told about
  Eigen::VectorXd y;
  double s2 = 0.0;
  switch (cfg.task) {
    case Task::Denoise: {
      s2 = cfg.sigma2 ? *cfg.sigma2 : sigma2_from_snr(f, *cfg.snr_db);
      y = add_noise(f, s2, noise_seed(t_seed));
      A_recover = identity;
      break;
    }
    case Task::Deblur: {
      const ForwardModel blur = gaussian_blur_model(grid, cfg.gamma, cfg.blur_units);
      y = blur.matrix * f;
      A_recover = blur.matrix;
      break;
    }
    case Task::Undersample: {
      const ForwardModel mask = undersample_model(cfg.n, cfg.ratio, mask_seed(t_seed));
      s2 = cfg.sigma2 ? *cfg.sigma2 : sigma2_from_snr(f, *cfg.snr_db);
      y = add_noise(mask.matrix * f, s2, noise_seed(t_seed));
      // recovery has no access to the mask; the dropped samples are just data
      A_recover = identity;
      break;
    }
  }

  // the pilot estimate doubles as the warm start; with A = I it is y itself
  const Eigen::VectorXd x_est =
      cfg.task == Task::Deblur ? y : least_squares_estimate(identity, y);
  double alpha = cfg.alpha.value;
  if (cfg.alpha.auto_rule) alpha = lasso_alpha(L, x_est, s2, cfg.n);

  const LassoProblem prob{A_recover, y, L, alpha};
  const SolverReport rep = solve_generalized_lasso(prob, cfg.solver, x_est);

  TrialResult tr;
  tr.seed = t_seed;
  tr.x = rep.x;
  tr.e_abs = abs_error(rep.x, f);
  tr.alpha_used = alpha;
  tr.iterations = rep.iterations;
  tr.converged = rep.converged;
  tr.objective = lasso_objective(prob, rep.x);
  tr.primal_residual = rep.primal_residual;
  tr.dual_residual = rep.dual_residual;
  const ErrorWindow w = smooth_f1_window();
  if (cfg.n >= w.j_max)
    tr.e_rel_windows.emplace_back("smooth-f1", rel_error_nonzero(rep.x, f, w));
  return tr;
}

// Trials run serially in seed order, so the result vector is already sorted
// by seed and identical no matter how the caller schedules work around it.
inline std::vector<TrialResult> run_experiment(const ExperimentConfig& cfg) {
  validate_config(cfg);
  std::vector<TrialResult> out;
  out.reserve(static_cast<std::size_t>(cfg.trials));
  for (int t = 0; t < cfg.trials; ++t) out.push_back(run_trial(cfg, t));
  return out;
}

inline std::vector<TrialResult> run_denoising(const ExperimentConfig& cfg) {
  if (cfg.task != Task::Denoise)
    throw std::invalid_argument("run_denoising: config task is not denoise");
  return run_experiment(cfg);
}

inline std::vector<TrialResult> run_deblurring(const ExperimentConfig& cfg) {
  if (cfg.task != Task::Deblur)
    throw std::invalid_argument("run_deblurring: config task is not deblur");
  return run_experiment(cfg);
}

inline std::vector<TrialResult> run_undersampling(const ExperimentConfig& cfg) {
  if (cfg.task != Task::Undersample)
    throw std::invalid_argument("run_undersampling: config task is not undersample");
  return run_experiment(cfg);
}

inline double median(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median: empty sample");
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 == 1 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

// Doubles are written with std::to_chars: shortest form that parses back to
// the same bits. This is what makes repeated runs byte identical.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

enum class OutputFormat { Csv, Json };

// Two CSV sections separated by a blank line: per-index vector rows, then one
// summary row per trial. An empty result list still writes both headers.
inline void emit_csv(const std::vector<TrialResult>& results, std::ostream& os) {
  os << "trial,seed,index,x,e_abs\n";
  for (std::size_t t = 0; t < results.size(); ++t) {
    const TrialResult& tr = results[t];
    for (int j = 0; j < tr.x.size(); ++j)
      os << t << ',' << tr.seed << ',' << (j + 1) << ',' << format_double(tr.x[j]) << ','
         << format_double(tr.e_abs[j]) << '\n';
  }
  os << '\n';
  os << "trial,seed,alpha,iterations,converged,objective,primal_residual,dual_residual";
  if (!results.empty())
    for (const auto& [name, value] : results.front().e_rel_windows) os << ",e_rel:" << name;
  os << '\n';
  for (std::size_t t = 0; t < results.size(); ++t) {
    const TrialResult& tr = results[t];
    os << t << ',' << tr.seed << ',' << format_double(tr.alpha_used) << ',' << tr.iterations
       << ',' << (tr.converged ? 1 : 0) << ',' << format_double(tr.objective) << ','
       << format_double(tr.primal_residual) << ',' << format_double(tr.dual_residual);
    for (const auto& [name, value] : tr.e_rel_windows) os << ',' << format_double(value);
    os << '\n';
  }
}

inline nlohmann::json trial_to_json(const TrialResult& tr) {
  nlohmann::json j;
  j["seed"] = tr.seed;
  j["alpha"] = tr.alpha_used;
  j["iterations"] = tr.iterations;
  j["converged"] = tr.converged;
  j["objective"] = tr.objective;
  j["primal_residual"] = tr.primal_residual;
  j["dual_residual"] = tr.dual_residual;
  j["x"] = std::vector<double>(tr.x.begin(), tr.x.end());
  j["e_abs"] = std::vector<double>(tr.e_abs.begin(), tr.e_abs.end());
  nlohmann::json windows = nlohmann::json::object();
  for (const auto& [name, value] : tr.e_rel_windows) windows[name] = value;
  j["e_rel"] = windows;
  return j;
}

inline void emit_json(const std::vector<TrialResult>& results, std::ostream& os) {
  nlohmann::json arr = nlohmann::json::array();
  for (const TrialResult& tr : results) arr.push_back(trial_to_json(tr));
  os << arr.dump(2) << '\n';
}

inline void emit_results(const std::vector<TrialResult>& results, std::ostream& os,
                         OutputFormat format) {
  if (format == OutputFormat::Csv)
    emit_csv(results, os);
  else
    emit_json(results, os);
}

inline void emit_results(const std::vector<TrialResult>& results, const std::string& path,
                         OutputFormat format) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("emit_results: cannot open " + path + " for writing");
  emit_results(results, os, format);
  os.flush();
  if (!os) throw std::runtime_error("emit_results: write to " + path + " failed");
}

// Inverse of emit_json; numeric fields survive the round trip bit for bit.
inline std::vector<TrialResult> read_results_json(std::istream& is) {
  nlohmann::json arr;
  is >> arr;
  if (!arr.is_array()) throw std::runtime_error("read_results_json: expected a JSON array");
  std::vector<TrialResult> out;
  for (const nlohmann::json& j : arr) {
    TrialResult tr;
    tr.seed = j.at("seed").get<std::uint64_t>();
    tr.alpha_used = j.at("alpha").get<double>();
    tr.iterations = j.at("iterations").get<int>();
    tr.converged = j.at("converged").get<bool>();
    tr.objective = j.at("objective").get<double>();
    tr.primal_residual = j.at("primal_residual").get<double>();
    tr.dual_residual = j.at("dual_residual").get<double>();
    const auto x = j.at("x").get<std::vector<double>>();
    const auto e = j.at("e_abs").get<std::vector<double>>();
    tr.x = Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
    tr.e_abs = Eigen::Map<const Eigen::VectorXd>(e.data(), static_cast<Eigen::Index>(e.size()));
    for (const auto& [name, value] : j.at("e_rel").items())
      tr.e_rel_windows.emplace_back(name, value.get<double>());
    out.push_back(std::move(tr));
  }
  return out;
}

struct FigureRun {
  std::string label;
  ExperimentConfig cfg;
};

// Canned experiment suites behind the reproduce command, one list per figure
// of the study this toolkit replicates. Recovery figures (2, 4, 6, 7, 8)
// dump full per-index recoveries; sweep figures (3, 5) dump one error row
// per trial plus a median row per configuration.
inline std::vector<FigureRun> figure_runs(int figure, std::uint64_t base_seed) {
  if (figure < 2 || figure > 8)
    throw std::invalid_argument("figure_runs: figure must lie in 2..8");
  std::vector<FigureRun> runs;
  const OperatorChoice ops[2] = {OperatorChoice::Local, OperatorChoice::Residual};
  auto base = [&](SignalId sig, Task task, int p, OperatorChoice op) {
    ExperimentConfig cfg;
    cfg.signal = sig;
    cfg.task = task;
    cfg.p = p;
    cfg.op = op;
    cfg.base_seed = base_seed;
    return cfg;
  };
  auto deblur_alpha = [](OperatorChoice op) {
    return AlphaMode::fixed(op == OperatorChoice::Local ? 0.1 : 0.3);
  };

  switch (figure) {
    case 2: {
      // f1 denoising at three noise levels, plus the higher-order operator
      const std::pair<double, int> settings[] = {{20, 0}, {10, 0}, {5, 0}, {20, 1}};
      for (const auto& [snr, p] : settings)
        for (const OperatorChoice op : ops) {
          ExperimentConfig cfg = base(SignalId::f1, Task::Denoise, p, op);
          cfg.snr_db = snr;
          runs.push_back({"f1_denoise_snr" + format_double(snr) + "_p" + std::to_string(p) +
                              "_" + operator_name(op),
                          cfg});
        }
      break;
    }
    case 3: {
      // error against SNR for the four operator configurations
      for (const double snr : {4.0, 8.0, 16.0, 32.0})
        for (const int p : {0, 1})
          for (const OperatorChoice op : ops) {
            ExperimentConfig cfg = base(SignalId::f1, Task::Denoise, p, op);
            cfg.snr_db = snr;
            runs.push_back({"snr" + format_double(snr) + "_p" + std::to_string(p) + "_" +
                                operator_name(op),
                            cfg});
          }
      break;
    }
    case 4: {
      // f1 deblurring; noise free, so a single trial per configuration
      const std::pair<double, int> settings[] = {{0.01, 0}, {0.05, 0}, {0.01, 1}};
      for (const auto& [gamma, p] : settings)
        for (const OperatorChoice op : ops) {
          ExperimentConfig cfg = base(SignalId::f1, Task::Deblur, p, op);
          cfg.gamma = gamma;
          cfg.alpha = deblur_alpha(op);
          cfg.trials = 1;
          runs.push_back({"f1_deblur_gamma" + format_double(gamma) + "_p" +
                              std::to_string(p) + "_" + operator_name(op),
                          cfg});
        }
      break;
    }
    case 5: {
      // error against blur width, eight equispaced widths
      for (int i = 0; i < 8; ++i) {
        const double gamma = static_cast<double>(i + 1) / 100.0;
        for (const int p : {0, 1})
          for (const OperatorChoice op : ops) {
            ExperimentConfig cfg = base(SignalId::f1, Task::Deblur, p, op);
            cfg.gamma = gamma;
            cfg.alpha = deblur_alpha(op);
            cfg.trials = 1;
            runs.push_back({"gamma" + format_double(gamma) + "_p" + std::to_string(p) + "_" +
                                operator_name(op),
                            cfg});
          }
      }
      break;
    }
    case 6: {
      // f1 undersampling at 20 dB
      const std::pair<double, int> settings[] = {{0.1, 0}, {0.3, 0}, {0.5, 0}, {0.3, 1}};
      for (const auto& [r, p] : settings)
        for (const OperatorChoice op : ops) {
          ExperimentConfig cfg = base(SignalId::f1, Task::Undersample, p, op);
          cfg.ratio = r;
          cfg.snr_db = 20.0;
          runs.push_back({"f1_undersample_r" + format_double(r) + "_p" + std::to_string(p) +
                              "_" + operator_name(op),
                          cfg});
        }
      break;
    }
    case 7:
    case 8: {
      // the piecewise constant signal across all three tasks at one order
      const int p = figure == 7 ? 0 : 1;
      const double snr = figure == 7 ? 5.0 : 20.0;
      const double gamma = figure == 7 ? 0.05 : 0.01;
      for (const OperatorChoice op : ops) {
        ExperimentConfig cfg = base(SignalId::f2, Task::Denoise, p, op);
        cfg.snr_db = snr;
        runs.push_back({"f2_denoise_snr" + format_double(snr) + "_p" + std::to_string(p) +
                            "_" + operator_name(op),
                        cfg});
      }
      for (const OperatorChoice op : ops) {
        ExperimentConfig cfg = base(SignalId::f2, Task::Deblur, p, op);
        cfg.gamma = gamma;
        cfg.alpha = deblur_alpha(op);
        cfg.trials = 1;
        runs.push_back({"f2_deblur_gamma" + format_double(gamma) + "_p" + std::to_string(p) +
                            "_" + operator_name(op),
                        cfg});
      }
      for (const OperatorChoice op : ops) {
        ExperimentConfig cfg = base(SignalId::f2, Task::Undersample, p, op);
        cfg.ratio = 0.3;
        cfg.snr_db = 20.0;
        runs.push_back({"f2_undersample_r0.3_p" + std::to_string(p) + "_" + operator_name(op),
                        cfg});
      }
      break;
    }
    default:
      break;
  }
  return runs;
}

inline double smooth_window_error(const TrialResult& tr) {
  for (const auto& [name, value] : tr.e_rel_windows)
    if (name == "smooth-f1") return value;
  throw std::runtime_error("smooth_window_error: trial carries no smooth-f1 window");
}

inline void reproduce_figure(int figure, std::uint64_t base_seed, std::ostream& os) {
  const std::vector<FigureRun> runs = figure_runs(figure, base_seed);
  const bool sweep = figure == 3 || figure == 5;
  if (sweep) {
    os << "figure,label,signal,task,p,operator,param,param_value,stat,trial,seed,alpha,"
          "point_index,e_abs_point,e_rel_smooth\n";
    for (const FigureRun& fr : runs) {
      const std::vector<TrialResult> results = run_experiment(fr.cfg);
      const int probe =
          figure == 3 ? near_jump_index_minus(fr.cfg.n) : near_jump_index_plus(fr.cfg.n);
      const char* param = figure == 3 ? "snr_db" : "gamma";
      const double param_value = figure == 3 ? *fr.cfg.snr_db : fr.cfg.gamma;
      const std::string prefix = std::to_string(figure) + ',' + fr.label + ',' +
                                 signal_name(fr.cfg.signal) + ',' + task_name(fr.cfg.task) +
                                 ',' + std::to_string(fr.cfg.p) + ',' +
                                 operator_name(fr.cfg.op) + ',' + param + ',' +
                                 format_double(param_value) + ',';
      std::vector<double> alphas, e_abs_pts, e_rels;
      for (std::size_t t = 0; t < results.size(); ++t) {
        const TrialResult& tr = results[t];
        const double e_abs_pt = tr.e_abs[probe - 1];
        const double e_rel = smooth_window_error(tr);
        alphas.push_back(tr.alpha_used);
        e_abs_pts.push_back(e_abs_pt);
        e_rels.push_back(e_rel);
        os << prefix << "trial," << t << ',' << tr.seed << ',' << format_double(tr.alpha_used)
           << ',' << probe << ',' << format_double(e_abs_pt) << ',' << format_double(e_rel)
           << '\n';
      }
      os << prefix << "median,-1,0," << format_double(median(alphas)) << ',' << probe << ','
         << format_double(median(e_abs_pts)) << ',' << format_double(median(e_rels)) << '\n';
    }
    return;
  }
  os << "figure,label,signal,task,p,operator,trial,seed,alpha,index,s,f,x,e_abs\n";
  for (const FigureRun& fr : runs) {
    const std::vector<TrialResult> results = run_experiment(fr.cfg);
    const UniformGrid grid = build_grid(fr.cfg.n);
    const Eigen::VectorXd f = make_signal(fr.cfg.signal).sample(grid).values;
    const std::string prefix = std::to_string(figure) + ',' + fr.label + ',' +
                               signal_name(fr.cfg.signal) + ',' + task_name(fr.cfg.task) +
                               ',' + std::to_string(fr.cfg.p) + ',' +
                               operator_name(fr.cfg.op) + ',';
    for (std::size_t t = 0; t < results.size(); ++t) {
      const TrialResult& tr = results[t];
      for (int j = 0; j < tr.x.size(); ++j)
        os << prefix << t << ',' << tr.seed << ',' << format_double(tr.alpha_used) << ','
           << (j + 1) << ',' << format_double(grid.points[j]) << ',' << format_double(f[j])
           << ',' << format_double(tr.x[j]) << ',' << format_double(tr.e_abs[j]) << '\n';
    }
  }
}

inline void reproduce_figure(int figure, std::uint64_t base_seed, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("reproduce_figure: cannot open " + path + " for writing");
  reproduce_figure(figure, base_seed, os);
  os.flush();
  if (!os) throw std::runtime_error("reproduce_figure: write to " + path + " failed");
}

}  // namespace sigrec
