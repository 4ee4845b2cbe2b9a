// Command line front end: recover piecewise smooth signals from noisy,
// blurred, or undersampled data, inspect the edge operators, and regenerate
// the canned experiment suites.

#include "sigrec/experiments.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace {

struct CommonOpts {
  std::string signal = "f1";
  int n = 128;
  int p = 0;
  std::string op = "residual";
  double zeta = 0.25;
  int trials = 20;
  std::uint64_t seed = 0;
  std::string out;  // empty writes to stdout
  std::string format = "csv";
  double alpha = 0.0;  // 0 keeps the task default (automatic where defined)
  double rho = 0.0;
  int max_iters = 10000;
  double tol_abs = 1e-6;
  double tol_rel = 1e-6;
  std::string fidelity = "squared";
  CLI::Option* alpha_opt = nullptr;
};

void add_common(CLI::App* sub, CommonOpts& o) {
  sub->add_option("--signal", o.signal, "test signal")
      ->check(CLI::IsMember({"f1", "f2"}))
      ->capture_default_str();
  sub->add_option("--n", o.n, "grid size, even")->capture_default_str();
  sub->add_option("--p", o.p, "order parameter; the detector order is 2p+1")
      ->capture_default_str();
  sub->add_option("--operator", o.op, "regularization transform")
      ->check(CLI::IsMember({"local", "global", "residual"}))
      ->capture_default_str();
  sub->add_option("--zeta", o.zeta, "in-cell offset of the global detector")
      ->capture_default_str();
  sub->add_option("--trials", o.trials, "number of noise realizations")
      ->capture_default_str();
  sub->add_option("--seed", o.seed, "base seed; trial t runs at seed + t")
      ->capture_default_str();
  sub->add_option("--out", o.out,
                  "output file (stdout when omitted); relative paths land under "
                  "SIGREC_OUT_DIR when that is set");
  sub->add_option("--format", o.format, "output format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  o.alpha_opt =
      sub->add_option("--alpha", o.alpha, "fixed regularization weight; omit for the default");
  sub->add_option("--rho", o.rho, "ADMM penalty; 0 picks a default")->capture_default_str();
  sub->add_option("--max-iters", o.max_iters, "ADMM iteration cap")->capture_default_str();
  sub->add_option("--tol-abs", o.tol_abs, "absolute stopping tolerance")->capture_default_str();
  sub->add_option("--tol-rel", o.tol_rel, "relative stopping tolerance")->capture_default_str();
  sub->add_option("--fidelity", o.fidelity, "data fidelity term")
      ->check(CLI::IsMember({"squared", "unsquared"}))
      ->capture_default_str();
}

sigrec::ExperimentConfig to_config(const CommonOpts& o, sigrec::Task task) {
  sigrec::ExperimentConfig cfg;
  cfg.signal = o.signal == "f1" ? sigrec::SignalId::f1 : sigrec::SignalId::f2;
  cfg.n = o.n;
  cfg.task = task;
  cfg.p = o.p;
  cfg.op = o.op == "local"    ? sigrec::OperatorChoice::Local
           : o.op == "global" ? sigrec::OperatorChoice::Global
                              : sigrec::OperatorChoice::Residual;
  cfg.zeta = o.zeta;
  cfg.trials = o.trials;
  cfg.base_seed = o.seed;
  cfg.solver.rho = o.rho;
  cfg.solver.max_iters = o.max_iters;
  cfg.solver.tol_abs = o.tol_abs;
  cfg.solver.tol_rel = o.tol_rel;
  cfg.solver.fidelity =
      o.fidelity == "unsquared" ? sigrec::Fidelity::Unsquared : sigrec::Fidelity::Squared;
  if (o.alpha_opt != nullptr && o.alpha_opt->count() > 0)
    cfg.alpha = sigrec::AlphaMode::fixed(o.alpha);
  return cfg;
}

std::string resolve_out(const std::string& out) {
  if (out.empty()) return out;
  std::filesystem::path p(out);
  const char* dir = std::getenv("SIGREC_OUT_DIR");
  if (dir != nullptr && *dir != '\0' && !p.is_absolute())
    p = std::filesystem::path(dir) / p;
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  return p.string();
}

void run_task(const sigrec::ExperimentConfig& cfg, const std::string& out,
              const std::string& format) {
  const std::vector<sigrec::TrialResult> results = sigrec::run_experiment(cfg);
  const sigrec::OutputFormat fmt =
      format == "json" ? sigrec::OutputFormat::Json : sigrec::OutputFormat::Csv;
  const std::string path = resolve_out(out);
  std::ostream* log = &std::cout;
  if (path.empty()) {
    sigrec::emit_results(results, std::cout, fmt);
    log = &std::cerr;  // keep the data stream clean
  } else {
    sigrec::emit_results(results, path, fmt);
    *log << "wrote " << path << '\n';
  }
  std::vector<double> alphas, iters, erels;
  for (const sigrec::TrialResult& tr : results) {
    alphas.push_back(tr.alpha_used);
    iters.push_back(static_cast<double>(tr.iterations));
    for (const auto& [name, value] : tr.e_rel_windows)
      if (name == "smooth-f1") erels.push_back(value);
  }
  *log << sigrec::task_name(cfg.task) << ' ' << sigrec::signal_name(cfg.signal) << ", "
       << sigrec::operator_name(cfg.op) << " p=" << cfg.p << ": " << results.size()
       << " trials, median alpha " << sigrec::format_double(sigrec::median(alphas))
       << ", median iterations " << static_cast<int>(sigrec::median(iters));
  if (!erels.empty())
    *log << ", median smooth-window relative error "
         << sigrec::format_double(sigrec::median(erels));
  *log << '\n';
}

nlohmann::json describe_operator(const sigrec::EdgeOperator& op, double tol) {
  const sigrec::RankReport rank = sigrec::rank_diagnostics(op, tol);
  nlohmann::json d;
  d["numerical_rank"] = rank.numerical_rank;
  const auto& sv = rank.singular_values;
  d["sigma_max"] = sv.size() > 0 ? sv[0] : 0.0;
  d["sigma_min"] = sv.size() > 0 ? sv[sv.size() - 1] : 0.0;
  d["condition_estimate"] = rank.condition_estimate;
  d["row_sum_max_abs"] = op.matrix.rowwise().sum().cwiseAbs().maxCoeff();
  std::vector<double> head, tail;
  for (int i = 0; i < std::min<Eigen::Index>(8, sv.size()); ++i) head.push_back(sv[i]);
  for (int i = std::max<Eigen::Index>(0, sv.size() - 4); i < sv.size(); ++i)
    tail.push_back(sv[i]);
  d["singular_values_head"] = head;
  d["singular_values_tail"] = tail;
  return d;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"recovery of piecewise smooth signals with local, global, and residual "
               "edge transforms"};
  app.require_subcommand(1);
  // goes before the subcommand: sigrec --config run.toml denoise. Keys live
  // in a TOML section named after the subcommand; command line flags win.
  app.set_config("--config", "", "TOML config file with one section per subcommand");

  CommonOpts dn, db, us;
  double dn_snr = 0.0, dn_sigma2 = 0.0;
  double db_gamma = 0.0;
  std::string db_units = "physical";
  double us_ratio = 0.3, us_snr = 20.0, us_sigma2 = 0.0;

  CLI::App* denoise = app.add_subcommand("denoise", "recover from noisy point values");
  add_common(denoise, dn);
  CLI::Option* dn_snr_opt = denoise->add_option("--snr", dn_snr, "noise level as SNR in dB");
  CLI::Option* dn_s2_opt = denoise->add_option("--sigma2", dn_sigma2, "noise variance");
  denoise->callback([&]() {
    sigrec::ExperimentConfig cfg = to_config(dn, sigrec::Task::Denoise);
    if (dn_snr_opt->count() > 0) cfg.snr_db = dn_snr;
    if (dn_s2_opt->count() > 0) cfg.sigma2 = dn_sigma2;
    run_task(cfg, dn.out, dn.format);
  });

  CLI::App* deblur = app.add_subcommand("deblur", "recover from blurred point values");
  add_common(deblur, db);
  deblur->add_option("--gamma", db_gamma, "Gaussian blur width")->required();
  deblur->add_option("--units", db_units, "blur width units")
      ->check(CLI::IsMember({"physical", "index"}))
      ->capture_default_str();
  deblur->callback([&]() {
    sigrec::ExperimentConfig cfg = to_config(db, sigrec::Task::Deblur);
    cfg.gamma = db_gamma;
    cfg.blur_units =
        db_units == "index" ? sigrec::BlurUnits::Index : sigrec::BlurUnits::Physical;
    if (cfg.trials == 20) cfg.trials = 1;  // noise free: one trial unless asked otherwise
    if (cfg.alpha.auto_rule)
      cfg.alpha = sigrec::AlphaMode::fixed(cfg.op == sigrec::OperatorChoice::Local ? 0.1 : 0.3);
    run_task(cfg, db.out, db.format);
  });

  CLI::App* under = app.add_subcommand("undersample", "recover from a random subsample");
  add_common(under, us);
  under->add_option("--ratio", us_ratio, "fraction of samples dropped")->capture_default_str();
  CLI::Option* us_snr_opt = under->add_option("--snr", us_snr, "noise level as SNR in dB");
  CLI::Option* us_s2_opt = under->add_option("--sigma2", us_sigma2, "noise variance");
  under->callback([&]() {
    sigrec::ExperimentConfig cfg = to_config(us, sigrec::Task::Undersample);
    cfg.ratio = us_ratio;
    if (us_s2_opt->count() > 0)
      cfg.sigma2 = us_sigma2;
    else
      cfg.snr_db = us_snr;
    (void)us_snr_opt;
    run_task(cfg, us.out, us.format);
  });

  int diag_n = 128, diag_p = 0;
  double diag_zeta = 0.25, diag_tol = 1e-8;
  std::string diag_out;
  CLI::App* diag = app.add_subcommand("diagnose-operator",
                                      "singular value and rank report for T, S, and R");
  diag->add_option("--n", diag_n, "grid size, even")->capture_default_str();
  diag->add_option("--p", diag_p, "order parameter")->capture_default_str();
  diag->add_option("--zeta", diag_zeta, "in-cell offset")->capture_default_str();
  diag->add_option("--tol", diag_tol, "relative rank tolerance")->capture_default_str();
  diag->add_option("--out", diag_out, "output file (stdout when omitted)");
  diag->callback([&]() {
    const sigrec::EdgeOperator T = sigrec::local_diff_matrix(diag_n, diag_p);
    const sigrec::EdgeOperator S = sigrec::global_edge_matrix(diag_n, diag_p, diag_zeta);
    const sigrec::EdgeOperator R = sigrec::residual_operator(diag_n, diag_p, diag_zeta);
    const sigrec::EdgeOperator S_half = sigrec::global_edge_matrix(diag_n, diag_p, 0.5);
    nlohmann::json report;
    report["n"] = diag_n;
    report["p"] = diag_p;
    report["zeta"] = diag_zeta;
    report["rank_tolerance"] = diag_tol;
    report["local"] = describe_operator(T, diag_tol);
    report["global"] = describe_operator(S, diag_tol);
    report["residual"] = describe_operator(R, diag_tol);
    // largest basis-vector action gap between T and S, at the requested zeta
    // and at the matching point zeta = 1/2 where the two detectors coincide
    report["action_gap"] = (T.matrix - S.matrix).cwiseAbs().maxCoeff();
    report["action_gap_at_half"] = (T.matrix - S_half.matrix).cwiseAbs().maxCoeff();
    const std::string path = resolve_out(diag_out);
    if (path.empty()) {
      std::cout << report.dump(2) << '\n';
    } else {
      std::ofstream os(path, std::ios::binary);
      if (!os) throw std::runtime_error("diagnose-operator: cannot open " + path);
      os << report.dump(2) << '\n';
      std::cout << "wrote " << path << '\n';
    }
  });

  int fig = 0;
  std::uint64_t fig_seed = 0;
  std::string fig_out;
  CLI::App* rep = app.add_subcommand("reproduce", "regenerate a canned experiment suite");
  rep->add_option("--figure", fig, "suite number, 2 through 8")->required();
  rep->add_option("--seed", fig_seed, "base seed shared by every run in the suite")
      ->capture_default_str();
  rep->add_option("--out", fig_out, "output file (default figure<N>.csv)");
  rep->callback([&]() {
    std::string path = fig_out.empty() ? "figure" + std::to_string(fig) + ".csv" : fig_out;
    path = resolve_out(path);
    sigrec::reproduce_figure(fig, fig_seed, path);
    std::cout << "wrote " << path << '\n';
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
