#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace sigrec {

// min_x 1/2 ||A x - y||_2^2 + alpha ||L x||_1
struct LassoProblem {
  Eigen::MatrixXd A;
  Eigen::VectorXd y;
  Eigen::MatrixXd L;
  double alpha = 0.0;
};

// Squared is the form actually solved. Unsquared asks for the fidelity
// ||A x - y||_2 without the square; it is handled by reweighting the squared
// problem and is exercised only lightly.
enum class Fidelity { Squared, Unsquared };

struct SolverConfig {
  double rho = 0.0;  // ADMM penalty; anything <= 0 means pick a default
  int max_iters = 10000;
  double tol_abs = 1e-6;
  double tol_rel = 1e-6;
  bool adaptive_rho = true;
  Fidelity fidelity = Fidelity::Squared;
};

struct SolverReport {
  Eigen::VectorXd x;
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  std::vector<double> objective_trace;  // objective at each iterate
  bool converged = false;
};

inline double soft_threshold(double v, double kappa) {
  if (kappa < 0.0) throw std::invalid_argument("soft_threshold: threshold must be nonnegative");
  if (v > kappa) return v - kappa;
  if (v < -kappa) return v + kappa;
  return 0.0;
}

inline double lasso_objective(const LassoProblem& prob, const Eigen::VectorXd& x) {
  return 0.5 * (prob.A * x - prob.y).squaredNorm() + prob.alpha * (prob.L * x).lpNorm<1>();
}

struct EstimateConfig {
  enum class Method { PlainLeastSquares, TikhonovLeastSquares };
  Method method = Method::PlainLeastSquares;
  double lambda = 0.0;  // ridge weight, required positive for Tikhonov
};

// Pilot estimate x_est = argmin ||A x - y||^2 (+ lambda ||x||^2). The plain
// variant refuses numerically singular normal equations instead of returning
// garbage; the error tells the caller to switch to Tikhonov.
inline Eigen::VectorXd least_squares_estimate(const Eigen::MatrixXd& A,
                                              const Eigen::VectorXd& y,
                                              const EstimateConfig& cfg = {}) {
  if (A.rows() != y.size())
    throw std::invalid_argument("least_squares_estimate: dimension mismatch");
  Eigen::MatrixXd G = A.transpose() * A;
  const Eigen::VectorXd b = A.transpose() * y;
  if (cfg.method == EstimateConfig::Method::TikhonovLeastSquares) {
    if (!(cfg.lambda > 0.0))
      throw std::invalid_argument("least_squares_estimate: Tikhonov requires lambda > 0");
    G.diagonal().array() += cfg.lambda;
    return Eigen::LLT<Eigen::MatrixXd>(G).solve(b);
  }
  Eigen::LLT<Eigen::MatrixXd> llt(G);
  // cond(G) = cond(A)^2, so an rcond below 1e-16 marks A worse than 1e8
  if (llt.info() != Eigen::Success || llt.rcond() < 1e-16)
    throw std::runtime_error(
        "least_squares_estimate: normal equations are numerically singular; "
        "use TikhonovLeastSquares with a small lambda");
  return llt.solve(b);
}

// alpha = 2^(3/2) sigma^2 / beta with beta = sqrt(||L x_est||^2 / n), the
// root mean square of the pilot estimate in the transform domain.
inline double lasso_alpha(const Eigen::MatrixXd& L, const Eigen::VectorXd& x_est,
                          double sigma2, int n) {
  if (n <= 0) throw std::invalid_argument("lasso_alpha: n must be positive");
  if (sigma2 < 0.0) throw std::invalid_argument("lasso_alpha: variance must be nonnegative");
  const double beta = std::sqrt((L * x_est).squaredNorm() / static_cast<double>(n));
  if (!(beta > 0.0))
    throw std::runtime_error(
        "lasso_alpha: transform of the pilot estimate is identically zero; "
        "the automatic rule is undefined, supply alpha explicitly");
  return std::sqrt(8.0) * sigma2 / beta;
}

namespace detail {

inline Eigen::LLT<Eigen::MatrixXd> factor_or_jitter(Eigen::MatrixXd G) {
  Eigen::LLT<Eigen::MatrixXd> llt(G);
  if (llt.info() == Eigen::Success) return llt;
  // semidefinite corner (e.g. L with a nullspace and a rank-deficient A):
  // a trace-scaled ridge restores definiteness without moving the solution
  // beyond rounding
  const double jitter = 1e-12 * G.trace() / static_cast<double>(G.rows());
  G.diagonal().array() += jitter;
  llt.compute(G);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("solve_generalized_lasso: x-update system is not positive "
                             "semidefinite even after jitter");
  return llt;
}

// Exact-feasibility polish. The prox step leaves z with exact zeros, so fit
// the data on the subspace where those coordinates of L x vanish and let the
// objective decide whether the result beats the iterate. With a very large
// alpha this is what turns tolerance-level roughness in x back into the flat
// limit point; in ordinary regimes the shrunken iterate wins and nothing
// changes. The KKT system can be rank deficient when the selected rows of L
// are dependent, but it is always consistent, so a full-pivot LU still
// produces a valid candidate.
inline Eigen::VectorXd polish_on_zero_pattern(const LassoProblem& prob,
                                              const Eigen::VectorXd& z) {
  const int n = static_cast<int>(prob.y.size());
  std::vector<int> zero_rows;
  for (int i = 0; i < z.size(); ++i)
    if (z[i] == 0.0) zero_rows.push_back(static_cast<int>(i));
  const int k = static_cast<int>(zero_rows.size());
  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + k, n + k);
  kkt.topLeftCorner(n, n) = prob.A.transpose() * prob.A;
  for (int r = 0; r < k; ++r) {
    kkt.block(n + r, 0, 1, n) = prob.L.row(zero_rows[r]);
    kkt.block(0, n + r, n, 1) = prob.L.row(zero_rows[r]).transpose();
  }
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + k);
  rhs.head(n) = prob.A.transpose() * prob.y;
  return kkt.fullPivLu().solve(rhs).head(n);
}

// Scaled-form ADMM on the splitting z = L x:
//
//   x <- (A'A + rho L'L)^{-1} (A'y + rho L'(z - u))
//   z <- soft_threshold(L x + u, alpha / rho)
//   u <- u + L x - z
//
// Stopping follows the usual primal/dual residual recipe. When rho is
// rescaled the scaled dual u is rescaled inversely so the unscaled dual
// rho * u is continuous across the change.
inline SolverReport admm_squared(const LassoProblem& prob, const SolverConfig& cfg,
                                 const std::optional<Eigen::VectorXd>& warm_start) {
  const int n = static_cast<int>(prob.y.size());
  const int m = static_cast<int>(prob.L.rows());
  SolverReport rep;

  if (prob.alpha == 0.0) {
    // pure least squares, no splitting needed
    auto llt = factor_or_jitter(prob.A.transpose() * prob.A);
    rep.x = llt.solve(prob.A.transpose() * prob.y);
    rep.iterations = 0;
    rep.converged = true;
    rep.objective_trace.push_back(lasso_objective(prob, rep.x));
    return rep;
  }

  double rho = cfg.rho > 0.0 ? cfg.rho : prob.alpha;
  const Eigen::MatrixXd AtA = prob.A.transpose() * prob.A;
  const Eigen::VectorXd Aty = prob.A.transpose() * prob.y;
  const Eigen::MatrixXd LtL = prob.L.transpose() * prob.L;
  Eigen::LLT<Eigen::MatrixXd> llt = factor_or_jitter(AtA + rho * LtL);

  Eigen::VectorXd x = warm_start ? *warm_start : Eigen::VectorXd::Zero(n);
  Eigen::VectorXd z = prob.L * x;
  Eigen::VectorXd u = Eigen::VectorXd::Zero(m);
  const double sq_m = std::sqrt(static_cast<double>(m));

  for (int it = 1; it <= cfg.max_iters; ++it) {
    x = llt.solve(Aty + rho * (prob.L.transpose() * (z - u)));
    const Eigen::VectorXd Lx = prob.L * x;
    const Eigen::VectorXd z_old = z;
    const double kappa = prob.alpha / rho;
    for (int i = 0; i < m; ++i) z[i] = soft_threshold(Lx[i] + u[i], kappa);
    u += Lx - z;

    const double r_norm = (Lx - z).norm();
    const double s_norm = (rho * (prob.L.transpose() * (z - z_old))).norm();
    rep.iterations = it;
    rep.primal_residual = r_norm;
    rep.dual_residual = s_norm;
    rep.objective_trace.push_back(lasso_objective(prob, x));

    const double eps_pri =
        sq_m * cfg.tol_abs + cfg.tol_rel * std::max(Lx.norm(), z.norm());
    const double eps_dual =
        sq_m * cfg.tol_abs + cfg.tol_rel * (rho * (prob.L.transpose() * u)).norm();
    if (r_norm <= eps_pri && s_norm <= eps_dual) {
      rep.converged = true;
      break;
    }

    if (cfg.adaptive_rho && it % 10 == 0) {
      if (r_norm > 10.0 * s_norm) {
        rho *= 2.0;
        u /= 2.0;
        llt = factor_or_jitter(AtA + rho * LtL);
      } else if (s_norm > 10.0 * r_norm) {
        rho /= 2.0;
        u *= 2.0;
        llt = factor_or_jitter(AtA + rho * LtL);
      }
    }
  }

  // never hand back anything worse than the candidates we already hold
  rep.x = x;
  double best = lasso_objective(prob, x);
  auto consider = [&](const Eigen::VectorXd& cand) {
    const double obj = lasso_objective(prob, cand);
    if (obj < best) {
      best = obj;
      rep.x = cand;
    }
  };
  consider(polish_on_zero_pattern(prob, z));
  if (warm_start) consider(*warm_start);
  consider(Eigen::VectorXd::Zero(n));
  return rep;
}

// Unsquared fidelity via fixed-point reweighting: a minimizer of
// ||Ax - y|| + alpha ||Lx||_1 is a minimizer of the squared problem with
// alpha replaced by alpha ||Ax - y||, so iterate the squared solver and
// update the weight until the residual norm settles.
inline SolverReport solve_unsquared(const LassoProblem& prob, SolverConfig cfg,
                                    const std::optional<Eigen::VectorXd>& warm_start) {
  cfg.fidelity = Fidelity::Squared;
  LassoProblem inner = prob;
  std::optional<Eigen::VectorXd> start = warm_start;
  const Eigen::VectorXd x0 = warm_start ? *warm_start : Eigen::VectorXd::Zero(prob.y.size());
  double r_norm = std::max((prob.A * x0 - prob.y).norm(), 1e-12);
  SolverReport rep;
  for (int outer = 0; outer < 40; ++outer) {
    inner.alpha = prob.alpha * r_norm;
    rep = admm_squared(inner, cfg, start);
    const double r_new = std::max((prob.A * rep.x - prob.y).norm(), 1e-12);
    start = rep.x;
    const bool settled = std::abs(r_new - r_norm) <= 1e-10 * std::max(1.0, r_norm);
    r_norm = r_new;
    if (settled) break;
  }
  return rep;
}

}  // namespace detail

inline SolverReport solve_generalized_lasso(
    const LassoProblem& prob, const SolverConfig& cfg = {},
    const std::optional<Eigen::VectorXd>& warm_start = std::nullopt) {
  const auto n = prob.y.size();
  if (prob.A.rows() != n || prob.A.cols() != n)
    throw std::invalid_argument("solve_generalized_lasso: A must be n x n to match y");
  if (prob.L.cols() != n)
    throw std::invalid_argument("solve_generalized_lasso: L must have n columns");
  if (prob.alpha < 0.0)
    throw std::invalid_argument("solve_generalized_lasso: alpha must be nonnegative");
  if (warm_start && warm_start->size() != n)
    throw std::invalid_argument("solve_generalized_lasso: warm start has wrong length");
  if (cfg.fidelity == Fidelity::Unsquared)
    return detail::solve_unsquared(prob, cfg, warm_start);
  return detail::admm_squared(prob, cfg, warm_start);
}

}  // namespace sigrec
