#pragma once

#include "sigrec/grid.hpp"
#include "sigrec/signals.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <utility>

namespace sigrec {

enum class OperatorKind { Local, Global, Residual };

struct EdgeOperator {
  Eigen::MatrixXd matrix;
  OperatorKind kind = OperatorKind::Local;
  int order_p = 0;    // operator order is 2p + 1
  double zeta = 0.0;  // in-cell evaluation offset; meaningful for Global and Residual
};

inline long long binom(int n, int k) {
  if (k < 0 || k > n) return 0;
  if (k > n - k) k = n - k;
  long long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// q_{l,p} = C(2p, p + |l|); q_{0,p} is the shared normalization of both edge
// detectors. Out-of-range offsets are a caller bug, not a zero.
inline long long binom_q(int l, int p) {
  if (p < 0) throw std::invalid_argument("binom_q: p must be nonnegative");
  if (std::abs(l) > p)
    throw std::invalid_argument("binom_q: need |l| <= p, got l = " + std::to_string(l) +
                                ", p = " + std::to_string(p));
  return binom(2 * p, p + std::abs(l));
}

// Local differencing detector of order 2p + 1, wrapped periodically:
//
//   (T f)_j = (1/q_{0,p}) sum_{l=0}^{p} (-1)^l C(2p+1, p-l) (f_{j+1+l} - f_{j-l})
//
// p = 0 is the plain forward difference (the TV transform). Each row touches
// the 2p + 2 samples nearest the cell boundary between j and j + 1, and the
// alternating binomial weights annihilate polynomials of degree up to 2p on
// stencils that do not cross the wrap. A jump of size J inside cell j shows
// up as (T f)_{j'} = J on the row whose stencil straddles it, up to the
// smooth variation of f across the stencil.
inline EdgeOperator local_diff_matrix(int n, int p) {
  if (p < 0) throw std::invalid_argument("local_diff_matrix: p must be nonnegative");
  if (n % 2 != 0 || n < 2 * (2 * p + 2))
    throw std::invalid_argument("local_diff_matrix: need even n >= 2(2p+2), got n = " +
                                std::to_string(n) + ", p = " + std::to_string(p));
  const double q = static_cast<double>(binom_q(0, p));
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    for (int l = 0; l <= p; ++l) {
      const double c =
          (l % 2 == 0 ? 1.0 : -1.0) * static_cast<double>(binom(2 * p + 1, p - l)) / q;
      M(j, (j + 1 + l) % n) += c;
      M(j, ((j - l) % n + n) % n) -= c;
    }
  }
  return {std::move(M), OperatorKind::Local, p, 0.0};
}

// Stencil form of the same operator; must agree with the assembled matrix to
// rounding. Kept separate so tests can cross-check the two code paths.
inline Eigen::VectorXd apply_local_diff(const Eigen::VectorXd& f, int p) {
  const int n = static_cast<int>(f.size());
  if (p < 0) throw std::invalid_argument("apply_local_diff: p must be nonnegative");
  if (n % 2 != 0 || n < 2 * (2 * p + 2))
    throw std::invalid_argument("apply_local_diff: need even n >= 2(2p+2)");
  const double q = static_cast<double>(binom_q(0, p));
  Eigen::VectorXd out(n);
  for (int j = 0; j < n; ++j) {
    double acc = 0.0;
    for (int l = 0; l <= p; ++l) {
      const double c =
          (l % 2 == 0 ? 1.0 : -1.0) * static_cast<double>(binom(2 * p + 1, p - l)) / q;
      acc += c * (f[(j + 1 + l) % n] - f[((j - l) % n + n) % n]);
    }
    out[j] = acc;
  }
  return out;
}

inline Eigen::VectorXd apply_local_diff(const SignalVector& f, int p) {
  return apply_local_diff(f.values, p);
}

// Concentration factor of order 2p + 1:
//
//   mu_{2p+1}(eta) = 2^{2p} eta sin^{2p}(pi eta / 2) / q_{0,p}
//
// mu_1(eta) = eta recovers the classical first-order factor.
struct ConcentrationFactor {
  int order_p = 0;
  double operator()(double eta) const {
    const double q = static_cast<double>(binom_q(0, order_p));
    if (order_p == 0) return eta;
    return std::pow(2.0, 2 * order_p) * eta *
           std::pow(std::sin(kPi * eta / 2.0), 2 * order_p) / q;
  }
};

inline ConcentrationFactor concentration_factor(int p) {
  if (p < 0) throw std::invalid_argument("concentration_factor: p must be nonnegative");
  return ConcentrationFactor{p};
}

struct AdmissibilityReport {
  double oddness_defect = 0.0;          // max |K(s) + K(-s)| over a dense sample
  double normalization_integral = 0.0;  // integral of mu(eta)/eta over [eps, 1]
  double smoothness_probe = 0.0;        // max |second difference| of mu/eta, interior
};

// Three cheap witnesses of the admissibility conditions on mu. The kernel
//
//   K_n(s) = sum_{k=1}^{n/2} mu(2k/n) sin(ks)
//
// is odd by construction, so the defect only measures roundoff. The integral
// of mu(eta)/eta over [eps, 1] tends to 1 as eps -> 0 when mu is normalized
// correctly. The probe samples second differences of mu/eta on a uniform
// interior grid; a bounded value is what the smoothness condition needs.
inline AdmissibilityReport admissibility_report(const ConcentrationFactor& mu, int n,
                                                double epsilon) {
  if (n < 4 || n % 2 != 0)
    throw std::invalid_argument("admissibility_report: n must be even and at least 4");
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw std::invalid_argument("admissibility_report: epsilon must lie in (0, 1)");
  AdmissibilityReport rep;

  const int samples = 801;
  for (int i = 0; i < samples; ++i) {
    const double s = -kPi + 2.0 * kPi * i / (samples - 1);
    double plus = 0.0, minus = 0.0;
    for (int k = 1; k <= n / 2; ++k) {
      const double m = mu(2.0 * k / n);
      plus += m * std::sin(k * s);
      minus += m * std::sin(-k * s);
    }
    rep.oddness_defect = std::max(rep.oddness_defect, std::abs(plus + minus));
  }

  rep.normalization_integral = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      [&](double eta) { return mu(eta) / eta; }, epsilon, 1.0, 10, 1e-12);

  const int m = 400;
  const double h = 1.0 / (m + 1);
  auto g = [&](double eta) { return mu(eta) / eta; };
  for (int i = 2; i <= m - 1; ++i) {
    const double eta = i * h;
    const double d2 = (g(eta - h) - 2.0 * g(eta) + g(eta + h)) / (h * h);
    rep.smoothness_probe = std::max(rep.smoothness_probe, std::abs(d2));
  }
  return rep;
}

// Global detector: the concentration sum of the Fourier interpolant,
// evaluated a fraction zeta into each cell and written against point values.
// Entry (j, l), 0-based, with ds = 2 pi / n and offset m = j - l:
//
//   S(j, l) = (2^{2p+1} / (n q_{0,p})) sum_{k=1}^{n/2} w_k sin^{2p}(k ds / 2)
//             [cos(k ds (m + 1/2 + zeta)) - cos(k ds (m - 1/2 + zeta))]
//
// with w_k = 1 for k < n/2 and w_{n/2} = 1/2. The half weight is not optional
// decoration: in the n-term collocation sum over k = -n/2 .. n/2 - 1 every
// frequency |k| < n/2 appears twice (k and -k fold into one cosine) while the
// Nyquist bin appears once. Weighted this way, the action of S at zeta = 1/2
// agrees with T on every vector to rounding; with a full Nyquist weight the
// two differ by a rank-one cosine matrix of norm 2^{2p+1}/n, exactly the kind
// of term the residual construction is meant to cancel.
//
// The entry depends on j and l only through m = j - l, so the k-sum is
// evaluated once for each of the 2n - 1 offsets with the literal m argument
// and copied along the diagonals. Same rounded values as the naive double
// loop, at 1/n of the cost.
inline EdgeOperator global_edge_matrix(int n, int p, double zeta) {
  if (n < 4 || n % 2 != 0)
    throw std::invalid_argument("global_edge_matrix: n must be even and at least 4");
  if (p < 0) throw std::invalid_argument("global_edge_matrix: p must be nonnegative");
  if (!(zeta >= 0.0 && zeta < 1.0))
    throw std::invalid_argument("global_edge_matrix: zeta must lie in [0, 1)");
  const int half = n / 2;
  const double ds = 2.0 * kPi / n;
  const double q = static_cast<double>(binom_q(0, p));
  const double prefactor = std::pow(2.0, 2 * p + 1) / (n * q);
  Eigen::VectorXd by_offset(2 * n - 1);
  for (int m = -(n - 1); m <= n - 1; ++m) {
    const double theta_plus = m + 0.5 + zeta;
    const double theta_minus = m - 0.5 + zeta;
    double acc = 0.0;
    for (int k = 1; k <= half; ++k) {
      const double w = (k == half) ? 0.5 : 1.0;
      const double damp = (p == 0) ? 1.0 : std::pow(std::sin(k * ds / 2.0), 2 * p);
      acc += w * damp *
             (std::cos(k * ds * theta_plus) - std::cos(k * ds * theta_minus));
    }
    by_offset[m + n - 1] = prefactor * acc;
  }
  Eigen::MatrixXd M(n, n);
  for (int j = 0; j < n; ++j)
    for (int l = 0; l < n; ++l) M(j, l) = by_offset[j - l + n - 1];
  return {std::move(M), OperatorKind::Global, p, zeta};
}

// R = T - S. At zeta = 1/2 this is numerically zero; at zeta = 1/4 it keeps
// nearly full rank while still vanishing on the smooth part of a signal, which
// is what makes it usable as a regularization transform.
inline EdgeOperator residual_operator(int n, int p, double zeta) {
  EdgeOperator t = local_diff_matrix(n, p);
  const EdgeOperator s = global_edge_matrix(n, p, zeta);
  return {t.matrix - s.matrix, OperatorKind::Residual, p, zeta};
}

// Discrete Fourier coefficients f_hat(k) = (1/n) sum_j f_j exp(-i k s_j),
// k = -n/2 .. n/2 - 1 in that order. Direct summation; n stays small here.
inline Eigen::VectorXcd dft_coefficients(const SignalVector& f) {
  const int n = f.grid.n;
  Eigen::VectorXcd out(n);
  for (int idx = 0; idx < n; ++idx) {
    const int k = idx - n / 2;
    std::complex<double> acc(0.0, 0.0);
    for (int j = 0; j < n; ++j) {
      const double arg = -k * f.grid.points[j];
      acc += f.values[j] * std::complex<double>(std::cos(arg), std::sin(arg));
    }
    out[idx] = acc / static_cast<double>(n);
  }
  return out;
}

struct RankReport {
  Eigen::VectorXd singular_values;  // descending
  int numerical_rank = 0;
  double condition_estimate = 0.0;  // sigma_max over the smallest kept singular value
};

inline RankReport rank_diagnostics(const EdgeOperator& op, double tol_rel) {
  if (!(tol_rel > 0.0 && tol_rel < 1.0))
    throw std::invalid_argument("rank_diagnostics: tol_rel must lie in (0, 1)");
  Eigen::BDCSVD<Eigen::MatrixXd> svd(op.matrix);
  RankReport rep;
  rep.singular_values = svd.singularValues();
  const double smax = rep.singular_values.size() > 0 ? rep.singular_values[0] : 0.0;
  if (smax == 0.0) return rep;  // exact zero matrix: rank 0, condition 0
  for (int i = 0; i < rep.singular_values.size(); ++i)
    if (rep.singular_values[i] > tol_rel * smax) ++rep.numerical_rank;
  rep.condition_estimate = smax / rep.singular_values[rep.numerical_rank - 1];
  return rep;
}

}  // namespace sigrec
