#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>

namespace sigrec {

// 1-based inclusive index window, matching the convention used when quoting
// grid locations in prose and in result files.
struct ErrorWindow {
  int j_min = 1;
  int j_max = 1;
};

inline void check_window(const ErrorWindow& w, int n) {
  if (!(1 <= w.j_min && w.j_min < w.j_max && w.j_max <= n))
    throw std::invalid_argument("ErrorWindow: need 1 <= j_min < j_max <= n, got [" +
                                std::to_string(w.j_min) + ", " + std::to_string(w.j_max) +
                                "] with n = " + std::to_string(n));
}

inline Eigen::VectorXd abs_error(const Eigen::VectorXd& x, const Eigen::VectorXd& f) {
  if (x.size() != f.size()) throw std::invalid_argument("abs_error: length mismatch");
  return (x - f).cwiseAbs();
}

// same, clamped below at 1e-16 so log-scale plots have a floor
inline Eigen::VectorXd abs_error_display(const Eigen::VectorXd& x,
                                         const Eigen::VectorXd& f) {
  return abs_error(x, f).cwiseMax(1e-16);
}

// Windowed sum of pointwise relative errors, sum_j |x_j - f_j| / |f_j| over
// the 1-based inclusive window. A zero reference value inside the window
// makes the quantity undefined and is reported as an error naming the index.
inline double rel_error(const Eigen::VectorXd& x, const Eigen::VectorXd& f,
                        const ErrorWindow& w) {
  if (x.size() != f.size()) throw std::invalid_argument("rel_error: length mismatch");
  check_window(w, static_cast<int>(x.size()));
  double acc = 0.0;
  for (int j = w.j_min - 1; j <= w.j_max - 1; ++j) {
    if (f[j] == 0.0)
      throw std::domain_error("rel_error: reference is zero at 1-based index " +
                              std::to_string(j + 1) +
                              "; use rel_error_nonzero to skip exact zeros");
    acc += std::abs(x[j] - f[j]) / std::abs(f[j]);
  }
  return acc;
}

// Same sum restricted to entries whose reference is nonzero. The experiment
// harness uses this variant: the smooth window of the sine piece contains an
// exact zero at s = 0 and a pointwise relative error is meaningless there.
inline double rel_error_nonzero(const Eigen::VectorXd& x, const Eigen::VectorXd& f,
                                const ErrorWindow& w) {
  if (x.size() != f.size())
    throw std::invalid_argument("rel_error_nonzero: length mismatch");
  check_window(w, static_cast<int>(x.size()));
  double acc = 0.0;
  for (int j = w.j_min - 1; j <= w.j_max - 1; ++j) {
    if (f[j] == 0.0) continue;
    acc += std::abs(x[j] - f[j]) / std::abs(f[j]);
  }
  return acc;
}

// mean instead of sum; distinct name so no one silently mixes the scalings
inline double rel_error_mean(const Eigen::VectorXd& x, const Eigen::VectorXd& f,
                             const ErrorWindow& w) {
  return rel_error(x, f, w) / static_cast<double>(w.j_max - w.j_min + 1);
}

// inverse of the sigma^2-from-SNR rule; round-trips to rounding
inline double snr_db(const Eigen::VectorXd& f, double sigma2) {
  if (!(sigma2 > 0.0)) throw std::invalid_argument("snr_db: variance must be positive");
  if (f.size() == 0) throw std::invalid_argument("snr_db: empty signal");
  const double power = f.squaredNorm() / static_cast<double>(f.size());
  if (!(power > 0.0)) throw std::invalid_argument("snr_db: zero signal");
  return 10.0 * std::log10(power / sigma2);
}

struct SparsityProfile {
  double l1_norm = 0.0;
  int support_size = 0;
};

inline SparsityProfile sparsity_profile(const Eigen::MatrixXd& L, const Eigen::VectorXd& x,
                                        double threshold) {
  if (threshold < 0.0)
    throw std::invalid_argument("sparsity_profile: threshold must be nonnegative");
  if (L.cols() != x.size()) throw std::invalid_argument("sparsity_profile: dimension mismatch");
  const Eigen::VectorXd v = L * x;
  SparsityProfile prof;
  prof.l1_norm = v.lpNorm<1>();
  for (int i = 0; i < v.size(); ++i)
    if (std::abs(v[i]) > threshold) ++prof.support_size;
  return prof;
}

// Window and probe-point presets used throughout the experiments, quoted
// 1-based. The smooth window covers the sine piece away from both jumps,
// roughly s in [-pi/3, pi/3] at n = 128. The near-jump probes sit two cells
// to either side of the cell boundary at s = -pi/2.
inline ErrorWindow smooth_f1_window() { return ErrorWindow{44, 85}; }
inline int near_jump_index_minus(int n) { return n / 4 - 2; }
inline int near_jump_index_plus(int n) { return n / 4 + 2; }

}  // namespace sigrec
