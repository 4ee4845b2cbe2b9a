#pragma once

#include "sigrec/grid.hpp"
#include "sigrec/rng.hpp"
#include "sigrec/signals.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace sigrec {

enum class ModelKind { Identity, GaussianBlur, Undersample };
enum class BlurUnits { Physical, Index };

struct ForwardModel {
  ModelKind kind = ModelKind::Identity;
  Eigen::MatrixXd matrix;
  double gamma = 0.0;               // blur width, in the chosen units
  BlurUnits units = BlurUnits::Physical;
  double ratio = 0.0;               // undersampling fraction
  std::uint64_t seed = 0;           // mask stream seed
  std::vector<int> zeroed_rows;     // bookkeeping only; recovery never sees it
};

inline ForwardModel identity_model(int n) {
  if (n < 1) throw std::invalid_argument("identity_model: n must be positive");
  ForwardModel m;
  m.kind = ModelKind::Identity;
  m.matrix = Eigen::MatrixXd::Identity(n, n);
  return m;
}

// Periodic Gaussian point spread. Row j holds exp(-d^2 / (2 gamma^2)) with d
// the wrap-around distance between cells j and l, measured along s in
// physical units or in whole cells in index units. Entries below 1e-16 of the
// row maximum are dropped, then the row is normalized to sum 1 so constants
// pass through unchanged. gamma -> 0 degrades gracefully to the identity.
// The matrix is a symmetric circulant; its eigenvalues (the DFT of one row)
// are real and lie in (0, 1].
inline ForwardModel gaussian_blur_model(const UniformGrid& grid, double gamma,
                                        BlurUnits units = BlurUnits::Physical) {
  if (!(gamma > 0.0))
    throw std::invalid_argument("gaussian_blur_model: gamma must be positive");
  const int n = grid.n;
  Eigen::MatrixXd A(n, n);
  for (int j = 0; j < n; ++j) {
    for (int l = 0; l < n; ++l) {
      double d;
      if (units == BlurUnits::Physical) {
        d = std::abs(grid.points[j] - grid.points[l]);
        d = std::min(d, 2.0 * kPi - d);
      } else {
        d = std::abs(static_cast<double>(j - l));
        d = std::min(d, n - d);
      }
      A(j, l) = std::exp(-d * d / (2.0 * gamma * gamma));
    }
  }
  for (int j = 0; j < n; ++j) {
    const double row_max = A.row(j).maxCoeff();
    for (int l = 0; l < n; ++l)
      if (A(j, l) < 1e-16 * row_max) A(j, l) = 0.0;
    A.row(j) /= A.row(j).sum();
  }
  ForwardModel m;
  m.kind = ModelKind::GaussianBlur;
  m.matrix = std::move(A);
  m.gamma = gamma;
  m.units = units;
  return m;
}

// Zero out h = round(r n) distinct rows of the identity, chosen by the seeded
// mask stream. The recovery side still models the measurement as the
// identity: the solver is never told which samples were dropped.
inline ForwardModel undersample_model(int n, double r, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("undersample_model: n must be positive");
  if (!(r > 0.0 && r < 1.0))
    throw std::invalid_argument("undersample_model: ratio must lie in (0, 1)");
  const int h = static_cast<int>(std::llround(r * n));
  RandomStream rng(seed);
  ForwardModel m;
  m.kind = ModelKind::Undersample;
  m.matrix = Eigen::MatrixXd::Identity(n, n);
  m.ratio = r;
  m.seed = seed;
  m.zeroed_rows = rng.sample_without_replacement(n, h);
  for (const int row : m.zeroed_rows) m.matrix.row(row).setZero();
  return m;
}

// sigma^2 = mean signal power / 10^(SNR/10)
inline double sigma2_from_snr(const Eigen::VectorXd& f, double snr_db) {
  if (f.size() == 0) throw std::invalid_argument("sigma2_from_snr: empty signal");
  const double power = f.squaredNorm() / static_cast<double>(f.size());
  if (!(power > 0.0)) throw std::invalid_argument("sigma2_from_snr: zero signal");
  return power / std::pow(10.0, snr_db / 10.0);
}

inline double sigma2_from_snr(const SignalVector& f, double snr_db) {
  return sigma2_from_snr(f.values, snr_db);
}

// Noise level given either as SNR in dB relative to a clean signal, or as a
// variance directly. Exactly one of the two must be set; sigma2 = 0 is
// accepted as the degenerate noise-free case.
struct NoiseSpec {
  std::optional<double> snr_db;
  std::optional<double> sigma2;

  static NoiseSpec from_snr(double db) {
    NoiseSpec s;
    s.snr_db = db;
    return s;
  }
  static NoiseSpec from_sigma2(double s2) {
    if (s2 < 0.0) throw std::invalid_argument("NoiseSpec: variance must be nonnegative");
    NoiseSpec s;
    s.sigma2 = s2;
    return s;
  }
};

inline double resolve_sigma2(const NoiseSpec& spec, const Eigen::VectorXd& clean) {
  if (spec.snr_db.has_value() == spec.sigma2.has_value())
    throw std::invalid_argument("NoiseSpec: exactly one of snr_db and sigma2 must be set");
  if (spec.sigma2) return *spec.sigma2;
  return sigma2_from_snr(clean, *spec.snr_db);
}

inline Eigen::VectorXd add_noise(const Eigen::VectorXd& y, double sigma2,
                                 std::uint64_t seed) {
  if (sigma2 < 0.0) throw std::invalid_argument("add_noise: variance must be nonnegative");
  if (sigma2 == 0.0) return y;
  RandomStream rng(seed);
  const double sd = std::sqrt(sigma2);
  Eigen::VectorXd out = y;
  for (int j = 0; j < out.size(); ++j) out[j] += sd * rng.gaussian();
  return out;
}

// y = A f + delta for one trial
inline Eigen::VectorXd measure(const ForwardModel& model, const Eigen::VectorXd& f,
                               double sigma2, std::uint64_t noise_seed) {
  return add_noise(model.matrix * f, sigma2, noise_seed);
}

}  // namespace sigrec
