#pragma once

#include <Eigen/Dense>

#include <numbers>
#include <stdexcept>
#include <string>

namespace sigrec {

inline constexpr double kPi = std::numbers::pi;

// Uniform periodic discretization of [-pi, pi): s_j = -pi + j*delta_s for
// j = 0..n-1. Code is 0-based throughout; documentation quoting 1-based
// indices shifts by one.
struct UniformGrid {
  int n = 0;
  double delta_s = 0.0;
  Eigen::VectorXd points;
};

inline UniformGrid build_grid(int n) {
  if (n < 4 || n % 2 != 0)
    throw std::invalid_argument("build_grid: n must be even and at least 4, got " +
                                std::to_string(n));
  UniformGrid g;
  g.n = n;
  g.delta_s = 2.0 * kPi / n;
  g.points.resize(n);
  // evaluate the affine formula directly instead of accumulating, so that
  // special points (0, +-pi/2 when n is a multiple of 4) come out exact
  for (int j = 0; j < n; ++j) g.points[j] = -kPi + j * g.delta_s;
  return g;
}

}  // namespace sigrec
