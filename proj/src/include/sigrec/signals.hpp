#pragma once

#include "sigrec/grid.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace sigrec {

struct SignalVector {
  UniformGrid grid;
  Eigen::VectorXd values;
};

// values[j] = jump carried by cell [s_j, s_{j+1}); zero where the signal is
// continuous.
struct EdgeVector {
  UniformGrid grid;
  Eigen::VectorXd values;
};

// 2pi-periodic piecewise definition on [-pi, pi). Branch i is valid on the
// half-open interval [bounds[i], bounds[i+1]), so an exact hit on a breakpoint
// takes the branch starting there. bounds[0] = -pi and bounds[K] = pi.
class PiecewiseSignal {
 public:
  PiecewiseSignal(std::vector<double> bounds,
                  std::vector<std::function<double(double)>> branches)
      : bounds_(std::move(bounds)), branches_(std::move(branches)) {
    if (branches_.empty() || bounds_.size() != branches_.size() + 1)
      throw std::invalid_argument("PiecewiseSignal: K branches need K+1 bounds");
    if (bounds_.front() != -kPi || bounds_.back() != kPi)
      throw std::invalid_argument("PiecewiseSignal: bounds must span [-pi, pi]");
    for (std::size_t i = 0; i + 1 < bounds_.size(); ++i)
      if (!(bounds_[i] < bounds_[i + 1]))
        throw std::invalid_argument("PiecewiseSignal: bounds must be strictly increasing");
  }

  double operator()(double s) const {
    s = reduce(s);
    return branches_[branch_index(s)](s);
  }

  SignalVector sample(const UniformGrid& grid) const {
    SignalVector out{grid, Eigen::VectorXd(grid.n)};
    for (int j = 0; j < grid.n; ++j) out.values[j] = (*this)(grid.points[j]);
    return out;
  }

  // Analytic jump vector: one-sided limits come from evaluating the adjacent
  // branch formulas at the breakpoint, never from sampled differences. The
  // wrap point compares the last branch at +pi against the first at -pi.
  // A jump at xi lands in cell floor((xi + pi) / delta_s).
  EdgeVector jumps(const UniformGrid& grid) const {
    EdgeVector g{grid, Eigen::VectorXd::Zero(grid.n)};
    auto record = [&](double xi, double left, double right) {
      const double jump = right - left;
      const double scale = std::max({1.0, std::abs(left), std::abs(right)});
      if (std::abs(jump) <= 1e-12 * scale) return;  // matching limits, no edge
      int cell = static_cast<int>(std::floor((xi + kPi) / grid.delta_s));
      if (cell < 0) cell = 0;
      if (cell >= grid.n) cell = grid.n - 1;
      g.values[cell] += jump;
    };
    for (std::size_t i = 1; i + 1 < bounds_.size(); ++i)
      record(bounds_[i], branches_[i - 1](bounds_[i]), branches_[i](bounds_[i]));
    record(-kPi, branches_.back()(kPi), branches_.front()(-kPi));
    return g;
  }

  const std::vector<double>& bounds() const { return bounds_; }

 private:
  // shift into [-pi, pi). One step is exact by Sterbenz whenever the input
  // sits within a period of the target range, so grid points survive a
  // representable 2pi shift bit for bit.
  static double reduce(double s) {
    double t = s;
    while (t < -kPi) t += 2.0 * kPi;
    while (t >= kPi) t -= 2.0 * kPi;
    return t;
  }

  std::size_t branch_index(double s) const {
    std::size_t i = branches_.size() - 1;
    while (i > 0 && s < bounds_[i]) --i;
    return i;
  }

  std::vector<double> bounds_;
  std::vector<std::function<double(double)>> branches_;
};

enum class SignalId { f1, f2 };

// Piecewise smooth test signal: linear ramps outside (-pi/2, pi/2), a sine in
// between. With jump = right limit minus left limit: the ramp ends at pi/2
// and the sine starts at -sin(-3pi)/2 = 0, so the jump at -pi/2 is -pi/2; the
// mirror image at +pi/2 gives +pi/2. No jump at the wrap point.
inline PiecewiseSignal make_f1() {
  return PiecewiseSignal(
      {-kPi, -kPi / 2, kPi / 2, kPi},
      {[](double s) { return s + kPi; },
       [](double s) { return -0.5 * std::sin(6.0 * s); },
       [](double s) { return -s + kPi; }});
}

// Piecewise constant: 1.5 outside [-pi/2, pi/2), -6/pi inside. Jump magnitude
// 1.5 + 6/pi at both breakpoints, opposite signs, no wrap jump.
inline PiecewiseSignal make_f2() {
  return PiecewiseSignal(
      {-kPi, -kPi / 2, kPi / 2, kPi},
      {[](double) { return 1.5; },
       [](double) { return -6.0 / kPi; },
       [](double) { return 1.5; }});
}

inline PiecewiseSignal make_signal(SignalId id) {
  return id == SignalId::f1 ? make_f1() : make_f2();
}

inline SignalVector sample_f1(const UniformGrid& grid) { return make_f1().sample(grid); }
inline SignalVector sample_f2(const UniformGrid& grid) { return make_f2().sample(grid); }

inline EdgeVector jump_vector(SignalId id, const UniformGrid& grid) {
  return make_signal(id).jumps(grid);
}

}  // namespace sigrec
