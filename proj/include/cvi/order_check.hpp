#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "cvi/errors.hpp"
#include "cvi/types.hpp"

namespace cvi {

/// Advances a state by one step of size h.
using StepMap = std::function<Vector(const Vector&, double)>;
/// Returns the reference state at time T starting from `initial`.
using ReferenceMap = std::function<Vector(const Vector&, double)>;

struct OrderCheckResult {
  std::vector<double> h;
  std::vector<double> error;
  std::vector<bool> used;  ///< false when the error sat on the round-off floor
  double rate = std::numeric_limits<double>::quiet_NaN();
  bool noise_floor = false;  ///< fewer than two usable points remained
  std::vector<std::string> warnings;
};

/// Least-squares slope of log(y) against log(x).
inline double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/// Integrates to time T with each step size and fits the global error rate.
inline OrderCheckResult order_check(const StepMap& step, const ReferenceMap& reference,
                                    const Vector& initial, const std::vector<double>& h_list,
                                    double T) {
  if (h_list.size() < 3) throw InvalidArgument("order_check: need at least three step sizes");
  for (std::size_t i = 0; i < h_list.size(); ++i) {
    if (!(h_list[i] > 0)) throw InvalidArgument("order_check: step sizes must be positive");
    if (i > 0 && !(h_list[i] < h_list[i - 1]))
      throw InvalidArgument("order_check: step sizes must be decreasing");
  }
  if (!(T > 0)) throw InvalidArgument("order_check: T must be positive");

  const Vector ref = reference(initial, T);
  const double floor =
      1e2 * std::numeric_limits<double>::epsilon() * std::max(1.0, inf_norm(ref));

  OrderCheckResult out;
  std::vector<double> xs, ys;
  for (double h : h_list) {
    const double steps = std::round(T / h);
    if (std::abs(steps * h - T) > 1e-9 * T)
      throw InvalidArgument("order_check: T is not an integer multiple of h=" + std::to_string(h));
    Vector state = initial;
    for (long k = 0; k < static_cast<long>(steps); ++k) state = step(state, h);
    const double err = inf_norm(state - ref);
    const bool usable = std::isfinite(err) && err > floor;
    if (!usable)
      out.warnings.push_back("error at h=" + std::to_string(h) +
                             " is below the round-off floor; point dropped");
    out.h.push_back(h);
    out.error.push_back(err);
    out.used.push_back(usable);
    if (usable) {
      xs.push_back(h);
      ys.push_back(err);
    }
  }
  if (xs.size() < 2) {
    out.noise_floor = true;
    out.warnings.push_back("fewer than two usable points; rate not identifiable");
  } else {
    out.rate = log_log_slope(xs, ys);
  }
  return out;
}

}  // namespace cvi
