#include <algorithm>
#include <cmath>
#include <limits>

#include "hetq/error.hpp"
#include "hetq/staffing/staffing.hpp"

namespace hetq::staffing {

namespace {

constexpr double kInvPhi = 0.61803398874989484820;

double safe_eval(const std::function<double(double)>& f, double x, std::size_t& count) {
  ++count;
  try {
    const double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  } catch (const Error&) {
    return std::numeric_limits<double>::infinity();
  }
}

std::pair<double, double> golden(const std::function<double(double)>& f, double a, double b, double tol,
                                 std::size_t& count) {
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = safe_eval(f, c, count);
  double fd = safe_eval(f, d, count);
  while (b - a > tol) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = safe_eval(f, c, count);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = safe_eval(f, d, count);
    }
  }
  const double x = 0.5 * (a + b);
  const double fx = safe_eval(f, x, count);
  if (fx <= fc && fx <= fd) return {x, fx};
  return fc <= fd ? std::pair{c, fc} : std::pair{d, fd};
}

}  // namespace

OptimizationResult optimize_staffing(const std::function<double(double)>& cost_fn, double x_lo, double x_hi,
                                     double tol, std::size_t curve_points) {
  require(x_lo > 0.0 && x_hi > x_lo, ErrorCode::BracketError, "bracket must satisfy 0 < x_lo < x_hi");
  require(tol > 0.0, ErrorCode::BracketError, "tolerance must be positive");
  require(curve_points >= 3, ErrorCode::BracketError, "curve needs at least 3 points");

  OptimizationResult out;
  out.x_lo = x_lo;
  out.x_hi = x_hi;
  out.tol = tol;

  const double h = (x_hi - x_lo) / static_cast<double>(curve_points - 1);
  std::size_t best = 0;
  for (std::size_t i = 0; i < curve_points; ++i) {
    const double x = i + 1 == curve_points ? x_hi : x_lo + h * static_cast<double>(i);
    out.cost_curve.emplace_back(x, safe_eval(cost_fn, x, out.evaluations));
    if (out.cost_curve[i].second < out.cost_curve[best].second) best = i;
  }
  require(std::isfinite(out.cost_curve[best].second), ErrorCode::BracketError,
          "cost evaluation failed across the whole bracket");

  for (std::size_t i = 1; i + 1 < curve_points; ++i) {
    const double c = out.cost_curve[i].second;
    const double slack = 1e-12 * std::max(1.0, std::abs(c));
    if (c > out.cost_curve[i - 1].second + slack && c > out.cost_curve[i + 1].second + slack) out.unimodal = false;
  }

  std::pair<double, double> found;
  if (out.unimodal) {
    found = golden(cost_fn, x_lo, x_hi, tol, out.evaluations);
  } else {
    const double a = out.cost_curve[best == 0 ? 0 : best - 1].first;
    const double b = out.cost_curve[std::min(best + 1, curve_points - 1)].first;
    found = golden(cost_fn, a, b, tol, out.evaluations);
  }
  if (!(found.second <= out.cost_curve[best].second)) {
    // Golden section missed the sampled basin; refine around the best sample.
    const double a = out.cost_curve[best == 0 ? 0 : best - 1].first;
    const double b = out.cost_curve[std::min(best + 1, curve_points - 1)].first;
    const auto refined = golden(cost_fn, a, b, tol, out.evaluations);
    found = refined.second <= out.cost_curve[best].second ? refined : out.cost_curve[best];
  }
  out.x_star = found.first;
  out.cost_at_optimum = found.second;
  return out;
}

}  // namespace hetq::staffing
