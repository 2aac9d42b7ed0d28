#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace oracle {

// Stationary law of a birth-death chain on {0..K} from a sparse generator solve.
inline std::vector<double> birth_death(const std::function<double(int)>& birth, const std::function<double(int)>& death,
                                       int states) {
  using Triplet = Eigen::Triplet<double>;
  std::vector<Triplet> entries;
  for (int i = 0; i < states; ++i) {
    const double up = i + 1 < states ? birth(i) : 0.0;
    const double down = i > 0 ? death(i) : 0.0;
    // Row i of Q^T: inflow to i minus outflow from i. The last row is normalization.
    if (i == states - 1) continue;
    entries.emplace_back(i, i, -(up + down));
    if (i + 1 < states) entries.emplace_back(i, i + 1, death(i + 1));
    if (i > 0) entries.emplace_back(i, i - 1, birth(i - 1));
  }
  for (int j = 0; j < states; ++j) entries.emplace_back(states - 1, j, 1.0);
  Eigen::SparseMatrix<double> a(states, states);
  a.setFromTriplets(entries.begin(), entries.end());
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(states);
  rhs[states - 1] = 1.0;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(a);
  Eigen::VectorXd pi = lu.solve(rhs);
  return std::vector<double>(pi.data(), pi.data() + states);
}

// Adaptive quadrature on a finite interval.
inline double quad(const std::function<double(double)>& f, double a, double b) {
  double err = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 20, 1e-14, &err);
}

// Adaptive quadrature on [a, inf) or (-inf, b].
inline double quad_tail(const std::function<double(double)>& f, double a, double b) {
  boost::math::quadrature::tanh_sinh<double> ts;
  return ts.integrate(f, a, b);
}

inline double normal_cdf(double x) { return boost::math::cdf(boost::math::normal_distribution<double>(), x); }
inline double normal_pdf(double x) { return boost::math::pdf(boost::math::normal_distribution<double>(), x); }

// Two-sample Kolmogorov-Smirnov distance.
inline double ks_distance(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(i / na - j / nb));
  }
  return d;
}

// One-sample KS distance against a continuous cdf.
inline double ks_distance(std::vector<double> a, const std::function<double(double)>& cdf) {
  std::sort(a.begin(), a.end());
  const double n = static_cast<double>(a.size());
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double f = cdf(a[i]);
    d = std::max({d, std::abs(f - i / n), std::abs((i + 1) / n - f)});
  }
  return d;
}

}  // namespace oracle
