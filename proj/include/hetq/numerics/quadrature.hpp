#pragma once

#include <cstddef>
#include <vector>

namespace hetq::numerics {

/// Nodes and weights of an n-point Gauss rule.
struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Weight pdf(x) on the real line: sum w_i f(x_i) approximates E f(Z), Z ~ N(0,1).
const Rule& gauss_hermite(std::size_t n);
/// Weight 1 on [-1, 1].
const Rule& gauss_legendre(std::size_t n);
/// Weight exp(-x) on [0, inf).
const Rule& gauss_laguerre(std::size_t n);

/// E f(mean + sd Z) by an n-node Hermite rule.
template <class F>
double normal_expectation(F&& f, double mean, double sd, std::size_t n) {
  const Rule& rule = gauss_hermite(n);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) sum += rule.weights[i] * f(mean + sd * rule.nodes[i]);
  return sum;
}

/// Integral of f over [a, b] by an n-node Legendre rule.
template <class F>
double integrate(F&& f, double a, double b, std::size_t n) {
  const Rule& rule = gauss_legendre(n);
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
  return half * sum;
}

}  // namespace hetq::numerics
