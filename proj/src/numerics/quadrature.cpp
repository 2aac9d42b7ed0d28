#include "hetq/numerics/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>

#include "hetq/error.hpp"

namespace hetq::numerics {

namespace {

enum class Family { Hermite, Legendre, Laguerre };

// Golub-Welsch: nodes are the eigenvalues of the Jacobi matrix, weights the
// squared first eigenvector components times the total weight mass.
Rule golub_welsch(Family family, std::size_t n) {
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  Eigen::VectorXd off = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n > 1 ? n - 1 : 0));
  double mass = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double kk = static_cast<double>(k);
    if (family == Family::Laguerre) diag[static_cast<Eigen::Index>(k)] = 2.0 * kk + 1.0;
    if (k == 0) continue;
    double b = 0.0;
    switch (family) {
      case Family::Hermite: b = std::sqrt(kk); break;
      case Family::Legendre: b = kk / std::sqrt(4.0 * kk * kk - 1.0); break;
      case Family::Laguerre: b = kk; break;
    }
    off[static_cast<Eigen::Index>(k - 1)] = b;
  }
  if (family == Family::Legendre) mass = 2.0;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, off, Eigen::ComputeEigenvectors);
  require(solver.info() == Eigen::Success, ErrorCode::Domain, "quadrature rule construction failed");

  Rule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto idx = static_cast<Eigen::Index>(i);
    const double v = solver.eigenvectors()(0, idx);
    rule.nodes[i] = solver.eigenvalues()[idx];
    rule.weights[i] = mass * v * v;
  }
  return rule;
}

const Rule& cached(Family family, std::size_t n) {
  static std::mutex mutex;
  static std::map<std::pair<int, std::size_t>, std::unique_ptr<Rule>> cache;
  require(n >= 1, ErrorCode::Domain, "quadrature rule needs at least one node");
  const std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[{static_cast<int>(family), n}];
  if (!slot) slot = std::make_unique<Rule>(golub_welsch(family, n));
  return *slot;
}

}  // namespace

const Rule& gauss_hermite(std::size_t n) { return cached(Family::Hermite, n); }
const Rule& gauss_legendre(std::size_t n) { return cached(Family::Legendre, n); }
const Rule& gauss_laguerre(std::size_t n) { return cached(Family::Laguerre, n); }

}  // namespace hetq::numerics
