#include <algorithm>
#include <cmath>

#include "detail.hpp"
#include "hetq/error.hpp"
#include "hetq/sim/sim.hpp"

namespace hetq::sim {

namespace {

// Rates enter the coupled mode in fixed point with 2^-32 resolution so that
// thinning thresholds and busy-rate sums compare exactly.
constexpr double kScale = 4294967296.0;

std::uint64_t quantize(double rate) { return static_cast<std::uint64_t>(std::llround(rate * kScale)); }

class Fenwick {
 public:
  explicit Fenwick(std::size_t n) : tree_(n + 1, 0) {}

  void add(std::size_t i, std::int64_t delta) {
    total_ += delta;
    for (++i; i < tree_.size(); i += i & (~i + 1)) tree_[i] += delta;
  }

  std::int64_t total() const { return total_; }

  // Smallest index whose inclusive prefix sum exceeds w, for 0 <= w < total.
  std::size_t find(std::int64_t w) const {
    std::size_t pos = 0;
    std::size_t step = 1;
    while (step * 2 < tree_.size()) step *= 2;
    for (; step > 0; step /= 2) {
      if (pos + step < tree_.size() && tree_[pos + step] <= w) {
        pos += step;
        w -= tree_[pos];
      }
    }
    return pos;
  }

 private:
  std::vector<std::int64_t> tree_;
  std::int64_t total_ = 0;
};

}  // namespace

bool CoupledPath::ordered() const {
  return std::all_of(points.begin(), points.end(), [](const CoupledPoint& p) { return p.d_hom <= p.d_het; });
}

CoupledPath coupled_run(const core::SystemConfig& config, double p_rate, const core::RealizedSystem& system,
                        double horizon, std::size_t max_skeleton_events, std::optional<std::size_t> initial_X) {
  const std::size_t n = system.n;
  require(n >= 1, ErrorCode::ConfigError, "realized system has no servers");
  require(config.abandon_rate == 0.0, ErrorCode::ConfigError, "key 'nu': the coupled run supports nu = 0 only");
  require(p_rate > 0.0, ErrorCode::ConfigError, "key 'p_rate': must be positive");
  require(p_rate <= system.min_rate(), ErrorCode::ConfigError, "key 'p_rate': exceeds the slowest server rate");
  require(horizon > 0.0, ErrorCode::ConfigError, "key 'horizon': must be positive");

  std::vector<std::uint64_t> rate_q(n);
  for (std::size_t k = 0; k < n; ++k) rate_q[k] = quantize(system.mu[k]);
  const std::uint64_t p_q = quantize(p_rate);
  const std::uint64_t q_q = *std::max_element(rate_q.begin(), rate_q.end());
  require(q_q < (1ULL << 62) / n, ErrorCode::ConfigError, "rates too large for the coupled skeleton");
  const std::uint64_t skeleton_span = q_q * n;

  CoupledPath out;
  out.p_rate = p_rate;
  out.q_rate = system.max_rate();

  core::RngStream root(config.seed);
  detail::ArrivalProcess arrivals(config.lambda_r, config.arrival_scv, root.split(core::Stream::Arrivals));
  core::RngStream skeleton = root.split(core::Stream::Skeleton);
  detail::IdlePool idle(config.policy, system.mu, root.split(core::Stream::Routing));
  const double skeleton_rate = static_cast<double>(n) * out.q_rate;

  const std::size_t x0 = initial_X.value_or(n);
  auto x_hom = static_cast<std::int64_t>(x0);
  std::int64_t d_hom = 0, d_het = 0;
  Fenwick busy_rate(n);
  for (std::size_t k = 0; k < n; ++k) idle.push(k);
  for (std::size_t i = 0; i < std::min(x0, n); ++i) {
    const std::size_t k = idle.pop();
    busy_rate.add(k, static_cast<std::int64_t>(rate_q[k]));
  }
  auto queue_het = static_cast<std::int64_t>(x0 > n ? x0 - n : 0);

  double t_arrival = arrivals.next_gap();
  double t_skeleton = skeleton.exponential(skeleton_rate);
  const auto nn = static_cast<std::int64_t>(n);
  while (true) {
    const double t = std::min(t_arrival, t_skeleton);
    if (t > horizon) break;
    if (t_skeleton <= t_arrival) {
      const auto w = static_cast<std::int64_t>(skeleton.below(skeleton_span));
      const std::int64_t hom_threshold = std::min(x_hom, nn) * static_cast<std::int64_t>(p_q);
      if (w < hom_threshold) {
        --x_hom;
        ++d_hom;
      }
      if (w < busy_rate.total()) {
        const std::size_t k = busy_rate.find(w);
        ++d_het;
        if (queue_het > 0) {
          --queue_het;
        } else {
          busy_rate.add(k, -static_cast<std::int64_t>(rate_q[k]));
          idle.push(k);
        }
      }
      out.points.push_back({t, d_hom, d_het});
      t_skeleton = t + skeleton.exponential(skeleton_rate);
      if (max_skeleton_events > 0 && out.points.size() >= max_skeleton_events) break;
    } else {
      ++out.arrivals;
      ++x_hom;
      if (!idle.empty()) {
        const std::size_t k = idle.pop();
        busy_rate.add(k, static_cast<std::int64_t>(rate_q[k]));
      } else {
        ++queue_het;
      }
      t_arrival = t + arrivals.next_gap();
    }
  }
  return out;
}

}  // namespace hetq::sim
