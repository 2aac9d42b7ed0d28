#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <queue>
#include <string>

#include "detail.hpp"
#include "hetq/error.hpp"
#include "hetq/sim/sim.hpp"

namespace hetq::sim {

using detail::kInf;

namespace {

struct Waiting {
  double arrival;
  bool gone;
};

using TimedIndex = std::pair<double, std::uint64_t>;
using MinHeap = std::priority_queue<TimedIndex, std::vector<TimedIndex>, std::greater<>>;

class Engine {
 public:
  Engine(const core::SystemConfig& config, const core::RealizedSystem& system, const RunOptions& options)
      : cfg_(config),
        sys_(system),
        opt_(options),
        n_(system.n),
        root_(config.seed),
        arrivals_(config.lambda_r, config.arrival_scv, root_.split(core::Stream::Arrivals)),
        services_(root_.split(core::Stream::Services)),
        patience_(root_.split(core::Stream::Patience)),
        idle_(config.policy, system.mu, root_.split(core::Stream::Routing)),
        busy_(n_, 0),
        busy_since_(n_, 0.0),
        idle_since_(n_, 0.0),
        pool_busy_(std::max<std::size_t>(system.pool_count(), 1), 0) {
    require(n_ >= 1 && system.mu.size() == n_, ErrorCode::ConfigError, "realized system has no servers");
    require(options.horizon > 0.0, ErrorCode::ConfigError, "key 'horizon': must be positive");
    require(options.grid_points >= 2, ErrorCode::ConfigError, "key 'grid_points': need at least 2");
    require(options.mode == core::AbandonMode::None || config.abandon_rate > 0.0, ErrorCode::ConfigError,
            "key 'nu': abandonment mode '" + core::to_string(options.mode) + "' requires nu > 0");
    require(options.queue_cap >= 1, ErrorCode::ConfigError, "key 'queue_cap': must be positive");
  }

  PathRecord run() {
    init_record();
    init_state();
    const double dt = opt_.horizon / static_cast<double>(opt_.grid_points - 1);
    std::size_t next_grid = 0;
    auto grid_time = [&](std::size_t j) { return j + 1 == opt_.grid_points ? opt_.horizon : dt * j; };

    next_arrival_ = arrivals_.next_gap();
    while (true) {
      drop_stale_patience();
      const double t_dep = departures_.empty() ? kInf : departures_.top().first;
      double t_ab = kInf;
      if (opt_.mode == core::AbandonMode::PerCustomer && !patience_heap_.empty()) t_ab = patience_heap_.top().first;
      if (opt_.mode == core::AbandonMode::Perturbed) t_ab = next_perturbed_;
      const double tau = std::min({t_dep, t_ab, next_arrival_});
      if (tau > opt_.horizon) break;

      while (next_grid < opt_.grid_points && grid_time(next_grid) < tau) sample(grid_time(next_grid++));
      advance(tau);
      ++events_;
      // Equal times resolve as DEPARTURE < ABANDON < ARRIVAL.
      if (t_dep == tau) {
        departure(tau);
      } else if (t_ab == tau) {
        abandonment(tau);
      } else {
        arrival(tau);
        if (rec_.status == RunStatus::Overflow) break;
      }
      if (opt_.check_invariants) check(tau);
    }

    if (rec_.status == RunStatus::Ok) {
      while (next_grid < opt_.grid_points) sample(grid_time(next_grid++));
      advance(opt_.horizon);
      rec_.end_time = opt_.horizon;
    } else {
      rec_.end_time = now_;
    }
    for (std::size_t k = 0; k < n_; ++k)
      if (busy_[k]) rec_.busy_time[k] += rec_.end_time - busy_since_[k];
    rec_.total_arrivals = arrivals_count_;
    rec_.total_abandonments = abandonments_;
    return std::move(rec_);
  }

 private:
  void init_record() {
    rec_.n = n_;
    rec_.r = cfg_.r;
    rec_.lambda = cfg_.lambda_r;
    rec_.nu = cfg_.abandon_rate;
    rec_.seed = cfg_.seed;
    rec_.policy = cfg_.policy;
    rec_.mode = opt_.mode;
    rec_.rates = sys_.mu;
    rec_.pool_of = sys_.pool_of.size() == n_ ? sys_.pool_of : std::vector<std::size_t>(n_, 0);
    rec_.pool_rates = sys_.pool_rates;
    rec_.pool_sizes = sys_.pool_sizes;
    if (rec_.pool_sizes.empty()) rec_.pool_sizes = {n_};
    rec_.Z.assign(rec_.pool_sizes.size(), {});
    rec_.server_departures.assign(n_, 0);
    rec_.busy_time.assign(n_, 0.0);
    const std::size_t g = opt_.grid_points;
    for (auto* v : {&rec_.X, &rec_.Q, &rec_.R, &rec_.A, &rec_.delayed, &rec_.departures}) v->reserve(g);
    rec_.t.reserve(g);
    if (opt_.record_servers) rec_.idle.reserve(g * n_);
  }

  void init_state() {
    for (std::size_t k = 0; k < n_; ++k) idle_.push(k);
    const std::size_t x0 = opt_.initial_X.value_or(n_);
    rec_.initial_X = static_cast<std::int64_t>(x0);
    x_ = static_cast<std::int64_t>(x0);
    for (std::size_t i = 0; i < std::min(x0, n_); ++i) start_service(idle_.pop(), 0.0, 0.0, false);
    for (std::size_t i = n_; i < x0; ++i) enqueue(0.0);
    require(queue_count_ <= opt_.queue_cap, ErrorCode::ConfigError, "key 'initial_X': exceeds queue_cap");
    reschedule_perturbed(0.0);
  }

  void advance(double t) {
    const double h = t - now_;
    area_Q_ += static_cast<double>(queue_count_) * h;
    if (idle_.empty()) area_full_ += h;
    now_ = t;
  }

  void sample(double t) {
    const double h = t - now_;
    rec_.t.push_back(t);
    rec_.X.push_back(x_);
    rec_.Q.push_back(static_cast<std::int64_t>(queue_count_));
    for (std::size_t i = 0; i < rec_.Z.size(); ++i) rec_.Z[i].push_back(pool_busy_[i]);
    rec_.R.push_back(abandonments_);
    rec_.A.push_back(arrivals_count_);
    rec_.delayed.push_back(delayed_);
    rec_.departures.push_back(departures_count_);
    rec_.area_Q.push_back(area_Q_ + static_cast<double>(queue_count_) * h);
    rec_.area_full.push_back(area_full_ + (idle_.empty() ? h : 0.0));
    rec_.events.push_back(events_);
    if (opt_.record_servers)
      for (std::size_t k = 0; k < n_; ++k) rec_.idle.push_back(busy_[k] ? 0 : 1);
  }

  void start_service(std::size_t k, double t, double arrival, bool record_wait) {
    if (!busy_[k]) {
      busy_[k] = 1;
      ++busy_count_;
      ++pool_busy_[pool(k)];
    }
    busy_since_[k] = t;
    departures_.push({t + services_.exponential(sys_.mu[k]), k});
    if (record_wait && opt_.record_waits) rec_.waits.emplace_back(arrival, t - arrival);
  }

  std::size_t pool(std::size_t k) const { return sys_.pool_of.size() == n_ ? sys_.pool_of[k] : 0; }

  void enqueue(double t) {
    const std::uint64_t qid = head_qid_ + queue_.size();
    queue_.push_back({t, false});
    ++queue_count_;
    if (opt_.mode == core::AbandonMode::PerCustomer)
      patience_heap_.push({t + patience_.exponential(cfg_.abandon_rate), qid});
  }

  // Removes and returns the arrival time of the first live customer.
  double pop_head() {
    while (queue_.front().gone) {
      queue_.pop_front();
      ++head_qid_;
    }
    const double a = queue_.front().arrival;
    queue_.pop_front();
    ++head_qid_;
    --queue_count_;
    return a;
  }

  void drop_stale_patience() {
    while (!patience_heap_.empty()) {
      const std::uint64_t qid = patience_heap_.top().second;
      if (qid >= head_qid_ && !queue_[qid - head_qid_].gone) break;
      patience_heap_.pop();
    }
  }

  void reschedule_perturbed(double t) {
    if (opt_.mode != core::AbandonMode::Perturbed) return;
    next_perturbed_ =
        queue_count_ > 0 ? t + patience_.exponential(cfg_.abandon_rate * static_cast<double>(queue_count_)) : kInf;
  }

  void arrival(double t) {
    ++arrivals_count_;
    ++x_;
    next_arrival_ = t + arrivals_.next_gap();
    if (!idle_.empty()) {
      const std::size_t k = idle_.pop();
      if (opt_.check_invariants) check_routing(k);
      start_service(k, t, t, true);
      return;
    }
    ++delayed_;
    enqueue(t);
    if (queue_count_ > opt_.queue_cap) {
      rec_.status = RunStatus::Overflow;
      return;
    }
    reschedule_perturbed(t);
  }

  void departure(double t) {
    const std::size_t k = departures_.top().second;
    departures_.pop();
    ++departures_count_;
    ++rec_.server_departures[k];
    rec_.busy_time[k] += t - busy_since_[k];
    --x_;
    if (queue_count_ > 0) {
      start_service(k, t, pop_head(), true);
      reschedule_perturbed(t);
      return;
    }
    busy_[k] = 0;
    --busy_count_;
    --pool_busy_[pool(k)];
    idle_since_[k] = t;
    idle_.push(k);
  }

  void abandonment(double t) {
    if (opt_.mode == core::AbandonMode::PerCustomer) {
      const std::uint64_t qid = patience_heap_.top().second;
      patience_heap_.pop();
      queue_[qid - head_qid_].gone = true;
      --queue_count_;
      while (!queue_.empty() && queue_.front().gone) {
        queue_.pop_front();
        ++head_qid_;
      }
    } else {
      pop_head();
      reschedule_perturbed(t);
    }
    ++abandonments_;
    --x_;
  }

  void check_routing(std::size_t chosen) const {
    for (std::size_t k = 0; k < n_; ++k) {
      if (busy_[k] || k == chosen) continue;
      if (cfg_.policy == core::Policy::LISF)
        require(idle_since_[chosen] < idle_since_[k] || (idle_since_[chosen] == idle_since_[k] && chosen < k),
                ErrorCode::Domain, "LISF routed to a server that is not the longest idle");
      if (cfg_.policy == core::Policy::FSF)
        require(sys_.mu[chosen] > sys_.mu[k] || (sys_.mu[chosen] == sys_.mu[k] && chosen < k), ErrorCode::Domain,
                "FSF routed to a server that is not the fastest idle");
    }
  }

  void check(double t) const {
    const std::int64_t flow = rec_.initial_X + arrivals_count_ - departures_count_ - abandonments_;
    require(x_ == flow, ErrorCode::Domain, "flow conservation violated at t=" + std::to_string(t));
    require(x_ == static_cast<std::int64_t>(busy_count_ + queue_count_), ErrorCode::Domain,
            "headcount mismatch at t=" + std::to_string(t));
    require(queue_count_ == 0 || idle_.empty(), ErrorCode::Domain,
            "work conservation violated at t=" + std::to_string(t));
    require(static_cast<std::int64_t>(busy_count_) == std::min<std::int64_t>(x_, static_cast<std::int64_t>(n_)),
            ErrorCode::Domain, "busy count differs from min(X, N)");
    require(idle_.size() + busy_count_ == n_, ErrorCode::Domain, "idle pool out of sync");
  }

  const core::SystemConfig& cfg_;
  const core::RealizedSystem& sys_;
  const RunOptions& opt_;
  std::size_t n_;
  core::RngStream root_;
  detail::ArrivalProcess arrivals_;
  core::RngStream services_;
  core::RngStream patience_;
  detail::IdlePool idle_;

  std::vector<std::uint8_t> busy_;
  std::vector<double> busy_since_;
  std::vector<double> idle_since_;
  std::vector<std::int64_t> pool_busy_;
  std::size_t busy_count_ = 0;
  MinHeap departures_;
  MinHeap patience_heap_;
  std::deque<Waiting> queue_;
  std::uint64_t head_qid_ = 0;
  std::size_t queue_count_ = 0;

  double now_ = 0.0;
  double next_arrival_ = kInf;
  double next_perturbed_ = kInf;
  std::int64_t x_ = 0;
  std::int64_t arrivals_count_ = 0;
  std::int64_t departures_count_ = 0;
  std::int64_t abandonments_ = 0;
  std::int64_t delayed_ = 0;
  std::uint64_t events_ = 0;
  double area_Q_ = 0.0;
  double area_full_ = 0.0;

  PathRecord rec_;
};

}  // namespace

PathRecord run(const core::SystemConfig& config, const core::RealizedSystem& system, const RunOptions& options) {
  Engine engine(config, system, options);
  return engine.run();
}

}  // namespace hetq::sim
