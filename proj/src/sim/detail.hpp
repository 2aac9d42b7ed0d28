#pragma once

#include <cmath>
#include <cstddef>
#include <deque>
#include <limits>
#include <queue>
#include <utility>
#include <vector>

#include "hetq/core/config.hpp"
#include "hetq/core/random.hpp"
#include "hetq/error.hpp"

namespace hetq::sim::detail {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Renewal arrivals with rate lambda and squared coefficient of variation c2:
/// deterministic (c2 = 0), shifted exponential (c2 < 1), exponential (c2 = 1)
/// or balanced-means two-phase hyperexponential (c2 > 1).
class ArrivalProcess {
 public:
  ArrivalProcess(double lambda, double c2, core::RngStream stream) : lambda_(lambda), stream_(stream) {
    require(c2 >= 0.0, ErrorCode::ConfigError, "arrival_scv must be >= 0");
    if (lambda <= 0.0) return;
    if (c2 < 1.0) {
      const double sd = std::sqrt(c2) / lambda;
      shift_ = 1.0 / lambda - sd;
      rate1_ = sd > 0.0 ? 1.0 / sd : kInf;
    } else if (c2 > 1.0) {
      p1_ = 0.5 * (1.0 + std::sqrt((c2 - 1.0) / (c2 + 1.0)));
      rate1_ = 2.0 * p1_ * lambda;
      rate2_ = 2.0 * (1.0 - p1_) * lambda;
    } else {
      rate1_ = lambda;
    }
  }

  double next_gap() {
    if (lambda_ <= 0.0) return kInf;
    if (p1_ < 1.0) return stream_.uniform() < p1_ ? stream_.exponential(rate1_) : stream_.exponential(rate2_);
    if (std::isinf(rate1_)) return shift_;
    return shift_ + stream_.exponential(rate1_);
  }

 private:
  double lambda_;
  core::RngStream stream_;
  double shift_ = 0.0;
  double rate1_ = 0.0;
  double rate2_ = 0.0;
  double p1_ = 1.0;
};

/// Idle servers under a routing policy. Only the routed server ever leaves,
/// so LISF is a FIFO (idle_since is nondecreasing in insertion order), FSF a
/// max-heap on (rate, -index) and RANDOM an unordered vector.
class IdlePool {
 public:
  IdlePool(core::Policy policy, const std::vector<double>& rates, core::RngStream stream)
      : policy_(policy), rates_(&rates), stream_(stream) {}

  bool empty() const { return size_ == 0; }
  std::size_t size() const { return size_; }

  void push(std::size_t k) {
    ++size_;
    switch (policy_) {
      case core::Policy::LISF: fifo_.push_back(k); break;
      case core::Policy::FSF: heap_.push({(*rates_)[k], -static_cast<long long>(k)}); break;
      case core::Policy::Random: pool_.push_back(k); break;
    }
  }

  std::size_t pop() {
    --size_;
    switch (policy_) {
      case core::Policy::LISF: {
        const std::size_t k = fifo_.front();
        fifo_.pop_front();
        return k;
      }
      case core::Policy::FSF: {
        const auto top = heap_.top();
        heap_.pop();
        return static_cast<std::size_t>(-top.second);
      }
      case core::Policy::Random: {
        const auto i = static_cast<std::size_t>(stream_.below(pool_.size()));
        const std::size_t k = pool_[i];
        pool_[i] = pool_.back();
        pool_.pop_back();
        return k;
      }
    }
    return 0;
  }

 private:
  core::Policy policy_;
  const std::vector<double>* rates_;
  core::RngStream stream_;
  std::size_t size_ = 0;
  std::deque<std::size_t> fifo_;
  std::priority_queue<std::pair<double, long long>> heap_;
  std::vector<std::size_t> pool_;
};

}  // namespace hetq::sim::detail
