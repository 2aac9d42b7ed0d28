#include "hetq/core/rate_distribution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "hetq/core/text.hpp"
#include "hetq/error.hpp"

namespace hetq::core {

namespace {

void check_rate(double x, const char* what) {
  require(std::isfinite(x) && x > 0.0, ErrorCode::ConfigError,
          std::string("rate distribution: ") + what + " must be a positive finite rate");
}

}  // namespace

RateDistribution::RateDistribution(Kind kind, double lo, double hi, std::vector<Atom> atoms)
    : kind_(kind), lo_(lo), hi_(hi), atoms_(std::move(atoms)) {
  switch (kind_) {
    case Kind::Uniform:
      mean_ = 0.5 * (lo_ + hi_);
      second_ = (lo_ * lo_ + lo_ * hi_ + hi_ * hi_) / 3.0;
      break;
    case Kind::Point:
      mean_ = lo_;
      second_ = lo_ * lo_;
      break;
    case Kind::Discrete: {
      double acc = 0.0;
      for (const auto& a : atoms_) {
        mean_ += a.probability * a.rate;
        second_ += a.probability * a.rate * a.rate;
        acc += a.probability;
        cumulative_.push_back(acc);
      }
      break;
    }
  }
}

RateDistribution RateDistribution::uniform(double lo, double hi) {
  check_rate(lo, "uniform lower bound");
  check_rate(hi, "uniform upper bound");
  require(lo < hi, ErrorCode::ConfigError, "rate distribution: uniform requires lo < hi");
  return RateDistribution(Kind::Uniform, lo, hi, {});
}

RateDistribution RateDistribution::point(double rate) {
  check_rate(rate, "point rate");
  return RateDistribution(Kind::Point, rate, rate, {});
}

RateDistribution RateDistribution::discrete(std::vector<Atom> atoms) {
  require(!atoms.empty(), ErrorCode::ConfigError, "rate distribution: discrete law needs atoms");
  std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.rate < b.rate; });
  double total = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    check_rate(atoms[i].rate, "atom");
    require(std::isfinite(atoms[i].probability) && atoms[i].probability > 0.0, ErrorCode::ConfigError,
            "rate distribution: atom probabilities must be positive");
    require(i == 0 || atoms[i].rate > atoms[i - 1].rate, ErrorCode::ConfigError,
            "rate distribution: duplicate atom rate");
    total += atoms[i].probability;
  }
  require(std::abs(total - 1.0) <= 1e-12, ErrorCode::ConfigError,
          "rate distribution: atom probabilities must sum to 1");
  const double lo = atoms.front().rate;
  const double hi = atoms.back().rate;
  if (atoms.size() == 1) return RateDistribution(Kind::Point, lo, hi, {});
  return RateDistribution(Kind::Discrete, lo, hi, std::move(atoms));
}

RateDistribution RateDistribution::parse(const std::string& text) {
  const std::string s = strip(text);
  const auto open = s.find('(');
  const auto close = s.rfind(')');
  require(open != std::string::npos && close == s.size() - 1 && close > open, ErrorCode::ConfigError,
          "rate distribution: cannot parse '" + text + "'");
  const std::string name = strip(s.substr(0, open));
  const auto args = split(s.substr(open + 1, close - open - 1), ',');
  if (name == "uniform") {
    require(args.size() == 2, ErrorCode::ConfigError, "rate distribution: uniform(lo,hi) takes two values");
    return uniform(parse_double(args[0], "rates"), parse_double(args[1], "rates"));
  }
  if (name == "point") {
    require(args.size() == 1, ErrorCode::ConfigError, "rate distribution: point(x) takes one value");
    return point(parse_double(args[0], "rates"));
  }
  if (name == "discrete") {
    std::vector<Atom> atoms;
    for (const auto& arg : args) {
      const auto parts = split(arg, ':');
      require(parts.size() == 2, ErrorCode::ConfigError, "rate distribution: discrete atoms are rate:prob");
      atoms.push_back({parse_double(parts[0], "rates"), parse_double(parts[1], "rates")});
    }
    return discrete(std::move(atoms));
  }
  fail(ErrorCode::ConfigError, "rate distribution: unknown law '" + name + "'");
}

double RateDistribution::mass(double a, double b) const {
  if (b < a) return 0.0;
  switch (kind_) {
    case Kind::Point:
      return (lo_ >= a && lo_ <= b) ? 1.0 : 0.0;
    case Kind::Uniform: {
      const double l = std::max(a, lo_), h = std::min(b, hi_);
      return h > l ? (h - l) / (hi_ - lo_) : 0.0;
    }
    case Kind::Discrete: {
      double m = 0.0;
      for (const auto& atom : atoms_)
        if (atom.rate >= a && atom.rate <= b) m += atom.probability;
      return m;
    }
  }
  return 0.0;
}

double RateDistribution::first_moment(double a, double b) const {
  if (b < a) return 0.0;
  switch (kind_) {
    case Kind::Point:
      return (lo_ >= a && lo_ <= b) ? lo_ : 0.0;
    case Kind::Uniform: {
      const double l = std::max(a, lo_), h = std::min(b, hi_);
      return h > l ? 0.5 * (h * h - l * l) / (hi_ - lo_) : 0.0;
    }
    case Kind::Discrete: {
      double m = 0.0;
      for (const auto& atom : atoms_)
        if (atom.rate >= a && atom.rate <= b) m += atom.probability * atom.rate;
      return m;
    }
  }
  return 0.0;
}

double RateDistribution::sample(RngStream& stream) const {
  switch (kind_) {
    case Kind::Point:
      return lo_;
    case Kind::Uniform:
      return stream.uniform(lo_, hi_);
    case Kind::Discrete: {
      const double u = stream.uniform() * cumulative_.back();
      const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
      const auto idx = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()), atoms_.size() - 1);
      return atoms_[idx].rate;
    }
  }
  return lo_;
}

std::string RateDistribution::to_string() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind_) {
    case Kind::Point:
      os << "point(" << lo_ << ")";
      break;
    case Kind::Uniform:
      os << "uniform(" << lo_ << "," << hi_ << ")";
      break;
    case Kind::Discrete:
      os << "discrete(";
      for (std::size_t i = 0; i < atoms_.size(); ++i)
        os << (i ? "," : "") << atoms_[i].rate << ":" << atoms_[i].probability;
      os << ")";
      break;
  }
  return os.str();
}

RateMoments rate_moments(const RateDistribution& dist) {
  const double mean = dist.mean();
  double var = 0.0;
  switch (dist.kind()) {
    case RateDistribution::Kind::Point:
      break;
    case RateDistribution::Kind::Uniform: {
      const double w = dist.upper() - dist.lower();
      var = w * w / 12.0;
      break;
    }
    case RateDistribution::Kind::Discrete:
      for (const auto& a : dist.atoms()) var += a.probability * (a.rate - mean) * (a.rate - mean);
      break;
  }
  return {mean, var, mean * mean + var, mean + var / mean, dist.lower()};
}

std::vector<double> sample_rates(const RateDistribution& dist, std::size_t n, RngStream& stream) {
  std::vector<double> rates(n);
  for (auto& mu : rates) mu = dist.sample(stream);
  return rates;
}

}  // namespace hetq::core
