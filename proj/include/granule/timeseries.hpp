#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "granule/errors.hpp"

namespace granule {

/// Piecewise-linear scalar function of time. Constant extrapolation outside
/// the sample range, so it is evaluable for any t >= 0.
class TimeSeries {
 public:
  TimeSeries() = default;

  /// Constant-in-time series.
  explicit TimeSeries(double value) : times_{0.0}, values_{value} {}

  TimeSeries(std::vector<double> times, std::vector<double> values)
      : times_(std::move(times)), values_(std::move(values)) {
    if (times_.empty() || times_.size() != values_.size())
      throw ConfigError("time series needs matching, non-empty sample arrays");
    for (std::size_t i = 1; i < times_.size(); ++i)
      if (times_[i] <= times_[i - 1])
        throw ConfigError("time series sample times must be strictly increasing");
  }

  double operator()(double t) const {
    if (times_.size() == 1 || t <= times_.front()) return values_.front();
    if (t >= times_.back()) return values_.back();
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    std::size_t i = static_cast<std::size_t>(it - times_.begin());
    double w = (t - times_[i - 1]) / (times_[i] - times_[i - 1]);
    return values_[i - 1] + w * (values_[i] - values_[i - 1]);
  }

  bool constant() const { return times_.size() == 1; }

  double max_over(double t_begin, double t_end) const {
    double m = std::max((*this)(t_begin), (*this)(t_end));
    for (std::size_t i = 0; i < times_.size(); ++i)
      if (times_[i] > t_begin && times_[i] < t_end) m = std::max(m, values_[i]);
    return m;
  }

  double min_over(double t_begin, double t_end) const {
    double m = std::min((*this)(t_begin), (*this)(t_end));
    for (std::size_t i = 0; i < times_.size(); ++i)
      if (times_[i] > t_begin && times_[i] < t_end) m = std::min(m, values_[i]);
    return m;
  }

  const std::vector<double>& times() const { return times_; }
  const std::vector<double>& values() const { return values_; }

 private:
  std::vector<double> times_{0.0};
  std::vector<double> values_{0.0};
};

}  // namespace granule
