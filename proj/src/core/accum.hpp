#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace jdim {

// Streaming accumulator for sum_branches mult * exp(-t * L) over a t grid.
// Uniform grids get a two-exp recurrence per branch while exponents stay in
// range; otherwise (or once anything overflows) a shifted log-sum-exp.
class GridAccum {
 public:
  explicit GridAccum(std::span<const double> ts) : ts_(ts.begin(), ts.end()) {
    shift_.assign(ts_.size(), 0.0);
    sum_.assign(ts_.size(), 0.0);
    uniform_ = ts_.size() >= 2;
    if (uniform_) {
      dt_ = ts_[1] - ts_[0];
      for (std::size_t k = 1; k + 1 < ts_.size(); ++k)
        if (std::abs((ts_[k + 1] - ts_[k]) - dt_) > 1e-12) uniform_ = false;
      if (!(dt_ > 0.0)) uniform_ = false;
    }
  }

  void add(double log_weight, double multiplicity) {
    constexpr double kInf = std::numeric_limits<double>::infinity();
    count_ += multiplicity;
    if (log_weight == -kInf) {
      infinite_ = true;
      return;
    }
    double x0 = -ts_.front() * log_weight;
    double x_last = -ts_.back() * log_weight;
    if (uniform_ && !safe_mode_ && std::abs(x0) < 600.0 &&
        std::abs(x_last) < 600.0) {
      double v = multiplicity * std::exp(x0);
      double r = std::exp(-dt_ * log_weight);
      for (std::size_t k = 0; k < ts_.size(); ++k) {
        sum_[k] += v;
        v *= r;
      }
      return;
    }
    safe_mode_ = true;
    for (std::size_t k = 0; k < ts_.size(); ++k) {
      double x = -ts_[k] * log_weight;
      if (x > shift_[k]) {
        sum_[k] *= std::exp(shift_[k] - x);
        shift_[k] = x;
      }
      sum_[k] += multiplicity * std::exp(x - shift_[k]);
    }
  }

  void merge(const GridAccum& o) {
    count_ += o.count_;
    infinite_ |= o.infinite_;
    if (o.safe_mode_) safe_mode_ = true;
    for (std::size_t k = 0; k < ts_.size(); ++k) {
      double os = o.sum_[k];
      if (os == 0.0) continue;
      double osh = o.shift_[k];
      if (!safe_mode_) {
        sum_[k] += os * (osh == 0.0 ? 1.0 : std::exp(osh));
        continue;
      }
      if (osh > shift_[k]) {
        sum_[k] *= std::exp(shift_[k] - osh);
        shift_[k] = osh;
      }
      sum_[k] += os * std::exp(osh - shift_[k]);
    }
  }

  double count() const { return count_; }
  bool infinite() const { return infinite_; }

  // (1/n) log of the accumulated sum.
  double value(std::size_t k, int n) const {
    constexpr double kInf = std::numeric_limits<double>::infinity();
    if (infinite_) return kInf;
    if (sum_[k] == 0.0) return -kInf;
    return (std::log(sum_[k]) + shift_[k]) / n;
  }

 private:
  std::vector<double> ts_;
  std::vector<double> shift_;
  std::vector<double> sum_;
  double dt_ = 0.0;
  bool uniform_ = false;
  bool safe_mode_ = false;
  double count_ = 0.0;
  bool infinite_ = false;
};

}  // namespace jdim
