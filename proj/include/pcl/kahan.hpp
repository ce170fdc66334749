#pragma once

#include <cmath>

namespace pcl {

// Neumaier-compensated accumulator. Long sieve sums mix magnitudes badly
// (weights ~1e2 against corrections ~1e-10); plain doubles are not enough
// for the determinism guarantees the reports make.
class Kahan {
 public:
  void add(double x) {
    double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }

  // Merge another accumulator; order-sensitive, callers reduce in a fixed order.
  void merge(const Kahan& o) {
    add(o.sum_);
    add(o.comp_);
  }

  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace pcl
