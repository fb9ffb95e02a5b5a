#pragma once

#include <cmath>
#include <cstddef>

namespace jppo {

// Welford's running mean and variance.
struct RunningStats {
  std::size_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++count;
    const double delta = x - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (x - mean);
  }
  double sample_variance() const { return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0; }
  double standard_error() const {
    return count > 1 ? std::sqrt(sample_variance() / static_cast<double>(count)) : 0.0;
  }
};

}  // namespace jppo
