#pragma once

#include <cmath>
#include <vector>

#include "ddf/error.hpp"

namespace ddf {

/// Distribution over a finite category set (the region variable R).
class DiscreteDist {
 public:
  explicit DiscreteDist(std::vector<double> probs) : probs_(std::move(probs)) {
    if (probs_.empty()) throw DimensionError("DiscreteDist: empty support");
    double sum = 0.0;
    for (double p : probs_) {
      if (!(p >= 0.0) || !std::isfinite(p))
        throw NumericalError("DiscreteDist: probabilities must be finite and nonnegative");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw NumericalError("DiscreteDist: probabilities do not sum to 1");
    for (double& p : probs_) p /= sum;
  }

  int size() const { return static_cast<int>(probs_.size()); }
  double prob(int r) const { return probs_[static_cast<size_t>(r)]; }
  const std::vector<double>& probs() const { return probs_; }

 private:
  std::vector<double> probs_;
};

}  // namespace ddf
