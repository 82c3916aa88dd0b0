#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mfl {

struct Estimate {
  double value = 0.0;
  double stderr_ = 0.0;
};

// Fixed-order pairwise summation. The reduction order only depends on the
// length of the input, which keeps results independent of thread count.
double pairwise_sum(std::span<const double> xs);

double mean(std::span<const double> xs);

// Sample variance with denominator n-1.
double variance(std::span<const double> xs);

// Mean with standard error from nonoverlapping batch means. Falls back to the
// iid standard error when there are fewer samples than batches.
Estimate batch_means(std::span<const double> xs, std::size_t n_batches = 32);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

LinearFit least_squares(std::span<const double> x, std::span<const double> y);

}  // namespace mfl
