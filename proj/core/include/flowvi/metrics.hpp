#pragma once

#include <optional>

#include <Eigen/Core>

#include "flowvi/rng.hpp"
#include "flowvi/targets.hpp"

namespace flowvi {

struct MetricReport {
  double value = 0.0;
  Eigen::Index sample_size_a = 0;
  Eigen::Index sample_size_b = 0;
  std::optional<double> baseline;  // two-independent-exact-sets value at the same size
};

/// Average over coordinates of the 1D Wasserstein-1 distance between the
/// column-wise sorted samples: (1/d) sum_j (1/S) sum_i |A#_ij - B#_ij|.
/// Requires equal shapes; columns are processed one at a time.
double marginal_wasserstein(const SampleMatrix& A, const SampleMatrix& B);

/// Exact 1D optimal transport cost (mean absolute-difference ground cost)
/// solved as an assignment problem, independent of the sorting shortcut it
/// certifies. Test-scale only: lengths up to 256.
double w1_1d_oracle(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// Marginal-Wasserstein between two independent exact sample sets of size S;
/// the ideal-performance floor for this target at this sample size.
double baseline_value(const Target& target, RngState& rng, Eigen::Index S);

/// Seeded uniform row subsample without replacement.
SampleMatrix subsample_rows(const SampleMatrix& m, Eigen::Index n, RngState& rng);

/// Metric with unequal sample counts resolved by seeded subsampling of the
/// larger set down to the smaller.
MetricReport marginal_wasserstein_equalized(const SampleMatrix& A, const SampleMatrix& B, RngState rng);

}  // namespace flowvi
