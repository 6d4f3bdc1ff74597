#pragma once

#include <Eigen/Core>

#include "flowvi/targets.hpp"

namespace flowvi {

struct ScoreResult {
  SampleMatrix grad_z;  // S x d, row i is the gradient of log p at row i of Z
};

/// Analytic gradient of the target log density with respect to z, row-wise.
/// Finite wherever the log density is finite.
ScoreResult score(const Target& target, const SampleMatrix& Z);

}  // namespace flowvi
