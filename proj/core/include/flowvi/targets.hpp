#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "flowvi/rng.hpp"

namespace flowvi {

enum class TargetKind { IllConditionedGaussian, Banana, Funnel, Funana, StudentT };

struct TargetSpec {
  TargetKind kind = TargetKind::Funnel;
  Eigen::Index dim = 2;
  double nu = 2.5;                      // StudentT only
  std::uint64_t construction_seed = 0;  // IllConditionedGaussian only
};

/// A named density with batched log-density evaluation and an exact sampler.
/// Immutable after construction; safe for concurrent reads.
class Target {
 public:
  const TargetSpec& spec() const { return spec_; }
  TargetKind kind() const { return spec_.kind; }
  Eigen::Index dim() const { return spec_.dim; }

  /// Row-wise log density; -inf in genuinely zero-density tails, never NaN
  /// for finite input.
  Eigen::VectorXd log_density(const SampleMatrix& Z) const;

  /// S i.i.d. draws by ancestral sampling of the generative equations.
  SampleMatrix exact_sample(RngState& rng, Eigen::Index S) const;

  // Gaussian internals (IllConditionedGaussian only).
  const Eigen::MatrixXd& covariance() const;
  const Eigen::LLT<Eigen::MatrixXd>& covariance_llt() const;
  double log_det_covariance() const;

  /// Gaussian with identity covariance (unit-eigenvalue stub of the
  /// ill-conditioned construction); used wherever an exactly-normal target
  /// is needed.
  static Target standard_gaussian(Eigen::Index dim);

 private:
  friend Target build_target(const TargetSpec& spec);

  TargetSpec spec_;
  // IllConditionedGaussian caches.
  Eigen::MatrixXd sigma_;
  Eigen::LLT<Eigen::MatrixXd> sigma_llt_;
  double log_det_sigma_ = 0.0;
  // StudentT cache.
  double t_log_norm_ = 0.0;
};

Target build_target(const TargetSpec& spec);

/// Registry names: "icg", "banana", "funnel", "funana", "student_t_1_5",
/// "student_t_2_5", each with a dimension suffix, e.g. "funnel-10".
TargetSpec parse_target_name(const std::string& name, std::uint64_t construction_seed = 0);
Target build_target_by_name(const std::string& name, std::uint64_t construction_seed = 0);
std::vector<std::string> target_base_names();

}  // namespace flowvi
