#pragma once

#include <functional>

#include <Eigen/Core>

#include "flowvi/flow.hpp"
#include "flowvi/targets.hpp"

namespace flowvi {

enum class Estimator { TotalGradient, STL, ForwardKL };

struct GradientEstimate {
  /// The maximized objective: the ELBO estimate for the reverse-KL
  /// estimators, the negative cross-entropy -mean(log q) is the loss for
  /// ForwardKL so objective_value holds mean(log q).
  double objective_value = 0.0;
  /// Ascent gradient of objective_value, aligned with FlowParams flat
  /// indexing.
  Eigen::VectorXd grad;
  Estimator estimator = Estimator::TotalGradient;
  Eigen::Index batch_size = 0;

  /// False when the value or any gradient entry is non-finite; such
  /// estimates mark the run as diverged and are never applied.
  bool finite() const;
};

/// Monte Carlo ELBO over base noise E: mean of log p(T(eps)) - log q(T(eps)),
/// with log q taken from the forward-pass log-det. Non-finite target rows
/// propagate to the estimate.
double elbo_estimate(const FlowParams& params, const Target& target, const SampleMatrix& E);

/// ELBO with the density-evaluation parameters frozen: the sampling path
/// T uses `params`, the density log q uses `density_params` through the
/// inverse pass. grad_stl is the gradient of this function in its first
/// argument at density_params = params.
double elbo_frozen_density(const FlowParams& params, const FlowParams& density_params, const Target& target,
                           const SampleMatrix& E);

/// Full reparameterization gradient of the ELBO, including the entropy path
/// through log q.
GradientEstimate grad_total(const FlowParams& params, const Target& target, const SampleMatrix& E);

/// Sticking-the-landing gradient: forward pass with live parameters, density
/// evaluated through the inverse pass with parameters held constant.
GradientEstimate grad_stl(const FlowParams& params, const Target& target, const SampleMatrix& E);

/// Exact-sample forward KL: loss = -mean(log q(X)); the returned
/// objective_value is -loss and grad is its ascent gradient.
GradientEstimate forward_kl_loss_and_grad(const FlowParams& params, const SampleMatrix& X);

/// Central finite differences per coordinate; the oracle gradient code is
/// certified against. The closure must be deterministic in the parameters.
Eigen::VectorXd finite_difference_grad(const Eigen::VectorXd& params,
                                       const std::function<double(const Eigen::VectorXd&)>& objective,
                                       double step);

/// Per-sample gradient statistics over a batch (no 1/S averaging inside the
/// per-sample gradients).
struct PerSampleGradStats {
  Eigen::VectorXd mean;
  double covariance_trace = 0.0;  // unbiased trace of the per-sample gradient covariance
  double max_abs_entry = 0.0;     // largest |entry| over all per-sample gradients
  Eigen::Index count = 0;
};
PerSampleGradStats per_sample_grad_stats(Estimator estimator, const FlowParams& params, const Target& target,
                                         const SampleMatrix& E);

/// Mean and unbiased per-coordinate variance of the per-sample difference
/// (STL - total) on shared noise.
struct PairedDiffStats {
  Eigen::VectorXd mean_diff;
  Eigen::VectorXd var_diff;
  Eigen::Index count = 0;
};
PairedDiffStats stl_total_paired_stats(const FlowParams& params, const Target& target, const SampleMatrix& E);

}  // namespace flowvi
