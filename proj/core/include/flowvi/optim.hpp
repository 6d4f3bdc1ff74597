#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "flowvi/config.hpp"
#include "flowvi/targets.hpp"

namespace flowvi {

struct AdamState {
  Eigen::VectorXd m, v;
  long t = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  explicit AdamState(Eigen::Index param_count)
      : m(Eigen::VectorXd::Zero(param_count)), v(Eigen::VectorXd::Zero(param_count)) {}
};

/// Step size at iteration t in [0, total_iters). The decayed schedule drops
/// by 10x at ceil(total/2) and again at ceil(3*total/4).
double schedule_lr(const Schedule& schedule, long t);

/// Standard Adam descent update with bias correction; `grad` is the gradient
/// of the quantity being minimized.
void adam_step(AdamState& state, Eigen::VectorXd& params, const Eigen::VectorXd& grad, double lr);

struct MetricCheckpoint {
  long iteration = 0;
  double value = 0.0;
};

struct TrainResult {
  FlowParams final_params;
  std::vector<double> objective_trace;  // per finite iteration, the maximized objective
  std::optional<long> diverged_at;
  std::vector<MetricCheckpoint> metric_checkpoints;
};

/// Optional per-checkpoint evaluation: fresh flow samples are scored with the
/// marginal-Wasserstein metric against `reference` (already cut to the
/// evaluation sample count).
struct EvalContext {
  const SampleMatrix* reference = nullptr;
  Eigen::Index eval_sample_size = 0;
};

/// Runs the training loop: per iteration a fresh batch (base noise for
/// reverse KL, exact target samples for forward KL) from a per-iteration rng
/// split, one gradient estimate, and one Adam update at the scheduled step
/// size. A non-finite estimate sets diverged_at and stops; the parameters of
/// the last finite iteration are kept. Divergence is a recorded outcome, not
/// an exception.
TrainResult train(const ExperimentConfig& config, const Target& target, RngState rng,
                  const EvalContext* eval = nullptr);

/// Parameters plus Adam moments in one flat float64 file with a sidecar.
void save_checkpoint(const FlowParams& params, const AdamState& adam, const std::string& path);
std::pair<FlowParams, AdamState> load_checkpoint(const std::string& path);

}  // namespace flowvi
