#include "flowvi/optim.hpp"

#include <cmath>
#include <stdexcept>

#include "flowvi/io.hpp"
#include "flowvi/metrics.hpp"
#include "flowvi/objectives.hpp"

namespace flowvi {

namespace {

// rng stream labels within one run
constexpr std::uint64_t kInitStream = 0;
constexpr std::uint64_t kBatchStream = 1;
constexpr std::uint64_t kEvalStream = 2;

long ceil_div(long num, long den) { return (num + den - 1) / den; }

}  // namespace

double schedule_lr(const Schedule& schedule, long t) {
  if (t < 0 || t >= schedule.total_iters)
    throw std::invalid_argument("schedule_lr: iteration outside [0, total_iters)");
  if (schedule.kind == ScheduleKind::Constant) return schedule.base_lr;
  const long half = ceil_div(schedule.total_iters, 2);
  const long three_quarters = ceil_div(3 * schedule.total_iters, 4);
  if (t < half) return schedule.base_lr;
  if (t < three_quarters) return schedule.base_lr / 10.0;
  return schedule.base_lr / 100.0;
}

void adam_step(AdamState& state, Eigen::VectorXd& params, const Eigen::VectorXd& grad, double lr) {
  if (grad.size() != params.size() || state.m.size() != params.size())
    throw std::invalid_argument("adam_step: size mismatch");
  state.t += 1;
  state.m = state.beta1 * state.m + (1.0 - state.beta1) * grad;
  state.v = state.beta2 * state.v + (1.0 - state.beta2) * grad.cwiseAbs2();
  const double m_corr = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double v_corr = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  params.array() -=
      lr * (state.m.array() / m_corr) / ((state.v.array() / v_corr).sqrt() + state.eps);
}

TrainResult train(const ExperimentConfig& config, const Target& target, RngState rng,
                  const EvalContext* eval) {
  config.validate();
  if (config.flow.dim != target.dim())
    throw std::invalid_argument("train: flow dimension must match the target dimension");

  RngState init_rng = rng.split(kInitStream);
  const RngState batch_root = rng.split(kBatchStream);
  const RngState eval_root = rng.split(kEvalStream);

  TrainResult result;
  result.final_params = init_params(config.flow, init_rng);
  AdamState adam(result.final_params.layout.param_count());

  auto evaluate_checkpoint = [&](long iteration) {
    if (!eval || !eval->reference) return;
    RngState eval_rng = eval_root.split(static_cast<std::uint64_t>(iteration));
    const FlowSample draws = sample_flow(result.final_params, eval_rng, eval->eval_sample_size);
    const double value = marginal_wasserstein(draws.z, *eval->reference);
    result.metric_checkpoints.push_back({iteration, value});
  };

  std::size_t next_checkpoint = 0;
  for (long t = 0; t < config.iterations; ++t) {
    if (next_checkpoint < config.checkpoint_iters.size() && config.checkpoint_iters[next_checkpoint] == t) {
      evaluate_checkpoint(t);
      ++next_checkpoint;
    }

    RngState iter_rng = batch_root.split(static_cast<std::uint64_t>(t));
    GradientEstimate estimate;
    if (config.objective == Objective::ForwardKL) {
      const SampleMatrix batch = target.exact_sample(iter_rng, config.batch_size);
      estimate = forward_kl_loss_and_grad(result.final_params, batch);
    } else {
      const SampleMatrix noise = standard_normal_matrix(iter_rng, config.batch_size, config.flow.dim);
      estimate = (config.estimator == Estimator::STL)
                     ? grad_stl(result.final_params, target, noise)
                     : grad_total(result.final_params, target, noise);
    }

    if (!estimate.finite()) {
      result.diverged_at = t;  // parameters from the last finite iteration are kept
      return result;
    }

    const double lr = schedule_lr(config.schedule, t);
    const Eigen::VectorXd descent = -estimate.grad;
    adam_step(adam, result.final_params.theta, descent, lr);
    result.objective_trace.push_back(estimate.objective_value);
  }

  if (next_checkpoint < config.checkpoint_iters.size() &&
      config.checkpoint_iters[next_checkpoint] == config.iterations) {
    evaluate_checkpoint(config.iterations);
  }
  return result;
}

void save_checkpoint(const FlowParams& params, const AdamState& adam, const std::string& path) {
  const Eigen::Index P = params.layout.param_count();
  SampleMatrix packed(P, 3);
  packed.col(0) = params.theta;
  packed.col(1) = adam.m;
  packed.col(2) = adam.v;
  io::MatrixFileMeta meta;
  meta.kind = "checkpoint";
  meta.extra["dim"] = std::to_string(params.config.dim);
  meta.extra["coupling_layers"] = std::to_string(params.config.num_coupling_layers);
  meta.extra["hidden_units"] = std::to_string(params.config.hidden_units);
  meta.extra["param_layout"] = FlowLayout::version();
  meta.extra["adam_t"] = std::to_string(adam.t);
  io::write_matrix_file(path, packed, meta);
}

std::pair<FlowParams, AdamState> load_checkpoint(const std::string& path) {
  io::MatrixFileMeta meta;
  const SampleMatrix m = io::read_matrix_file(path, &meta);
  if (meta.kind != "checkpoint") throw std::runtime_error("load_checkpoint: not a checkpoint file: " + path);
  if (meta.extra.at("param_layout") != FlowLayout::version())
    throw std::runtime_error("load_checkpoint: incompatible parameter layout in " + path);
  FlowConfig config;
  config.dim = std::stol(meta.extra.at("dim"));
  config.num_coupling_layers = std::stol(meta.extra.at("coupling_layers"));
  config.hidden_units = std::stol(meta.extra.at("hidden_units"));
  FlowParams p = make_flow_params(config);
  if (m.rows() != p.layout.param_count() || m.cols() != 3)
    throw std::runtime_error("load_checkpoint: shape mismatch in " + path);
  p.theta = m.col(0);
  AdamState adam(p.layout.param_count());
  adam.m = m.col(1);
  adam.v = m.col(2);
  adam.t = std::stol(meta.extra.at("adam_t"));
  return {std::move(p), std::move(adam)};
}

}  // namespace flowvi
