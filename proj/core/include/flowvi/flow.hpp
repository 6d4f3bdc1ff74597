#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "flowvi/rng.hpp"

namespace flowvi {

/// Real-NVP shape. One coupling layer is two transitions with the
/// alternating first-half mask; the conditioner is a two-hidden-layer MLP
/// with layer sizes [d_in, H, H, 2*d_out].
struct FlowConfig {
  Eigen::Index dim = 2;                  // D >= 2
  Eigen::Index num_coupling_layers = 10; // K >= 1
  Eigen::Index hidden_units = 32;        // H >= 1
  double leaky_slope = 0.01;
  double init_std = 0.001;
};

/// Slice of the flat parameter vector owned by one transition's conditioner.
/// Weights are stored column-major as (fan_in x fan_out) so a batch forward
/// is X * W; biases follow each weight block.
struct TransitionLayout {
  Eigen::Index d_in = 0, d_out = 0;
  Eigen::Index keep_off = 0;   // column offset of the kept (conditioner input) half
  Eigen::Index trans_off = 0;  // column offset of the transformed half
  Eigen::Index w1 = 0, b1 = 0, w2 = 0, b2 = 0, w3 = 0, b3 = 0;
};

/// Stable bijection between (transition, weight) coordinates and flat
/// parameter indices; optimizer state aligns with it.
class FlowLayout {
 public:
  FlowLayout() = default;
  explicit FlowLayout(const FlowConfig& config);

  Eigen::Index param_count() const { return param_count_; }
  Eigen::Index num_transitions() const { return static_cast<Eigen::Index>(transitions_.size()); }
  const TransitionLayout& transition(Eigen::Index t) const { return transitions_.at(static_cast<std::size_t>(t)); }

  static constexpr const char* version() { return "flowvi-params-v1"; }

 private:
  std::vector<TransitionLayout> transitions_;
  Eigen::Index param_count_ = 0;
};

struct FlowParams {
  FlowConfig config;
  FlowLayout layout;
  Eigen::VectorXd theta;
};

/// All parameters exactly zero: the flow is the identity.
FlowParams make_flow_params(const FlowConfig& config);

/// Every weight and bias ~ N(0, init_std^2); near-identity flow.
FlowParams init_params(const FlowConfig& config, RngState& rng);

struct TransformResult {
  SampleMatrix output;     // S x D
  Eigen::VectorXd log_det; // per-row log |det| of the applied map
};

/// Conditioner outputs (s, t) of one transition; s is tanh-bounded.
std::pair<SampleMatrix, SampleMatrix> conditioner(const FlowParams& params, Eigen::Index transition,
                                                  const SampleMatrix& input);

/// z = T(eps): the 2K transitions in order; log_det is log |det dT/deps|.
TransformResult forward(const FlowParams& params, const SampleMatrix& E);

/// eps = T^{-1}(z); log_det is log |det dT^{-1}/dz| = -log |det dT/deps|.
TransformResult inverse(const FlowParams& params, const SampleMatrix& Z);

/// log q(z) = log N(T^{-1}(z) | 0, I) + log |det dT^{-1}(z)|.
Eigen::VectorXd flow_log_density(const FlowParams& params, const SampleMatrix& Z);

struct FlowSample {
  SampleMatrix z;          // T(eps)
  Eigen::VectorXd log_q;   // from the forward-pass log-det
  SampleMatrix eps;        // base noise, returned so estimators can share it
};

FlowSample sample_flow(const FlowParams& params, RngState& rng, Eigen::Index S);

/// Row-wise log N(0, I) density.
Eigen::VectorXd standard_normal_log_density(const SampleMatrix& E);

/// Flat little-endian float64 parameter file with a JSON sidecar at
/// path + ".json" (dim, layers, hidden units, layout version).
void save_flow_params(const FlowParams& params, const std::string& path);
FlowParams load_flow_params(const std::string& path);

}  // namespace flowvi
