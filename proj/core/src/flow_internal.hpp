#pragma once

// Shared between the flow transforms and the gradient engine; not installed.

#include <Eigen/Core>

#include "flowvi/flow.hpp"

namespace flowvi::internal {

struct ConstViews {
  Eigen::Map<const Eigen::MatrixXd> w1, w2, w3;
  Eigen::Map<const Eigen::RowVectorXd> b1, b2, b3;
};

struct GradViews {
  Eigen::Map<Eigen::MatrixXd> w1, w2, w3;
  Eigen::Map<Eigen::RowVectorXd> b1, b2, b3;
};

inline ConstViews transition_views(const FlowParams& p, Eigen::Index t) {
  const TransitionLayout& tl = p.layout.transition(t);
  const Eigen::Index h = p.config.hidden_units;
  const double* base = p.theta.data();
  return ConstViews{
      {base + tl.w1, tl.d_in, h}, {base + tl.w2, h, h}, {base + tl.w3, h, 2 * tl.d_out},
      {base + tl.b1, h},          {base + tl.b2, h},    {base + tl.b3, 2 * tl.d_out}};
}

inline GradViews grad_views(const FlowParams& p, Eigen::VectorXd& g, Eigen::Index t) {
  const TransitionLayout& tl = p.layout.transition(t);
  const Eigen::Index h = p.config.hidden_units;
  double* base = g.data();
  return GradViews{
      {base + tl.w1, tl.d_in, h}, {base + tl.w2, h, h}, {base + tl.w3, h, 2 * tl.d_out},
      {base + tl.b1, h},          {base + tl.b2, h},    {base + tl.b3, 2 * tl.d_out}};
}

/// One transition's conditioner activations for a row block.
struct MlpCache {
  Eigen::MatrixXd h1, h2;      // post-activation hidden layers (B x H)
  Eigen::MatrixXd a3;          // output pre-activation (B x 2*d_out)
  Eigen::MatrixXd s, t, exp_s; // B x d_out
};

/// Backward-pass scratch reused across transitions.
struct MlpScratch {
  Eigen::MatrixXd a3_bar, h_bar, a_bar;
};

inline void leaky_relu_inplace(Eigen::MatrixXd& m, double slope) {
  m.array() = m.array().max(0.0) + slope * m.array().min(0.0);
}

// dst = src scaled by the leaky-ReLU derivative, whose mask is recovered from
// the post-activation sign (slope > 0 preserves it). Single fused pass.
inline void apply_leaky_grad(Eigen::MatrixXd& dst, const Eigen::MatrixXd& src,
                             const Eigen::MatrixXd& post, double slope) {
  dst.resize(src.rows(), src.cols());
  dst.array() = src.array() * (slope + (1.0 - slope) * (post.array() > 0.0).cast<double>());
}

inline void mlp_forward(const FlowParams& p, Eigen::Index t, const Eigen::Ref<const Eigen::MatrixXd>& x,
                        MlpCache& c) {
  const ConstViews v = transition_views(p, t);
  const TransitionLayout& tl = p.layout.transition(t);
  const double slope = p.config.leaky_slope;
  c.h1.noalias() = x * v.w1;
  c.h1.rowwise() += v.b1;
  leaky_relu_inplace(c.h1, slope);
  c.h2.noalias() = c.h1 * v.w2;
  c.h2.rowwise() += v.b2;
  leaky_relu_inplace(c.h2, slope);
  c.a3.noalias() = c.h2 * v.w3;
  c.a3.rowwise() += v.b3;
  c.s = c.a3.leftCols(tl.d_out).array().tanh();
  c.t = c.a3.rightCols(tl.d_out);
  c.exp_s = c.s.array().exp();
}

/// Backprop through one conditioner. Consumes cotangents on s and t, returns
/// the cotangent on the input in `x_bar`, and accumulates parameter
/// gradients into `grad` when non-null.
inline void mlp_backward(const FlowParams& p, Eigen::Index t, const Eigen::Ref<const Eigen::MatrixXd>& x,
                         const MlpCache& c, const Eigen::MatrixXd& s_bar, const Eigen::MatrixXd& t_bar,
                         Eigen::VectorXd* grad, Eigen::MatrixXd& x_bar, MlpScratch& ws) {
  const ConstViews v = transition_views(p, t);
  const TransitionLayout& tl = p.layout.transition(t);
  const double slope = p.config.leaky_slope;
  const Eigen::Index rows = x.rows();

  ws.a3_bar.resize(rows, 2 * tl.d_out);
  ws.a3_bar.leftCols(tl.d_out).array() = s_bar.array() * (1.0 - c.s.array().square());
  ws.a3_bar.rightCols(tl.d_out) = t_bar;

  ws.h_bar.noalias() = ws.a3_bar * v.w3.transpose();
  apply_leaky_grad(ws.a_bar, ws.h_bar, c.h2, slope);
  if (grad) {
    GradViews g = grad_views(p, *grad, t);
    g.w3.noalias() += c.h2.transpose() * ws.a3_bar;
    g.b3 += ws.a3_bar.colwise().sum();
    g.w2.noalias() += c.h1.transpose() * ws.a_bar;
    g.b2 += ws.a_bar.colwise().sum();
  }

  ws.h_bar.noalias() = ws.a_bar * v.w2.transpose();
  apply_leaky_grad(ws.a_bar, ws.h_bar, c.h1, slope);
  if (grad) {
    GradViews g = grad_views(p, *grad, t);
    g.w1.noalias() += x.transpose() * ws.a_bar;
    g.b1 += ws.a_bar.colwise().sum();
  }
  x_bar.noalias() = ws.a_bar * v.w1.transpose();
}

}  // namespace flowvi::internal
