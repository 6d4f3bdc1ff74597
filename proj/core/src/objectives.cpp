#include "flowvi/objectives.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "flowvi/score.hpp"
#include "flow_internal.hpp"

namespace flowvi {

namespace {

constexpr Eigen::Index kBlockRows = 4096;

/// Row-block workspace for the hand-rolled reverse accumulation through the
/// coupling stack. Forward/inverse passes cache per-transition inputs and
/// conditioner activations; the backward walks reuse them.
struct Engine {
  const FlowParams& p;
  const Eigen::Index nt;

  std::vector<internal::MlpCache> fwd_cache, inv_cache;
  std::vector<SampleMatrix> fwd_states;  // fwd_states[t] = input of transition t; [nt] = z
  std::vector<SampleMatrix> inv_states;  // inv_states[i] = U_i with U_nt = z, U_0 = eps_hat
  internal::MlpScratch ws;
  SampleMatrix cot;  // running cotangent, B x D
  SampleMatrix s_bar, t_bar, x_bar;
  Eigen::VectorXd logdet_fwd, logdet_inv;

  explicit Engine(const FlowParams& params)
      : p(params),
        nt(params.layout.num_transitions()),
        fwd_cache(static_cast<std::size_t>(nt)),
        inv_cache(static_cast<std::size_t>(nt)),
        fwd_states(static_cast<std::size_t>(nt) + 1),
        inv_states(static_cast<std::size_t>(nt) + 1) {}

  void run_forward(const Eigen::Ref<const SampleMatrix>& E) {
    fwd_states[0] = E;
    logdet_fwd = Eigen::VectorXd::Zero(E.rows());
    for (Eigen::Index t = 0; t < nt; ++t) {
      const TransitionLayout& tl = p.layout.transition(t);
      internal::MlpCache& c = fwd_cache[static_cast<std::size_t>(t)];
      const SampleMatrix& in = fwd_states[static_cast<std::size_t>(t)];
      internal::mlp_forward(p, t, in.middleCols(tl.keep_off, tl.d_in), c);
      SampleMatrix& out = fwd_states[static_cast<std::size_t>(t) + 1];
      out = in;
      out.middleCols(tl.trans_off, tl.d_out) =
          in.middleCols(tl.trans_off, tl.d_out).cwiseProduct(c.exp_s) + c.t;
      logdet_fwd += c.s.rowwise().sum();
    }
  }

  void run_inverse(const Eigen::Ref<const SampleMatrix>& Z) {
    inv_states[static_cast<std::size_t>(nt)] = Z;
    logdet_inv = Eigen::VectorXd::Zero(Z.rows());
    for (Eigen::Index t = nt - 1; t >= 0; --t) {
      const TransitionLayout& tl = p.layout.transition(t);
      internal::MlpCache& c = inv_cache[static_cast<std::size_t>(t)];
      const SampleMatrix& in = inv_states[static_cast<std::size_t>(t) + 1];
      internal::mlp_forward(p, t, in.middleCols(tl.keep_off, tl.d_in), c);
      SampleMatrix& out = inv_states[static_cast<std::size_t>(t)];
      out = in;
      out.middleCols(tl.trans_off, tl.d_out) =
          (in.middleCols(tl.trans_off, tl.d_out) - c.t).cwiseQuotient(c.exp_s);
      logdet_inv -= c.s.rowwise().sum();
    }
  }

  /// Reverse walk of the forward graph. `cot` must hold the cotangent on z;
  /// logdet_weight is the per-row weight of logdet_fwd in the objective.
  /// Parameter gradients accumulate into *grad when non-null; on exit `cot`
  /// holds the cotangent on the base noise.
  void backward_forward_graph(double logdet_weight, Eigen::VectorXd* grad) {
    for (Eigen::Index t = nt - 1; t >= 0; --t) {
      const TransitionLayout& tl = p.layout.transition(t);
      const internal::MlpCache& c = fwd_cache[static_cast<std::size_t>(t)];
      const SampleMatrix& in = fwd_states[static_cast<std::size_t>(t)];
      auto cot_trans = cot.middleCols(tl.trans_off, tl.d_out);
      s_bar = cot_trans.cwiseProduct(in.middleCols(tl.trans_off, tl.d_out)).cwiseProduct(c.exp_s);
      if (logdet_weight != 0.0) s_bar.array() += logdet_weight;
      t_bar = cot_trans;
      cot_trans = cot_trans.cwiseProduct(c.exp_s);
      internal::mlp_backward(p, t, in.middleCols(tl.keep_off, tl.d_in), c, s_bar, t_bar, grad, x_bar, ws);
      cot.middleCols(tl.keep_off, tl.d_in) += x_bar;
    }
  }

  /// Reverse walk of the inverse graph. `cot` must hold the cotangent on
  /// eps_hat = U_0; logdet_weight is the per-row weight of logdet_inv. On
  /// exit `cot` holds the cotangent on z.
  void backward_inverse_graph(double logdet_weight, Eigen::VectorXd* grad) {
    for (Eigen::Index t = 0; t < nt; ++t) {
      const TransitionLayout& tl = p.layout.transition(t);
      const internal::MlpCache& c = inv_cache[static_cast<std::size_t>(t)];
      const SampleMatrix& out = inv_states[static_cast<std::size_t>(t)];      // holds x = (y - t)/e^s
      const SampleMatrix& in = inv_states[static_cast<std::size_t>(t) + 1];   // conditioner input lives here
      auto cot_trans = cot.middleCols(tl.trans_off, tl.d_out);
      s_bar = -cot_trans.cwiseProduct(out.middleCols(tl.trans_off, tl.d_out));
      if (logdet_weight != 0.0) s_bar.array() -= logdet_weight;
      t_bar = -cot_trans.cwiseQuotient(c.exp_s);
      cot_trans = cot_trans.cwiseQuotient(c.exp_s);
      internal::mlp_backward(p, t, in.middleCols(tl.keep_off, tl.d_in), c, s_bar, t_bar, grad, x_bar, ws);
      cot.middleCols(tl.keep_off, tl.d_in) += x_bar;
    }
  }

  SampleMatrix& z_state() { return fwd_states[static_cast<std::size_t>(nt)]; }
  SampleMatrix& eps_hat_state() { return inv_states[0]; }
};

void check_noise(const FlowParams& p, const SampleMatrix& E) {
  if (E.cols() != p.config.dim) throw std::invalid_argument("objective: sample matrix has wrong column count");
  if (E.rows() < 1) throw std::invalid_argument("objective: empty batch");
}

// Shared block loop: calls fn(engine, block) for fixed-size row blocks.
template <typename Fn>
void for_each_block(Engine& eng, const SampleMatrix& E, Fn&& fn) {
  const Eigen::Index S = E.rows();
  for (Eigen::Index start = 0; start < S; start += kBlockRows) {
    const Eigen::Index b = std::min(kBlockRows, S - start);
    fn(eng, E.middleRows(start, b));
  }
}

// Per-row gradient of the unaveraged per-sample objective. Returns the
// objective value of the row.
double per_row_grad(Engine& eng, Estimator est, const Target* target, const SampleMatrix& row,
                    Eigen::VectorXd& grad_out) {
  grad_out.setZero();
  switch (est) {
    case Estimator::TotalGradient: {
      eng.run_forward(row);
      const Eigen::VectorXd lp = target->log_density(eng.z_state());
      eng.cot = score(*target, eng.z_state()).grad_z;
      eng.backward_forward_graph(1.0, &grad_out);
      return lp[0] + eng.logdet_fwd[0] - standard_normal_log_density(row)[0];
    }
    case Estimator::STL: {
      eng.run_forward(row);
      const Eigen::VectorXd lp = target->log_density(eng.z_state());
      eng.run_inverse(eng.z_state());
      eng.cot = -eng.eps_hat_state();
      eng.backward_inverse_graph(1.0, nullptr);
      eng.cot = score(*target, eng.z_state()).grad_z - eng.cot;
      eng.backward_forward_graph(0.0, &grad_out);
      return lp[0] + eng.logdet_fwd[0] - standard_normal_log_density(row)[0];
    }
    case Estimator::ForwardKL: {
      eng.run_inverse(row);
      const double val = standard_normal_log_density(eng.eps_hat_state())[0] + eng.logdet_inv[0];
      eng.cot = -eng.eps_hat_state();
      eng.backward_inverse_graph(1.0, &grad_out);
      return val;
    }
  }
  return 0.0;
}

}  // namespace

bool GradientEstimate::finite() const { return std::isfinite(objective_value) && grad.allFinite(); }

double elbo_estimate(const FlowParams& params, const Target& target, const SampleMatrix& E) {
  check_noise(params, E);
  const TransformResult fwd = forward(params, E);
  const Eigen::VectorXd lp = target.log_density(fwd.output);
  return (lp + fwd.log_det - standard_normal_log_density(E)).mean();
}

double elbo_frozen_density(const FlowParams& params, const FlowParams& density_params, const Target& target,
                           const SampleMatrix& E) {
  check_noise(params, E);
  const TransformResult fwd = forward(params, E);
  const Eigen::VectorXd lp = target.log_density(fwd.output);
  const Eigen::VectorXd lq = flow_log_density(density_params, fwd.output);
  return (lp - lq).mean();
}

GradientEstimate grad_total(const FlowParams& params, const Target& target, const SampleMatrix& E) {
  check_noise(params, E);
  const double S = static_cast<double>(E.rows());
  GradientEstimate est;
  est.estimator = Estimator::TotalGradient;
  est.batch_size = E.rows();
  est.grad = Eigen::VectorXd::Zero(params.layout.param_count());
  double val = 0.0;
  Engine eng(params);
  for_each_block(eng, E, [&](Engine& e, const Eigen::Ref<const SampleMatrix>& blk) {
    e.run_forward(blk);
    const Eigen::VectorXd lp = target.log_density(e.z_state());
    val += (lp + e.logdet_fwd - standard_normal_log_density(blk)).sum();
    e.cot = score(target, e.z_state()).grad_z;
    e.backward_forward_graph(1.0, &est.grad);
  });
  est.objective_value = val / S;
  est.grad /= S;
  return est;
}

GradientEstimate grad_stl(const FlowParams& params, const Target& target, const SampleMatrix& E) {
  check_noise(params, E);
  const double S = static_cast<double>(E.rows());
  GradientEstimate est;
  est.estimator = Estimator::STL;
  est.batch_size = E.rows();
  est.grad = Eigen::VectorXd::Zero(params.layout.param_count());
  double val = 0.0;
  Engine eng(params);
  for_each_block(eng, E, [&](Engine& e, const Eigen::Ref<const SampleMatrix>& blk) {
    e.run_forward(blk);
    const Eigen::VectorXd lp = target.log_density(e.z_state());
    val += (lp + e.logdet_fwd - standard_normal_log_density(blk)).sum();
    // Density evaluation through the inverse pass, parameters constant:
    // the backward walk yields d(log q)/dz, never parameter gradients.
    e.run_inverse(e.z_state());
    e.cot = -e.eps_hat_state();
    e.backward_inverse_graph(1.0, nullptr);
    e.cot = score(target, e.z_state()).grad_z - e.cot;
    e.backward_forward_graph(0.0, &est.grad);
  });
  est.objective_value = val / S;
  est.grad /= S;
  return est;
}

GradientEstimate forward_kl_loss_and_grad(const FlowParams& params, const SampleMatrix& X) {
  check_noise(params, X);
  const double S = static_cast<double>(X.rows());
  GradientEstimate est;
  est.estimator = Estimator::ForwardKL;
  est.batch_size = X.rows();
  est.grad = Eigen::VectorXd::Zero(params.layout.param_count());
  double val = 0.0;
  Engine eng(params);
  for_each_block(eng, X, [&](Engine& e, const Eigen::Ref<const SampleMatrix>& blk) {
    e.run_inverse(blk);
    val += (standard_normal_log_density(e.eps_hat_state()) + e.logdet_inv).sum();
    e.cot = -e.eps_hat_state();
    e.backward_inverse_graph(1.0, &est.grad);
  });
  est.objective_value = val / S;  // mean log q; the loss is its negation
  est.grad /= S;
  return est;
}

Eigen::VectorXd finite_difference_grad(const Eigen::VectorXd& params,
                                       const std::function<double(const Eigen::VectorXd&)>& objective,
                                       double step) {
  if (!(step > 0.0)) throw std::invalid_argument("finite_difference_grad: step must be > 0");
  Eigen::VectorXd g(params.size());
  Eigen::VectorXd probe = params;
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    probe[i] = params[i] + step;
    const double up = objective(probe);
    probe[i] = params[i] - step;
    const double down = objective(probe);
    probe[i] = params[i];
    g[i] = (up - down) / (2.0 * step);
  }
  return g;
}

PerSampleGradStats per_sample_grad_stats(Estimator estimator, const FlowParams& params, const Target& target,
                                         const SampleMatrix& E) {
  check_noise(params, E);
  const Eigen::Index S = E.rows();
  const Eigen::Index P = params.layout.param_count();
  PerSampleGradStats stats;
  stats.mean = Eigen::VectorXd::Zero(P);
  stats.count = S;
  double sum_sq = 0.0;
  Engine eng(params);
  Eigen::VectorXd g(P);
  for (Eigen::Index i = 0; i < S; ++i) {
    per_row_grad(eng, estimator, &target, E.row(i), g);
    stats.mean += g;
    sum_sq += g.squaredNorm();
    stats.max_abs_entry = std::max(stats.max_abs_entry, g.cwiseAbs().maxCoeff());
  }
  stats.mean /= static_cast<double>(S);
  stats.covariance_trace =
      (S > 1) ? (sum_sq - static_cast<double>(S) * stats.mean.squaredNorm()) / static_cast<double>(S - 1) : 0.0;
  return stats;
}

PairedDiffStats stl_total_paired_stats(const FlowParams& params, const Target& target, const SampleMatrix& E) {
  check_noise(params, E);
  const Eigen::Index S = E.rows();
  const Eigen::Index P = params.layout.param_count();
  PairedDiffStats stats;
  stats.mean_diff = Eigen::VectorXd::Zero(P);
  stats.var_diff = Eigen::VectorXd::Zero(P);
  stats.count = S;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(P);
  Eigen::VectorXd sum_sq = Eigen::VectorXd::Zero(P);
  Engine eng(params);
  Eigen::VectorXd g_stl(P), g_tot(P);
  for (Eigen::Index i = 0; i < S; ++i) {
    per_row_grad(eng, Estimator::STL, &target, E.row(i), g_stl);
    per_row_grad(eng, Estimator::TotalGradient, &target, E.row(i), g_tot);
    g_stl -= g_tot;
    sum += g_stl;
    sum_sq += g_stl.cwiseAbs2();
  }
  stats.mean_diff = sum / static_cast<double>(S);
  if (S > 1)
    stats.var_diff =
        (sum_sq - static_cast<double>(S) * stats.mean_diff.cwiseAbs2()) / static_cast<double>(S - 1);
  return stats;
}

}  // namespace flowvi
