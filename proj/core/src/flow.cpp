#include "flowvi/flow.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "flowvi/io.hpp"
#include "flow_internal.hpp"

namespace flowvi {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;
}

FlowLayout::FlowLayout(const FlowConfig& config) {
  if (config.dim < 2) throw std::invalid_argument("flow: dim must be >= 2");
  if (config.num_coupling_layers < 1) throw std::invalid_argument("flow: need at least one coupling layer");
  if (config.hidden_units < 1) throw std::invalid_argument("flow: need at least one hidden unit");

  const Eigen::Index d = config.dim / 2;  // first-half size, floor for odd D
  const Eigen::Index D = config.dim;
  const Eigen::Index h = config.hidden_units;
  Eigen::Index off = 0;
  transitions_.reserve(static_cast<std::size_t>(2 * config.num_coupling_layers));
  for (Eigen::Index t = 0; t < 2 * config.num_coupling_layers; ++t) {
    TransitionLayout tl;
    if (t % 2 == 0) {  // keep the first half, transform the second
      tl.keep_off = 0;
      tl.trans_off = d;
      tl.d_in = d;
      tl.d_out = D - d;
    } else {  // keep the second half, transform the first
      tl.keep_off = d;
      tl.trans_off = 0;
      tl.d_in = D - d;
      tl.d_out = d;
    }
    tl.w1 = off; off += tl.d_in * h;
    tl.b1 = off; off += h;
    tl.w2 = off; off += h * h;
    tl.b2 = off; off += h;
    tl.w3 = off; off += h * 2 * tl.d_out;
    tl.b3 = off; off += 2 * tl.d_out;
    transitions_.push_back(tl);
  }
  param_count_ = off;
}

FlowParams make_flow_params(const FlowConfig& config) {
  FlowParams p;
  p.config = config;
  p.layout = FlowLayout(config);
  p.theta = Eigen::VectorXd::Zero(p.layout.param_count());
  return p;
}

FlowParams init_params(const FlowConfig& config, RngState& rng) {
  FlowParams p = make_flow_params(config);
  for (Eigen::Index i = 0; i < p.theta.size(); ++i) p.theta[i] = config.init_std * rng.next_normal();
  return p;
}

std::pair<SampleMatrix, SampleMatrix> conditioner(const FlowParams& params, Eigen::Index transition,
                                                  const SampleMatrix& input) {
  const TransitionLayout& tl = params.layout.transition(transition);
  if (input.cols() != tl.d_in) throw std::invalid_argument("conditioner: wrong input width");
  internal::MlpCache c;
  internal::mlp_forward(params, transition, input, c);
  return {c.s, c.t};
}

TransformResult forward(const FlowParams& params, const SampleMatrix& E) {
  if (E.cols() != params.config.dim) throw std::invalid_argument("flow forward: wrong column count");
  TransformResult r;
  r.output = E;
  r.log_det = Eigen::VectorXd::Zero(E.rows());
  internal::MlpCache c;
  for (Eigen::Index t = 0; t < params.layout.num_transitions(); ++t) {
    const TransitionLayout& tl = params.layout.transition(t);
    internal::mlp_forward(params, t, r.output.middleCols(tl.keep_off, tl.d_in), c);
    auto block = r.output.middleCols(tl.trans_off, tl.d_out);
    block = block.cwiseProduct(c.exp_s) + c.t;
    r.log_det += c.s.rowwise().sum();
  }
  return r;
}

TransformResult inverse(const FlowParams& params, const SampleMatrix& Z) {
  if (Z.cols() != params.config.dim) throw std::invalid_argument("flow inverse: wrong column count");
  TransformResult r;
  r.output = Z;
  r.log_det = Eigen::VectorXd::Zero(Z.rows());
  internal::MlpCache c;
  for (Eigen::Index t = params.layout.num_transitions() - 1; t >= 0; --t) {
    const TransitionLayout& tl = params.layout.transition(t);
    internal::mlp_forward(params, t, r.output.middleCols(tl.keep_off, tl.d_in), c);
    auto block = r.output.middleCols(tl.trans_off, tl.d_out);
    block = (block - c.t).cwiseQuotient(c.exp_s);
    r.log_det -= c.s.rowwise().sum();
  }
  return r;
}

Eigen::VectorXd standard_normal_log_density(const SampleMatrix& E) {
  return (-0.5 * static_cast<double>(E.cols()) * kLog2Pi) -
         0.5 * E.rowwise().squaredNorm().array();
}

Eigen::VectorXd flow_log_density(const FlowParams& params, const SampleMatrix& Z) {
  const TransformResult inv = inverse(params, Z);
  return standard_normal_log_density(inv.output) + inv.log_det;
}

FlowSample sample_flow(const FlowParams& params, RngState& rng, Eigen::Index S) {
  if (S < 1) throw std::invalid_argument("sample_flow: S must be >= 1");
  FlowSample out;
  out.eps = standard_normal_matrix(rng, S, params.config.dim);
  TransformResult fwd = forward(params, out.eps);
  out.log_q = standard_normal_log_density(out.eps) - fwd.log_det;
  out.z = std::move(fwd.output);
  return out;
}

void save_flow_params(const FlowParams& params, const std::string& path) {
  io::MatrixFileMeta meta;
  meta.kind = "flow-params";
  meta.extra["dim"] = std::to_string(params.config.dim);
  meta.extra["coupling_layers"] = std::to_string(params.config.num_coupling_layers);
  meta.extra["hidden_units"] = std::to_string(params.config.hidden_units);
  meta.extra["param_layout"] = FlowLayout::version();
  io::write_matrix_file(path, params.theta, meta);
}

FlowParams load_flow_params(const std::string& path) {
  io::MatrixFileMeta meta;
  const SampleMatrix m = io::read_matrix_file(path, &meta);
  if (meta.kind != "flow-params") throw std::runtime_error("load_flow_params: not a parameter file: " + path);
  if (meta.extra.at("param_layout") != FlowLayout::version())
    throw std::runtime_error("load_flow_params: incompatible parameter layout in " + path);
  FlowConfig config;
  config.dim = std::stol(meta.extra.at("dim"));
  config.num_coupling_layers = std::stol(meta.extra.at("coupling_layers"));
  config.hidden_units = std::stol(meta.extra.at("hidden_units"));
  FlowParams p = make_flow_params(config);
  if (m.rows() != p.layout.param_count() || m.cols() != 1)
    throw std::runtime_error("load_flow_params: parameter count mismatch in " + path);
  p.theta = m.col(0);
  return p;
}

}  // namespace flowvi
