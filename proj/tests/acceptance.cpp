// Acceptance suite: every criterion prints one PASS/FAIL line with its
// measured numbers; the exit code is the number of failures. Individual
// criteria can be selected by number on the command line.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "flowvi/bench.hpp"
#include "flowvi/metrics.hpp"
#include "flowvi/objectives.hpp"
#include "flowvi/optim.hpp"
#include "flowvi/score.hpp"

using namespace flowvi;

namespace {

struct Criterion {
  int id;
  std::string name;
  std::function<bool(std::string&)> run;
};

FlowParams random_params(const FlowConfig& config, double std_dev, std::uint64_t seed) {
  FlowParams p = make_flow_params(config);
  RngState rng(seed);
  for (Eigen::Index i = 0; i < p.theta.size(); ++i) p.theta[i] = std_dev * rng.next_normal();
  return p;
}

FlowParams with_theta(const FlowParams& like, const Eigen::VectorXd& theta) {
  FlowParams p = like;
  p.theta = theta;
  return p;
}

std::vector<bench::RunRecord> run_all(const std::vector<ExperimentConfig>& configs,
                                      const bench::BenchPaths& paths) {
  std::vector<bench::RunRecord> out(configs.size());
  std::vector<std::string> errors(configs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= configs.size()) return;
      try {
        out[i] = bench::run_experiment(configs[i], paths);
      } catch (const std::exception& err) {
        errors[i] = err.what();
      }
    }
  };
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned n = std::min<unsigned>(hw, static_cast<unsigned>(configs.size()));
  std::vector<std::thread> threads;
  for (unsigned i = 0; i < n; ++i) threads.emplace_back(worker);
  for (std::thread& t : threads) t.join();
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!errors[i].empty()) throw std::runtime_error("run " + std::to_string(i) + ": " + errors[i]);
  }
  return out;
}

double final_metric(const bench::RunRecord& r) {
  if (r.checkpoints.empty() || r.checkpoints.back().iteration != r.config.iterations)
    return std::numeric_limits<double>::infinity();  // diverged before the last checkpoint
  return r.checkpoints.back().metric;
}

double median3(double a, double b, double c) {
  return std::max(std::min(a, b), std::min(std::max(a, b), c));
}

ExperimentConfig base_run(const std::string& target, Eigen::Index layers, Eigen::Index hidden,
                          Objective obj, Estimator est, Eigen::Index batch, double lr,
                          ScheduleKind kind, long iters, std::uint64_t seed) {
  ExperimentConfig c;
  c.target_name = target;
  c.flow = FlowConfig{parse_target_name(target).dim, layers, hidden, 0.01, 0.001};
  c.objective = obj;
  c.estimator = est;
  c.batch_size = batch;
  c.schedule = Schedule{kind, lr, iters};
  c.iterations = iters;
  c.seed = seed;
  c.eval_sample_size = 100000;
  c.reference_sample_size = 100000;
  c.reference_seed = 20177;
  c.checkpoint_iters = {0, iters / 2, iters};
  return c;
}

// ---------------------------------------------------------------- criterion 1

bool bijectivity_suite(std::string& detail) {
  const Eigen::Index dims[] = {2, 10};
  const Eigen::Index layers[] = {1, 10};
  const Eigen::Index hiddens[] = {4, 32};
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const FlowConfig config{dims[seed % 2], layers[(seed / 2) % 2], hiddens[(seed / 4) % 2], 0.01, 0.001};
    const FlowParams p = random_params(config, 0.1, 1000 + seed);
    RngState rng(2000 + seed);
    const SampleMatrix e = standard_normal_matrix(rng, 10000, config.dim);
    const TransformResult fwd = forward(p, e);
    const TransformResult back = inverse(p, fwd.output);
    worst = std::max(worst, (back.output - e).cwiseAbs().maxCoeff());
  }
  std::ostringstream os;
  os << "max roundtrip error " << worst << " over 50 flows (need < 1e-9)";
  detail = os.str();
  return worst < 1e-9;
}

// ---------------------------------------------------------------- criterion 2

bool jacobian_suite(std::string& detail) {
  double worst = 0.0;
  int points = 0;
  const double h = 1e-6;
  for (int flow_idx = 0; flow_idx < 10; ++flow_idx) {
    const Eigen::Index k = 1 + (flow_idx % 4);
    const Eigen::Index hid = (flow_idx % 2) ? 8 : 4;
    const FlowParams p = random_params({2, k, hid, 0.01, 0.001}, 0.3, 3000 + flow_idx);
    RngState rng(3100 + flow_idx);
    const SampleMatrix pts = standard_normal_matrix(rng, 10, 2);
    for (Eigen::Index i = 0; i < pts.rows(); ++i, ++points) {
      Eigen::Matrix2d jac;
      for (int j = 0; j < 2; ++j) {
        SampleMatrix up = pts.row(i), down = pts.row(i);
        up(0, j) += h;
        down(0, j) -= h;
        const SampleMatrix fu = forward(p, up).output;
        const SampleMatrix fd = forward(p, down).output;
        jac(0, j) = (fu(0, 0) - fd(0, 0)) / (2.0 * h);
        jac(1, j) = (fu(0, 1) - fd(0, 1)) / (2.0 * h);
      }
      const double analytic = forward(p, SampleMatrix(pts.row(i))).log_det[0];
      const double numeric = std::log(std::fabs(jac(0, 0) * jac(1, 1) - jac(0, 1) * jac(1, 0)));
      worst = std::max(worst, std::fabs(analytic - numeric) / std::max(1.0, std::fabs(analytic)));
    }
  }
  std::ostringstream os;
  os << "max log-det relative error " << worst << " over " << points << " points (need < 1e-5)";
  detail = os.str();
  return worst < 1e-5;
}

// ---------------------------------------------------------------- criterion 3

bool gradient_suite(std::string& detail) {
  const Target funnel = build_target_by_name("funnel-2");
  const FlowParams p0 = random_params({2, 2, 4, 0.01, 0.001}, 0.3, 303);
  RngState rng(304);
  const SampleMatrix e = standard_normal_matrix(rng, 64, 2);
  RngState sampler(305);
  const SampleMatrix x = funnel.exact_sample(sampler, 64);
  const double step = 1e-6;

  auto rel_err = [](const Eigen::VectorXd& a, const Eigen::VectorXd& fd) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i)
      worst = std::max(worst, std::fabs(a[i] - fd[i]) / std::max(1.0, std::fabs(a[i])));
    return worst;
  };

  const double e_total = rel_err(
      grad_total(p0, funnel, e).grad,
      finite_difference_grad(
          p0.theta,
          [&](const Eigen::VectorXd& th) { return elbo_estimate(with_theta(p0, th), funnel, e); }, step));
  const double e_stl = rel_err(
      grad_stl(p0, funnel, e).grad,
      finite_difference_grad(
          p0.theta,
          [&](const Eigen::VectorXd& th) { return elbo_frozen_density(with_theta(p0, th), p0, funnel, e); },
          step));
  const double e_fkl = rel_err(
      forward_kl_loss_and_grad(p0, x).grad,
      finite_difference_grad(
          p0.theta,
          [&](const Eigen::VectorXd& th) { return flow_log_density(with_theta(p0, th), x).mean(); }, step));
  std::ostringstream os;
  os << "max FD relative error: total " << e_total << ", stl " << e_stl << ", forward_kl " << e_fkl
     << " (need < 1e-5 on all " << p0.layout.param_count() << " coordinates)";
  detail = os.str();
  return e_total < 1e-5 && e_stl < 1e-5 && e_fkl < 1e-5;
}

// ---------------------------------------------------------------- criterion 4

bool stl_properties(std::string& detail) {
  std::ostringstream os;
  bool pass = true;

  // (a) zero per-sample gradient in the p = q construction
  {
    const Target gauss = Target::standard_gaussian(2);
    const FlowParams p = make_flow_params({2, 2, 4, 0.01, 0.001});
    RngState rng(400);
    const SampleMatrix e = standard_normal_matrix(rng, 64, 2);
    const PerSampleGradStats stats = per_sample_grad_stats(Estimator::STL, p, gauss, e);
    os << "(a) max per-sample |entry| " << stats.max_abs_entry << " (need <= 1e-12)";
    pass = pass && stats.max_abs_entry <= 1e-12;
  }

  // (b) paired unbiasedness over shared noise
  {
    const Target funnel = build_target_by_name("funnel-2");
    const FlowParams p = random_params({2, 2, 4, 0.01, 0.001}, 0.3, 401);
    RngState rng(402);
    const SampleMatrix e = standard_normal_matrix(rng, 100000, 2);
    const PairedDiffStats stats = stl_total_paired_stats(p, funnel, e);
    double worst_sigmas = 0.0;
    for (Eigen::Index i = 0; i < stats.mean_diff.size(); ++i) {
      const double se = std::sqrt(stats.var_diff[i] / static_cast<double>(stats.count));
      if (se > 0.0) worst_sigmas = std::max(worst_sigmas, std::fabs(stats.mean_diff[i]) / se);
    }
    os << "; (b) worst |mean diff| " << worst_sigmas << " standard errors (need <= 3)";
    pass = pass && worst_sigmas <= 3.0;
  }

  // (c) per-sample gradient variance, STL below total far from the optimum
  {
    const Target funnel = build_target_by_name("funnel-2");
    int wins = 0;
    for (std::uint64_t s = 0; s < 10; ++s) {
      const FlowParams p = random_params({2, 2, 4, 0.01, 0.001}, 0.5, 410 + s);
      RngState rng(420 + s);
      const SampleMatrix e = standard_normal_matrix(rng, 2048, 2);
      const double tr_stl = per_sample_grad_stats(Estimator::STL, p, funnel, e).covariance_trace;
      const double tr_total =
          per_sample_grad_stats(Estimator::TotalGradient, p, funnel, e).covariance_trace;
      if (tr_stl < tr_total) ++wins;
    }
    os << "; (c) variance wins " << wins << "/10 (need >= 8)";
    pass = pass && wins >= 8;
  }
  detail = os.str();
  return pass;
}

// ---------------------------------------------------------------- criterion 5

bool metric_oracle_suite(std::string& detail) {
  RngState rng(500);
  double worst = 0.0;
  for (int instance = 0; instance < 20; ++instance) {
    const Eigen::Index s = 8 + static_cast<Eigen::Index>(rng.next_unit() * 57);
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.next_unit() * 4);
    const SampleMatrix a = standard_normal_matrix(rng, s, d) * 3.0;
    const SampleMatrix b = (standard_normal_matrix(rng, s, d).array() + 0.5).matrix();
    double oracle = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) oracle += w1_1d_oracle(a.col(j), b.col(j));
    oracle /= static_cast<double>(d);
    worst = std::max(worst, std::fabs(marginal_wasserstein(a, b) - oracle));
  }

  bool props = true;
  for (int k = 0; k < 100; ++k) {
    const SampleMatrix a = standard_normal_matrix(rng, 32, 3);
    const SampleMatrix b = standard_normal_matrix(rng, 32, 3) * 1.5;
    const SampleMatrix c = (standard_normal_matrix(rng, 32, 3).array() - 1.0).matrix();
    props = props && marginal_wasserstein(a, b) == marginal_wasserstein(b, a);
    props = props && marginal_wasserstein(a, c) <=
                         marginal_wasserstein(a, b) + marginal_wasserstein(b, c) + 1e-12;
    SampleMatrix shuffled = a;
    shuffled.row(0).swap(shuffled.row(31));
    shuffled.row(5).swap(shuffled.row(17));
    props = props && marginal_wasserstein(shuffled, b) == marginal_wasserstein(a, b);
  }
  std::ostringstream os;
  os << "max |sort - assignment LP| " << worst << " over 20 instances (need < 1e-9); "
     << "symmetry/permutation/triangle " << (props ? "hold" : "VIOLATED") << " on 100 triples";
  detail = os.str();
  return worst < 1e-9 && props;
}

// ---------------------------------------------------------------- criterion 6

double histogram_max_rel_err(const Target& t, std::uint64_t seed, double lo1, double hi1, double lo2,
                             double hi2, int n1, int n2, int* qualifying) {
  RngState rng(seed);
  const SampleMatrix z = t.exact_sample(rng, 1000000);
  const double w1 = (hi1 - lo1) / n1;
  const double w2 = (hi2 - lo2) / n2;

  std::vector<long> counts(static_cast<std::size_t>(n1) * n2, 0);
  long total_in = 0;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const double x = z(i, 0), y = z(i, 1);
    if (x < lo1 || x >= hi1 || y < lo2 || y >= hi2) continue;
    const int c1 = static_cast<int>((x - lo1) / w1);
    const int c2 = static_cast<int>((y - lo2) / w2);
    counts[static_cast<std::size_t>(c1) * n2 + c2] += 1;
    ++total_in;
  }

  // expected cell mass by 4x4 midpoint quadrature of the density
  const int sub = 4;
  SampleMatrix pts(static_cast<Eigen::Index>(n2) * sub * sub, 2);
  std::vector<double> mass(static_cast<std::size_t>(n1) * n2, 0.0);
  double mass_total = 0.0;
  for (int c1 = 0; c1 < n1; ++c1) {
    Eigen::Index row = 0;
    for (int c2 = 0; c2 < n2; ++c2) {
      for (int a = 0; a < sub; ++a) {
        for (int b = 0; b < sub; ++b) {
          pts(row, 0) = lo1 + (c1 + (a + 0.5) / sub) * w1;
          pts(row, 1) = lo2 + (c2 + (b + 0.5) / sub) * w2;
          ++row;
        }
      }
    }
    const Eigen::VectorXd lp = t.log_density(pts);
    for (int c2 = 0; c2 < n2; ++c2) {
      double m = 0.0;
      for (int k = 0; k < sub * sub; ++k) m += std::exp(lp[c2 * sub * sub + k]);
      m *= w1 * w2 / (sub * sub);
      mass[static_cast<std::size_t>(c1) * n2 + c2] = m;
      mass_total += m;
    }
  }

  double worst = 0.0;
  int q = 0;
  for (std::size_t cell = 0; cell < counts.size(); ++cell) {
    if (counts[cell] < 1000) continue;
    ++q;
    const double h = static_cast<double>(counts[cell]) / static_cast<double>(total_in);
    const double p = mass[cell] / mass_total;
    worst = std::max(worst, std::fabs(h - p) / p);
  }
  if (qualifying) *qualifying = q;
  return worst;
}

bool target_statistics_suite(std::string& detail) {
  std::ostringstream os;
  bool pass = true;

  {
    const Target funnel = build_target_by_name("funnel-10");
    RngState rng(601);
    const SampleMatrix z = funnel.exact_sample(rng, 1000000);
    const double var = (z.col(0).array() - z.col(0).mean()).square().sum() / (z.rows() - 1);
    os << "funnel var[z1] " << var << " (need [8.85, 9.15])";
    pass = pass && var > 8.85 && var < 9.15;
  }
  {
    const Target st = build_target_by_name("student_t_2_5-2");
    RngState rng(109);
    const SampleMatrix z = st.exact_sample(rng, 1000000);
    double worst = 0.0;
    for (int j = 0; j < 2; ++j) {
      const double v = (z.col(j).array() - z.col(j).mean()).square().sum() / (z.rows() - 1);
      worst = std::max(worst, std::fabs(v - 5.0));
    }
    os << "; student-t |var - 5| " << worst << " (need < 0.5)";
    pass = pass && worst < 0.5;
  }
  {
    const Target banana = build_target_by_name("banana-3");
    RngState rng(603);
    const SampleMatrix z = banana.exact_sample(rng, 1000000);
    os << "; banana |mean[z2]| " << std::fabs(z.col(1).mean()) << " (need < 0.05)";
    pass = pass && std::fabs(z.col(1).mean()) < 0.05;
  }
  {
    struct Grid {
      const char* name;
      std::uint64_t seed;
      double lo1, hi1, lo2, hi2;
      int n1, n2;
    };
    const Target icg = build_target_by_name("icg-2", 5);
    const double s1 = 4.0 * std::sqrt(icg.covariance()(0, 0));
    const double s2 = 4.0 * std::sqrt(icg.covariance()(1, 1));
    const Grid grids[] = {
        {"funnel-2", 611, -7.5, 7.5, -10.0, 10.0, 60, 80},
        {"banana-2", 612, -25.0, 25.0, -7.0, 18.0, 100, 50},
        {"student_t_2_5-2", 613, -6.0, 6.0, -6.0, 6.0, 60, 60},
        {"icg-2", 614, -s1, s1, -s2, s2, 60, 60},
    };
    for (const Grid& g : grids) {
      const Target t = (std::string(g.name) == "icg-2") ? icg : build_target_by_name(g.name);
      int q = 0;
      const double err = histogram_max_rel_err(t, g.seed, g.lo1, g.hi1, g.lo2, g.hi2, g.n1, g.n2, &q);
      os << "; " << g.name << " hist err " << err << " (" << q << " cells)";
      pass = pass && err < 0.10 && q > 10;
    }
  }
  detail = os.str();
  return pass;
}

// ---------------------------------------------------------------- criterion 7

bool capacity_trend(std::string& detail, const bench::BenchPaths& paths) {
  std::vector<ExperimentConfig> configs;
  for (const Eigen::Index layers : {1, 4, 10}) {
    for (int s = 0; s < 3; ++s) {
      configs.push_back(base_run("banana-2", layers, 32, Objective::ForwardKL, Estimator::ForwardKL,
                                 4096, 1e-3, ScheduleKind::Decayed, 5000, 7001 + s));
    }
  }
  const std::vector<bench::RunRecord> records = run_all(configs, paths);
  const double m1 = median3(final_metric(records[0]), final_metric(records[1]), final_metric(records[2]));
  const double m10 = median3(final_metric(records[6]), final_metric(records[7]), final_metric(records[8]));
  const double baseline = records[6].checkpoints.front().baseline;
  std::ostringstream os;
  os << "median final metric: 1 layer " << m1 << ", 10 layers " << m10 << "; baseline " << baseline
     << " (need m10 < m1 and m10 <= 2x baseline)";
  detail = os.str();
  return m10 < m1 && m10 <= 2.0 * baseline;
}

// ---------------------------------------------------------------- criterion 8

bool objective_comparison(std::string& detail, const bench::BenchPaths& paths) {
  std::vector<ExperimentConfig> configs;
  for (int s = 0; s < 3; ++s) {
    configs.push_back(base_run("student_t_1_5-2", 10, 32, Objective::ReverseKL, Estimator::STL, 4096,
                               3e-4, ScheduleKind::Constant, 5000, 8001 + s));
    configs.push_back(base_run("student_t_1_5-2", 10, 32, Objective::ForwardKL, Estimator::ForwardKL,
                               4096, 1e-3, ScheduleKind::Decayed, 5000, 8001 + s));
  }
  const std::vector<bench::RunRecord> records = run_all(configs, paths);
  int wins = 0;
  std::ostringstream os;
  os << "final metric stl vs forward-kl:";
  for (int s = 0; s < 3; ++s) {
    const double stl = final_metric(records[2 * s]);
    const double fkl = final_metric(records[2 * s + 1]);
    os << " [" << stl << " vs " << fkl << "]";
    if (stl < fkl) ++wins;
  }
  os << "; wins " << wins << "/3 (need >= 2)";
  detail = os.str();
  return wins >= 2;
}

// ---------------------------------------------------------------- criterion 9

bool estimator_batch_trend(std::string& detail, const bench::BenchPaths& paths) {
  const Eigen::Index batches[] = {8, 512, 8192};
  const Estimator ests[] = {Estimator::TotalGradient, Estimator::STL};
  std::vector<ExperimentConfig> configs;
  for (const Estimator est : ests) {
    for (const Eigen::Index batch : batches) {
      for (int s = 0; s < 3; ++s) {
        configs.push_back(base_run("funnel-10", 10, 32, Objective::ReverseKL, est, batch, 3e-4,
                                   ScheduleKind::Constant, 2000, 9001 + s));
      }
    }
  }
  const std::vector<bench::RunRecord> records = run_all(configs, paths);
  auto metric_at = [&](int est_idx, int batch_idx, int seed_idx) {
    return final_metric(records[static_cast<std::size_t>(est_idx) * 9 +
                                static_cast<std::size_t>(batch_idx) * 3 +
                                static_cast<std::size_t>(seed_idx)]);
  };
  int total_big_wins = 0, stl_big_wins = 0, stl_beats_total_at_8 = 0;
  for (int s = 0; s < 3; ++s) {
    if (metric_at(0, 2, s) < metric_at(0, 0, s)) ++total_big_wins;
    if (metric_at(1, 2, s) < metric_at(1, 0, s)) ++stl_big_wins;
    if (metric_at(1, 0, s) <= metric_at(0, 0, s)) ++stl_beats_total_at_8;
  }
  std::ostringstream os;
  os << "batch 8192 < batch 8: total " << total_big_wins << "/3, stl " << stl_big_wins
     << "/3; stl <= total at batch 8: " << stl_beats_total_at_8 << "/3 (need >= 2 each)";
  detail = os.str();
  return total_big_wins >= 2 && stl_big_wins >= 2 && stl_beats_total_at_8 >= 2;
}

// --------------------------------------------------------------- criterion 10

bool step_size_stability(std::string& detail, const bench::BenchPaths& paths) {
  std::vector<ExperimentConfig> configs;
  for (const double lr : {1e-4, 3e-4, 1e-3}) {
    for (int s = 0; s < 3; ++s) {
      configs.push_back(base_run("funnel-2", 10, 32, Objective::ReverseKL, Estimator::STL, 4096, lr,
                                 ScheduleKind::Constant, 10000, 10001 + s));
    }
  }
  const std::vector<bench::RunRecord> records = run_all(configs, paths);
  int divergences = 0;
  double worst_ratio = 0.0;
  for (const bench::RunRecord& r : records) {
    if (r.diverged_at) ++divergences;
    worst_ratio = std::max(worst_ratio, final_metric(r) / r.checkpoints.front().baseline);
  }
  std::ostringstream os;
  os << divergences << " divergences over 9 runs (need 0); worst final metric / baseline "
     << worst_ratio << " (need <= 3)";
  detail = os.str();
  return divergences == 0 && worst_ratio <= 3.0;
}

// ------------------------------------------------------- criteria 11 and 12

std::string strip_wall_time(const std::string& table) {
  std::istringstream in(table);
  std::string line, out;
  while (std::getline(in, line)) {
    const auto comma = line.rfind(',');
    out += line.substr(0, comma) + "\n";
  }
  return out;
}

void recipe_and_determinism(std::string& detail11, std::string& detail12, bool& pass11, bool& pass12,
                            const bench::BenchPaths& paths) {
  ExperimentConfig c = base_run("funnel-10", 10, 32, Objective::ReverseKL, Estimator::STL, 8192, 3e-4,
                                ScheduleKind::Constant, 10000, 11001);
  c.checkpoint_iters = {0, 2500, 5000, 7500, 10000};
  const std::vector<bench::RunRecord> records = run_all({c, c}, paths);

  const double metric = final_metric(records[0]);
  const double baseline = records[0].checkpoints.front().baseline;
  {
    std::ostringstream os;
    os << "final metric " << metric << ", baseline " << baseline << ", ratio " << metric / baseline
       << " (need <= 1.5)";
    detail11 = os.str();
    pass11 = metric <= 1.5 * baseline;
  }
  {
    const std::string a = strip_wall_time(bench::results_table({records[0]}));
    const std::string b = strip_wall_time(bench::results_table({records[1]}));
    detail12 = (a == b) ? "repeated recipe run: results tables byte-identical except wall_time"
                        : "repeated recipe run: results tables DIFFER";
    pass12 = (a == b);
  }
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
  auto wanted = [&](int id) {
    return selected.empty() || std::find(selected.begin(), selected.end(), id) != selected.end();
  };

  const bench::BenchPaths paths = bench::BenchPaths::detect();
  int failures = 0;
  auto report = [&](int id, const std::string& name, bool pass, const std::string& detail,
                    double seconds) {
    std::printf("%s  %2d  %-22s (%.1fs)  %s\n", pass ? "PASS" : "FAIL", id, name.c_str(), seconds,
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
  };

  const std::vector<Criterion> criteria = {
      {1, "bijectivity", [](std::string& d) { return bijectivity_suite(d); }},
      {2, "jacobian", [](std::string& d) { return jacobian_suite(d); }},
      {3, "gradients-vs-fd", [](std::string& d) { return gradient_suite(d); }},
      {4, "stl-properties", [](std::string& d) { return stl_properties(d); }},
      {5, "metric-oracle", [](std::string& d) { return metric_oracle_suite(d); }},
      {6, "target-statistics", [](std::string& d) { return target_statistics_suite(d); }},
      {7, "capacity-trend", [&](std::string& d) { return capacity_trend(d, paths); }},
      {8, "objective-comparison", [&](std::string& d) { return objective_comparison(d, paths); }},
      {9, "estimator-batchsize", [&](std::string& d) { return estimator_batch_trend(d, paths); }},
      {10, "step-size-stability", [&](std::string& d) { return step_size_stability(d, paths); }},
  };

  for (const Criterion& c : criteria) {
    if (!wanted(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    std::string detail;
    bool pass = false;
    try {
      pass = c.run(detail);
    } catch (const std::exception& err) {
      detail = std::string("exception: ") + err.what();
    }
    report(c.id, c.name, pass, detail,
           std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }

  if (wanted(11) || wanted(12)) {
    const auto t0 = std::chrono::steady_clock::now();
    std::string d11, d12;
    bool p11 = false, p12 = false;
    try {
      recipe_and_determinism(d11, d12, p11, p12, paths);
    } catch (const std::exception& err) {
      d11 = d12 = std::string("exception: ") + err.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (wanted(11)) report(11, "recipe-end-to-end", p11, d11, secs);
    if (wanted(12)) report(12, "determinism", p12, d12, 0.0);
  }

  std::printf("%s: %d failure(s)\n", failures == 0 ? "ACCEPTANCE PASS" : "ACCEPTANCE FAIL", failures);
  return failures;
}
