#include "flowvi/targets.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace flowvi {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kEigenvalueFloor = 1e-6;
constexpr double kInf = std::numeric_limits<double>::infinity();

void check_dim(const Target& t, const SampleMatrix& Z) {
  if (Z.cols() != t.dim()) throw std::invalid_argument("target: sample matrix has wrong column count");
}

}  // namespace

Target build_target(const TargetSpec& spec) {
  if (spec.dim < 1) throw std::invalid_argument("target: dim must be >= 1");
  if (spec.kind == TargetKind::Funana && spec.dim < 3)
    throw std::invalid_argument("target: funana needs at least three dimensions");
  if (spec.kind == TargetKind::StudentT && !(spec.nu > 0.0))
    throw std::invalid_argument("target: student_t needs nu > 0");
  if (spec.kind == TargetKind::Banana && spec.dim < 2)
    throw std::invalid_argument("target: banana needs at least two dimensions");

  Target t;
  t.spec_ = spec;
  switch (spec.kind) {
    case TargetKind::IllConditionedGaussian: {
      RngState rng(spec.construction_seed);
      Eigen::VectorXd lambda = gamma_draws(rng, 0.5, 1.0, spec.dim).cwiseMax(kEigenvalueFloor);
      const Eigen::MatrixXd q = random_orthogonal(rng, spec.dim);
      t.sigma_ = q * lambda.asDiagonal() * q.transpose();
      t.sigma_ = 0.5 * (t.sigma_ + t.sigma_.transpose()).eval();
      t.sigma_llt_.compute(t.sigma_);
      if (t.sigma_llt_.info() != Eigen::Success)
        throw std::runtime_error("target: covariance factorization failed");
      t.log_det_sigma_ = lambda.array().log().sum();
      break;
    }
    case TargetKind::StudentT: {
      const double nu = spec.nu;
      const double d = static_cast<double>(spec.dim);
      t.t_log_norm_ = std::lgamma(0.5 * (nu + d)) - std::lgamma(0.5 * nu) - 0.5 * d * std::log(nu * M_PI);
      break;
    }
    default:
      break;
  }
  return t;
}

Target Target::standard_gaussian(Eigen::Index dim) {
  if (dim < 1) throw std::invalid_argument("target: dim must be >= 1");
  Target t;
  t.spec_ = TargetSpec{TargetKind::IllConditionedGaussian, dim, 2.5, 0};
  t.sigma_ = Eigen::MatrixXd::Identity(dim, dim);
  t.sigma_llt_.compute(t.sigma_);
  t.log_det_sigma_ = 0.0;
  return t;
}

const Eigen::MatrixXd& Target::covariance() const {
  if (spec_.kind != TargetKind::IllConditionedGaussian)
    throw std::logic_error("target: covariance only defined for the Gaussian target");
  return sigma_;
}

const Eigen::LLT<Eigen::MatrixXd>& Target::covariance_llt() const {
  if (spec_.kind != TargetKind::IllConditionedGaussian)
    throw std::logic_error("target: covariance only defined for the Gaussian target");
  return sigma_llt_;
}

double Target::log_det_covariance() const {
  if (spec_.kind != TargetKind::IllConditionedGaussian)
    throw std::logic_error("target: covariance only defined for the Gaussian target");
  return log_det_sigma_;
}

Eigen::VectorXd Target::log_density(const SampleMatrix& Z) const {
  check_dim(*this, Z);
  const Eigen::Index S = Z.rows();
  const Eigen::Index d = Z.cols();
  Eigen::VectorXd lp(S);

  switch (spec_.kind) {
    case TargetKind::IllConditionedGaussian: {
      // log N(z | 0, Sigma) via the cached Cholesky factor.
      const Eigen::MatrixXd y =
          sigma_llt_.matrixL().solve(Z.transpose());  // solves L y = z per column
      lp = -0.5 * (static_cast<double>(d) * kLog2Pi + log_det_sigma_) -
           0.5 * y.colwise().squaredNorm().transpose().array();
      break;
    }
    case TargetKind::Banana: {
      for (Eigen::Index i = 0; i < S; ++i) {
        const double z1 = Z(i, 0);
        const double m = 0.03 * (z1 * z1 - 100.0);
        double acc = -0.5 * z1 * z1 / 100.0 - 0.5 * std::log(100.0) - 0.5 * kLog2Pi;
        const double r2 = Z(i, 1) - m;
        acc += -0.5 * r2 * r2 - 0.5 * kLog2Pi;
        for (Eigen::Index j = 2; j < d; ++j) acc += -0.5 * Z(i, j) * Z(i, j) - 0.5 * kLog2Pi;
        lp[i] = acc;
      }
      break;
    }
    case TargetKind::Funnel: {
      // Everything stays in log space: log N(x|0, e^{z1}) =
      // -log(2*pi)/2 - z1/2 - x^2 e^{-z1}/2, and an overflowing e^{-z1}
      // yields a -inf tail rather than NaN.
      for (Eigen::Index i = 0; i < S; ++i) {
        const double z1 = Z(i, 0);
        const double w = std::exp(-z1);
        double acc = -0.5 * z1 * z1 / 9.0 - 0.5 * std::log(9.0) - 0.5 * kLog2Pi;
        for (Eigen::Index j = 1; j < d; ++j) {
          const double x = Z(i, j);
          const double q = (x == 0.0) ? 0.0 : x * x * w;
          acc += -0.5 * kLog2Pi - 0.5 * z1 - 0.5 * q;
        }
        lp[i] = acc;
      }
      break;
    }
    case TargetKind::Funana: {
      for (Eigen::Index i = 0; i < S; ++i) {
        const double z1 = Z(i, 0);
        const double m = 0.03 * (z1 * z1 - 100.0);
        const double w = std::exp(-z1);
        double acc = -0.5 * z1 * z1 / 9.0 - 0.5 * std::log(9.0) - 0.5 * kLog2Pi;
        acc += -0.5 * Z(i, 1) * Z(i, 1) / 100.0 - 0.5 * std::log(100.0) - 0.5 * kLog2Pi;
        for (Eigen::Index j = 2; j < d; ++j) {
          const double r = Z(i, j) - m;
          const double q = (r == 0.0) ? 0.0 : r * r * w;
          acc += -0.5 * kLog2Pi - 0.5 * z1 - 0.5 * q;
        }
        lp[i] = acc;
      }
      break;
    }
    case TargetKind::StudentT: {
      const double nu = spec_.nu;
      lp = t_log_norm_ -
           0.5 * (nu + static_cast<double>(d)) *
               (Z.rowwise().squaredNorm().array() / nu).log1p();
      break;
    }
  }
  return lp;
}

SampleMatrix Target::exact_sample(RngState& rng, Eigen::Index S) const {
  if (S < 1) throw std::invalid_argument("target: sample count must be >= 1");
  const Eigen::Index d = spec_.dim;
  SampleMatrix n = standard_normal_matrix(rng, S, d);

  switch (spec_.kind) {
    case TargetKind::IllConditionedGaussian: {
      SampleMatrix z(S, d);
      z.noalias() = n * Eigen::MatrixXd(sigma_llt_.matrixL()).transpose();
      return z;
    }
    case TargetKind::Banana: {
      n.col(0) *= 10.0;
      n.col(1) += (0.03 * (n.col(0).array().square() - 100.0)).matrix();
      return n;
    }
    case TargetKind::Funnel: {
      n.col(0) *= 3.0;
      const Eigen::ArrayXd sd = (0.5 * n.col(0).array()).exp();
      for (Eigen::Index j = 1; j < d; ++j) n.col(j).array() *= sd;
      return n;
    }
    case TargetKind::Funana: {
      n.col(0) *= 3.0;
      n.col(1) *= 10.0;
      const Eigen::ArrayXd sd = (0.5 * n.col(0).array()).exp();
      const Eigen::ArrayXd m = 0.03 * (n.col(0).array().square() - 100.0);
      for (Eigen::Index j = 2; j < d; ++j) n.col(j).array() = m + sd * n.col(j).array();
      return n;
    }
    case TargetKind::StudentT: {
      // z = x * sqrt(nu / g), g ~ chi^2_nu = Gamma(nu/2, 2).
      const Eigen::VectorXd g = gamma_draws(rng, 0.5 * spec_.nu, 2.0, S);
      const Eigen::ArrayXd scale = (spec_.nu / g.array()).sqrt();
      n.array().colwise() *= scale;
      return n;
    }
  }
  return n;  // unreachable
}

TargetSpec parse_target_name(const std::string& name, std::uint64_t construction_seed) {
  const auto dash = name.rfind('-');
  if (dash == std::string::npos || dash + 1 >= name.size())
    throw std::invalid_argument("target name needs a dimension suffix, e.g. \"funnel-10\": " + name);
  const std::string base = name.substr(0, dash);
  Eigen::Index dim = 0;
  try {
    dim = static_cast<Eigen::Index>(std::stol(name.substr(dash + 1)));
  } catch (const std::exception&) {
    throw std::invalid_argument("target name has a non-numeric dimension suffix: " + name);
  }

  TargetSpec spec;
  spec.dim = dim;
  spec.construction_seed = construction_seed;
  if (base == "icg") {
    spec.kind = TargetKind::IllConditionedGaussian;
  } else if (base == "banana") {
    spec.kind = TargetKind::Banana;
  } else if (base == "funnel") {
    spec.kind = TargetKind::Funnel;
  } else if (base == "funana") {
    spec.kind = TargetKind::Funana;
  } else if (base == "student_t_1_5") {
    spec.kind = TargetKind::StudentT;
    spec.nu = 1.5;
  } else if (base == "student_t_2_5") {
    spec.kind = TargetKind::StudentT;
    spec.nu = 2.5;
  } else {
    throw std::invalid_argument("unknown target name: " + name);
  }
  return spec;
}

Target build_target_by_name(const std::string& name, std::uint64_t construction_seed) {
  return build_target(parse_target_name(name, construction_seed));
}

std::vector<std::string> target_base_names() {
  return {"icg", "banana", "funnel", "funana", "student_t_1_5", "student_t_2_5"};
}

}  // namespace flowvi
