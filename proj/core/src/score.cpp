#include "flowvi/score.hpp"

#include <cmath>
#include <stdexcept>

namespace flowvi {

ScoreResult score(const Target& target, const SampleMatrix& Z) {
  if (Z.cols() != target.dim()) throw std::invalid_argument("score: sample matrix has wrong column count");
  const Eigen::Index S = Z.rows();
  const Eigen::Index d = Z.cols();
  SampleMatrix g(S, d);

  switch (target.kind()) {
    case TargetKind::IllConditionedGaussian: {
      g.noalias() = -target.covariance_llt().solve(Z.transpose()).transpose();
      break;
    }
    case TargetKind::Banana: {
      for (Eigen::Index i = 0; i < S; ++i) {
        const double z1 = Z(i, 0);
        const double r2 = Z(i, 1) - 0.03 * (z1 * z1 - 100.0);
        g(i, 0) = -z1 / 100.0 + 0.06 * z1 * r2;
        g(i, 1) = -r2;
        for (Eigen::Index j = 2; j < d; ++j) g(i, j) = -Z(i, j);
      }
      break;
    }
    case TargetKind::Funnel: {
      for (Eigen::Index i = 0; i < S; ++i) {
        const double z1 = Z(i, 0);
        const double w = std::exp(-z1);
        double sumsq = 0.0;
        for (Eigen::Index j = 1; j < d; ++j) sumsq += Z(i, j) * Z(i, j);
        g(i, 0) = -z1 / 9.0 - 0.5 * static_cast<double>(d - 1) + ((sumsq == 0.0) ? 0.0 : 0.5 * w * sumsq);
        for (Eigen::Index j = 1; j < d; ++j) g(i, j) = -Z(i, j) * w;
      }
      break;
    }
    case TargetKind::Funana: {
      for (Eigen::Index i = 0; i < S; ++i) {
        const double z1 = Z(i, 0);
        const double m = 0.03 * (z1 * z1 - 100.0);
        const double w = std::exp(-z1);
        double g1 = -z1 / 9.0;
        for (Eigen::Index j = 2; j < d; ++j) {
          const double r = Z(i, j) - m;
          const double rw = (r == 0.0) ? 0.0 : r * w;
          g1 += -0.5 + 0.06 * z1 * rw + 0.5 * r * rw;
          g(i, j) = -rw;
        }
        g(i, 0) = g1;
        g(i, 1) = -Z(i, 1) / 100.0;
      }
      break;
    }
    case TargetKind::StudentT: {
      const double nu = target.spec().nu;
      const Eigen::ArrayXd coef =
          -(nu + static_cast<double>(d)) / (nu + Z.rowwise().squaredNorm().array());
      g = Z.array().colwise() * coef;
      break;
    }
  }
  return ScoreResult{std::move(g)};
}

}  // namespace flowvi
