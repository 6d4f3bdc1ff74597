#include "flowvi/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace flowvi {

double marginal_wasserstein(const SampleMatrix& A, const SampleMatrix& B) {
  if (A.rows() != B.rows() || A.cols() != B.cols())
    throw std::invalid_argument("marginal_wasserstein: sample matrices must have equal shape");
  if (A.rows() < 1 || A.cols() < 1) throw std::invalid_argument("marginal_wasserstein: empty input");
  const Eigen::Index S = A.rows();
  const Eigen::Index d = A.cols();
  std::vector<double> a(static_cast<std::size_t>(S)), b(static_cast<std::size_t>(S));
  double total = 0.0;
  for (Eigen::Index j = 0; j < d; ++j) {
    Eigen::VectorXd::Map(a.data(), S) = A.col(j);
    Eigen::VectorXd::Map(b.data(), S) = B.col(j);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double col = 0.0;
    for (Eigen::Index i = 0; i < S; ++i)
      col += std::fabs(a[static_cast<std::size_t>(i)] - b[static_cast<std::size_t>(i)]);
    total += col / static_cast<double>(S);
  }
  return total / static_cast<double>(d);
}

double w1_1d_oracle(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const int n = static_cast<int>(a.size());
  if (b.size() != n) throw std::invalid_argument("w1_1d_oracle: lengths must match");
  if (n < 1 || n > 256) throw std::invalid_argument("w1_1d_oracle: test-scale only (1..256 points)");

  // Assignment problem with potentials (Hungarian algorithm), 1-indexed.
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0), v(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<int> match(static_cast<std::size_t>(n) + 1, 0), way(static_cast<std::size_t>(n) + 1, 0);
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(n) + 1, kInf);
    std::vector<char> used(static_cast<std::size_t>(n) + 1, 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      const int i0 = match[static_cast<std::size_t>(j0)];
      double delta = kInf;
      int j1 = -1;
      for (int j = 1; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const double cur = std::fabs(a[i0 - 1] - b[j - 1]) - u[static_cast<std::size_t>(i0)] -
                           v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(match[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (match[static_cast<std::size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<std::size_t>(j0)];
      match[static_cast<std::size_t>(j0)] = match[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0);
  }

  double total = 0.0;
  for (int j = 1; j <= n; ++j) {
    const int i = match[static_cast<std::size_t>(j)];
    if (i != 0) total += std::fabs(a[i - 1] - b[j - 1]);
  }
  return total / static_cast<double>(n);
}

double baseline_value(const Target& target, RngState& rng, Eigen::Index S) {
  if (S < 2) throw std::invalid_argument("baseline_value: need at least two samples");
  const SampleMatrix a = target.exact_sample(rng, S);
  const SampleMatrix b = target.exact_sample(rng, S);
  return marginal_wasserstein(a, b);
}

SampleMatrix subsample_rows(const SampleMatrix& m, Eigen::Index n, RngState& rng) {
  const Eigen::Index S = m.rows();
  if (n > S) throw std::invalid_argument("subsample_rows: asked for more rows than available");
  if (n == S) return m;
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(S));
  for (Eigen::Index i = 0; i < S; ++i) idx[static_cast<std::size_t>(i)] = i;
  // partial Fisher-Yates
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index j =
        i + static_cast<Eigen::Index>(rng.next_unit() * static_cast<double>(S - i));
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(std::min(j, S - 1))]);
  }
  SampleMatrix out(n, m.cols());
  for (Eigen::Index i = 0; i < n; ++i) out.row(i) = m.row(idx[static_cast<std::size_t>(i)]);
  return out;
}

MetricReport marginal_wasserstein_equalized(const SampleMatrix& A, const SampleMatrix& B, RngState rng) {
  if (A.cols() != B.cols())
    throw std::invalid_argument("marginal_wasserstein_equalized: column counts must match");
  MetricReport report;
  report.sample_size_a = A.rows();
  report.sample_size_b = B.rows();
  const Eigen::Index n = std::min(A.rows(), B.rows());
  RngState sub_a = rng.split(0);
  RngState sub_b = rng.split(1);
  const SampleMatrix a = (A.rows() == n) ? A : subsample_rows(A, n, sub_a);
  const SampleMatrix b = (B.rows() == n) ? B : subsample_rows(B, n, sub_b);
  report.value = marginal_wasserstein(a, b);
  return report;
}

}  // namespace flowvi
