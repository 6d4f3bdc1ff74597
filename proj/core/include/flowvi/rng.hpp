#pragma once

#include <cstdint>

#include <Eigen/Core>

namespace flowvi {

using SampleMatrix = Eigen::MatrixXd;

/// Splittable counter-based generator. A state is a (key, counter) pair;
/// draw i of a stream is a stateless hash of (key, i), so replaying a state
/// is bit-reproducible and child streams derived via split() never share
/// outputs with their parent.
class RngState {
 public:
  explicit RngState(std::uint64_t seed);

  /// Derive an independent child stream. Same (parent, label) always yields
  /// the same child; the derivation is order-sensitive, so
  /// split(split(s,0),1) != split(split(s,1),0).
  RngState split(std::uint64_t label) const;

  std::uint64_t next_u64();
  /// Uniform on the open interval (0,1), 53-bit resolution.
  double next_unit();
  /// Standard normal via the inverse CDF.
  double next_normal();

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

  friend bool operator==(const RngState&, const RngState&) = default;

 private:
  RngState(std::uint64_t key, std::uint64_t counter) : key_(key), counter_(counter) {}

  std::uint64_t key_;
  std::uint64_t counter_;
};

/// S x d matrix of i.i.d. N(0,1) draws; advances rng.
SampleMatrix standard_normal_matrix(RngState& rng, Eigen::Index S, Eigen::Index d);

/// n i.i.d. Gamma(shape, scale) draws, strictly positive.
Eigen::VectorXd gamma_draws(RngState& rng, double shape, double scale, Eigen::Index n);

/// Haar-distributed orthogonal d x d matrix (QR of a Gaussian matrix with
/// the sign-of-diagonal correction).
Eigen::MatrixXd random_orthogonal(RngState& rng, Eigen::Index d);

/// Inverse standard-normal CDF (Wichura's PPND16), accurate to ~1e-15.
double inverse_normal_cdf(double p);

}  // namespace flowvi
