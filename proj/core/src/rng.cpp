#include "flowvi/rng.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace flowvi {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// SplitMix64 finalizer (Stafford mix 13).
inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

}  // namespace

RngState::RngState(std::uint64_t seed) : key_(mix64(seed ^ kGolden)), counter_(0) {}

RngState RngState::split(std::uint64_t label) const {
  const std::uint64_t child = mix64(mix64(key_ ^ 0xA0761D6478BD642FULL) + label * 0xE7037ED1A0B428DBULL + 1);
  return RngState(child, 0);
}

std::uint64_t RngState::next_u64() {
  counter_ += 1;
  return mix64(key_ + kGolden * counter_);
}

double RngState::next_unit() {
  // 53-bit mantissa shifted into (0,1); the +0.5 keeps both endpoints open.
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngState::next_normal() { return inverse_normal_cdf(next_unit()); }

SampleMatrix standard_normal_matrix(RngState& rng, Eigen::Index S, Eigen::Index d) {
  if (S < 1 || d < 1) throw std::invalid_argument("standard_normal_matrix: S and d must be >= 1");
  SampleMatrix out(S, d);
  double* p = out.data();
  const Eigen::Index n = S * d;
  for (Eigen::Index i = 0; i < n; ++i) p[i] = rng.next_normal();
  return out;
}

namespace {

// Marsaglia-Tsang squeeze sampler, shape >= 1.
double gamma_shape_ge1(RngState& rng, double shape) {
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = rng.next_normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.next_unit();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

}  // namespace

Eigen::VectorXd gamma_draws(RngState& rng, double shape, double scale, Eigen::Index n) {
  if (shape <= 0.0 || scale <= 0.0) throw std::invalid_argument("gamma_draws: shape and scale must be > 0");
  Eigen::VectorXd out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double g;
    if (shape >= 1.0) {
      g = gamma_shape_ge1(rng, shape);
    } else {
      // Shape boost: Gamma(a) = Gamma(a+1) * U^(1/a).
      g = gamma_shape_ge1(rng, shape + 1.0) * std::pow(rng.next_unit(), 1.0 / shape);
    }
    out[i] = g * scale;
  }
  return out;
}

Eigen::MatrixXd random_orthogonal(RngState& rng, Eigen::Index d) {
  if (d < 1) throw std::invalid_argument("random_orthogonal: d must be >= 1");
  const Eigen::MatrixXd g = standard_normal_matrix(rng, d, d);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR();
  for (Eigen::Index j = 0; j < d; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

double inverse_normal_cdf(double p) {
  // Wichura (1988), algorithm AS 241, PPND16.
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("inverse_normal_cdf: p must be in (0,1)");
  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    const double num =
        (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r + 6.7265770927008700853e4) * r +
             4.5921953931549871457e4) *
                r +
            1.3731693765509461125e4) *
               r +
           1.9715909503065514427e3) *
              r +
          1.3314166789178437745e2) *
             r +
         3.3871328727963666080e0);
    const double den =
        (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r + 3.9307895800092710610e4) * r +
             2.1213794301586595867e4) *
                r +
            5.3941960214247511077e3) *
               r +
           6.8718700749205790830e2) *
              r +
          4.2313330701600911252e1) *
             r +
         1.0);
    return q * num / den;
  }
  double r = (q < 0.0) ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double x;
  if (r <= 5.0) {
    r -= 1.6;
    const double num =
        (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r + 2.41780725177450611770e-1) * r +
             1.27045825245236838258e0) *
                r +
            3.64784832476320460504e0) *
               r +
           5.76949722146069140550e0) *
              r +
          4.63033784615654529590e0) *
             r +
         1.42343711074968357734e0);
    const double den =
        (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r + 1.51986665636164571966e-2) * r +
             1.48103976427480074590e-1) *
                r +
            6.89767334985100004550e-1) *
               r +
           1.67638483018380384940e0) *
              r +
          2.05319162663775882187e0) *
             r +
         1.0);
    x = num / den;
  } else {
    r -= 5.0;
    const double num =
        (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r + 1.24266094738807843860e-3) * r +
             2.65321895265761230930e-2) *
                r +
            2.96560571828504891230e-1) *
               r +
           1.78482653991729133580e0) *
              r +
          5.46378491116411436990e0) *
             r +
         6.65790464350110377720e0);
    const double den =
        (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r + 1.84631831751005468180e-5) * r +
             7.86869131145613259100e-4) *
                r +
            1.48753612908506148525e-2) *
               r +
           1.36929880922735805310e-1) *
              r +
          5.99832206555887937690e-1) *
             r +
         1.0);
    x = num / den;
  }
  return (q < 0.0) ? -x : x;
}

}  // namespace flowvi
