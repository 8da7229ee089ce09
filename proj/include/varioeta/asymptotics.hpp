#pragma once

// Generating-function evaluators and the quadratures used to check the
// asymptotic variance law sigma_n^2 ~ gamma/n - 1/n^2 - 1/(2 n^3).
//
// Branch conventions: the principal logarithm is used everywhere. Points on
// a branch cut are evaluated as the limit from the upper half-plane and the
// result is flagged.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>

namespace varioeta {

using Complex = std::complex<double>;
using Evaluator = std::function<Complex(Complex)>;

/// Euler-Mascheroni constant, 20 significant digits.
inline constexpr double kEulerGamma = 0.57721566490153286061;

/// exp(mu z - sigma^2 z^2 / 2). Note the sign of the quadratic term: this is
/// neither the moment generating function nor the characteristic function
/// of a normal law.
Complex gaussian_gf_eval(Complex z, double mu, double sigma);

struct BranchValue {
  Complex value;
  bool on_cut = false;
};

/// 1 + z (1 + log((z - 1) / z)). z = 0 and z = 1 are singular. For real z in
/// (0, 1) the ratio lies on the negative real axis and the upper limit
/// (log = ln|.| + i pi) is returned with on_cut set.
///
/// This closed form does not satisfy z(1-z) f'' - z f' = 0; its residual is
/// -1 - z - z log((z-1)/z).
BranchValue sigma2_closed_form(Complex z);

/// D + C log(1 / (1 - z)): the general solution of z(1-z) f'' - z f' = 0.
/// Its Taylor coefficients are C/n for n >= 1. Undefined on [1, inf); real
/// z > 1 takes the upper limit.
Complex sigma2_ode_solution(Complex z, double c, double d);

/// z (1 - z) f''(z) - z f'(z) from fourth-order central differences with a
/// real step h. Raises ErrorCode::domain when the evaluator fails or returns
/// a non-finite value at any stencil point.
Complex ode_residual(const Evaluator& f, Complex z, double h = 1e-3);

struct CircleContour {
  double radius = 0.5;
  std::size_t nodes = 512;

  /// radius in (0, 1), nodes even and >= 16.
  void validate() const;
};

struct CoefficientResult {
  double value = 0.0;
  double imag_residual = 0.0;  // imaginary part of the quadrature, ~0 for real series
};

/// [z^n] f by the trapezoidal rule on a circle about the origin:
/// (1 / (Q r^n)) sum_k f(r w^k) w^(-nk), w = exp(2 pi i / Q).
CoefficientResult cauchy_coefficient(const Evaluator& f, unsigned n, const CircleContour& contour = {});

enum class HankelExponent {
  standard,  // (-t)^(-s): reproduces 1/Gamma(s)
  printed,   // (-t)^(+s): kept to demonstrate that it does not
};

struct HankelPath {
  double truncation = 40.0;    // legs run from Re t = 0 to T
  double axis_offset = 1e-3;   // legs at Im t = +-delta; arc radius delta
  std::size_t arc_nodes = 64;  // Gauss-Legendre nodes on the arc
  std::size_t leg_nodes = 320; // Gauss-Legendre nodes per leg, over graded panels
  double tolerance = 1e-8;     // allowed change when node counts double

  void validate() const;
};

/// 1/Gamma(s) = -(1 / 2 pi i) int_H (-t)^(-s) e^(-t) dt, H looping from +inf
/// above the positive axis, around the origin, back to +inf below. The
/// integral is evaluated at the given resolution and at twice the node
/// counts; disagreement beyond path.tolerance raises ErrorCode::convergence.
double reciprocal_gamma_hankel(double s, const HankelPath& path = {},
                               HankelExponent exponent = HankelExponent::standard);

/// gamma/n - 1/n^2 - 1/(2 n^3), returned as-is (it is negative for n <= 2).
double asymptotic_variance(std::uint64_t n);

}  // namespace varioeta
