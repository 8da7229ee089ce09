#include "varioeta/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "varioeta/error.hpp"

namespace varioeta {

namespace {

constexpr double kPi = std::numbers::pi;

struct GaussLegendre {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

// Newton iteration on P_n from the Chebyshev-like initial guesses.
GaussLegendre gauss_legendre(std::size_t n) {
  GaussLegendre rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const std::size_t half = (n + 1) / 2;
  for (std::size_t i = 0; i < half; ++i) {
    double x = std::cos(kPi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
    double derivative = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * static_cast<double>(k) - 1.0) * x * p1 - (static_cast<double>(k) - 1.0) * p0) /
                          static_cast<double>(k);
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      derivative = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / derivative;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * derivative * derivative);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

template <typename F>
Complex integrate(const GaussLegendre& rule, double a, double b, F&& f) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  Complex sum = 0.0;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) sum += rule.weights[k] * f(mid + half * rule.nodes[k]);
  return half * sum;
}

Complex hankel_loop(double s, const HankelPath& path, HankelExponent exponent, std::size_t arc_nodes,
                    std::size_t leg_nodes) {
  const double power = exponent == HankelExponent::standard ? -s : s;
  const double delta = path.axis_offset;
  const auto integrand = [power](Complex t) { return std::exp(power * std::log(-t) - t); };

  // Panels [0, delta], [delta, 2 delta], [2 delta, 4 delta], ... resolve the
  // delta-scale structure near the origin.
  std::vector<double> breaks{0.0};
  for (double b = delta; b < path.truncation; b *= 2.0) breaks.push_back(b);
  breaks.push_back(path.truncation);
  const std::size_t panels = breaks.size() - 1;
  const std::size_t per_panel = std::max<std::size_t>(8, (leg_nodes + panels - 1) / panels);
  const GaussLegendre leg_rule = gauss_legendre(per_panel);
  const GaussLegendre arc_rule = gauss_legendre(arc_nodes);

  Complex total = 0.0;
  for (std::size_t p = 0; p < panels; ++p) {
    // Upper leg runs from +inf towards the origin, lower leg back out.
    total -= integrate(leg_rule, breaks[p], breaks[p + 1], [&](double x) { return integrand({x, delta}); });
    total += integrate(leg_rule, breaks[p], breaks[p + 1], [&](double x) { return integrand({x, -delta}); });
  }
  total += integrate(arc_rule, kPi / 2.0, 3.0 * kPi / 2.0, [&](double theta) {
    const Complex t = std::polar(delta, theta);
    return integrand(t) * Complex(0.0, 1.0) * t;
  });
  return -total / Complex(0.0, 2.0 * kPi);
}

}  // namespace

Complex gaussian_gf_eval(Complex z, double mu, double sigma) {
  if (!(sigma >= 0.0)) throw Error(ErrorCode::invalid_argument, "sigma must be non-negative");
  return std::exp(mu * z - 0.5 * sigma * sigma * z * z);
}

BranchValue sigma2_closed_form(Complex z) {
  if (z == Complex(0.0, 0.0)) throw Error(ErrorCode::domain, "closed form is singular at z = 0");
  if (z == Complex(1.0, 0.0)) throw Error(ErrorCode::domain, "closed form is singular at z = 1");
  BranchValue out;
  Complex ratio = (z - 1.0) / z;
  if (z.imag() == 0.0 && z.real() > 0.0 && z.real() < 1.0) {
    ratio = Complex(ratio.real(), 0.0);
    out.on_cut = true;
  }
  out.value = 1.0 + z * (1.0 + std::log(ratio));
  return out;
}

Complex sigma2_ode_solution(Complex z, double c, double d) {
  if (z == Complex(1.0, 0.0)) throw Error(ErrorCode::domain, "ODE solution is singular at z = 1");
  Complex w = 1.0 - z;
  // Upper-limit convention for z on (1, inf): 1 - z sits just below the cut.
  if (w.imag() == 0.0 && w.real() < 0.0) w = Complex(w.real(), -0.0);
  return d - c * std::log(w);
}

Complex ode_residual(const Evaluator& f, Complex z, double h) {
  if (!(h > 0.0)) throw Error(ErrorCode::invalid_argument, "step must be positive");
  const auto at = [&](double offset) {
    Complex v;
    try {
      v = f(z + offset);
    } catch (const Error& e) {
      throw Error(ErrorCode::domain, std::string("stencil point outside the evaluator's domain: ") + e.what());
    }
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      throw Error(ErrorCode::domain, "evaluator returned a non-finite value on the stencil");
    }
    return v;
  };
  const Complex m2 = at(-2.0 * h);
  const Complex m1 = at(-h);
  const Complex c0 = at(0.0);
  const Complex p1 = at(h);
  const Complex p2 = at(2.0 * h);
  const Complex first = (-p2 + 8.0 * p1 - 8.0 * m1 + m2) / (12.0 * h);
  const Complex second = (-p2 + 16.0 * p1 - 30.0 * c0 + 16.0 * m1 - m2) / (12.0 * h * h);
  return z * (1.0 - z) * second - z * first;
}

void CircleContour::validate() const {
  if (!(radius > 0.0 && radius < 1.0)) throw Error(ErrorCode::invalid_argument, "contour radius must lie in (0, 1)");
  if (nodes < 16 || nodes % 2 != 0) throw Error(ErrorCode::invalid_argument, "contour needs an even node count >= 16");
}

CoefficientResult cauchy_coefficient(const Evaluator& f, unsigned n, const CircleContour& contour) {
  contour.validate();
  const auto q = static_cast<double>(contour.nodes);
  Complex sum = 0.0;
  for (std::size_t k = 0; k < contour.nodes; ++k) {
    const double theta = 2.0 * kPi * static_cast<double>(k) / q;
    const Complex value = f(std::polar(contour.radius, theta));
    if (!std::isfinite(value.real()) || !std::isfinite(value.imag())) {
      throw Error(ErrorCode::non_finite, "evaluator is not finite on the contour");
    }
    // Reduce n*k modulo Q before forming the angle to keep it small.
    const auto phase = static_cast<double>((static_cast<std::uint64_t>(n) * k) % contour.nodes);
    sum += value * std::polar(1.0, -2.0 * kPi * phase / q);
  }
  const Complex coefficient = sum / (q * std::pow(contour.radius, static_cast<double>(n)));
  return {coefficient.real(), coefficient.imag()};
}

void HankelPath::validate() const {
  if (!(truncation > 0.0)) throw Error(ErrorCode::invalid_argument, "Hankel truncation must be positive");
  if (!(axis_offset > 0.0 && axis_offset <= 0.1)) {
    throw Error(ErrorCode::invalid_argument, "Hankel axis offset must lie in (0, 0.1]");
  }
  if (axis_offset >= truncation) throw Error(ErrorCode::invalid_argument, "Hankel truncation must exceed the offset");
  if (arc_nodes < 2 || leg_nodes < 2) throw Error(ErrorCode::invalid_argument, "Hankel node counts must be >= 2");
  if (!(tolerance > 0.0)) throw Error(ErrorCode::invalid_argument, "Hankel tolerance must be positive");
}

double reciprocal_gamma_hankel(double s, const HankelPath& path, HankelExponent exponent) {
  path.validate();
  if (!std::isfinite(s)) throw Error(ErrorCode::invalid_argument, "s must be finite");
  const Complex coarse = hankel_loop(s, path, exponent, path.arc_nodes, path.leg_nodes);
  const Complex fine = hankel_loop(s, path, exponent, 2 * path.arc_nodes, 2 * path.leg_nodes);
  const double change = std::abs(fine - coarse);
  if (!std::isfinite(change) || change > path.tolerance * std::max(1.0, std::abs(fine))) {
    throw Error(ErrorCode::convergence, "Hankel quadrature changed by " + std::to_string(change) +
                                            " under refinement at s = " + std::to_string(s));
  }
  return fine.real();
}

double asymptotic_variance(std::uint64_t n) {
  if (n == 0) throw Error(ErrorCode::invalid_argument, "asymptotic variance needs n >= 1");
  const auto x = static_cast<double>(n);
  return kEulerGamma / x - 1.0 / (x * x) - 1.0 / (2.0 * x * x * x);
}

}  // namespace varioeta
