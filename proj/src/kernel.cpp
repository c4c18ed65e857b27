#include "qlchain/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qlchain/errors.hpp"
#include "qlchain/quadrature.hpp"

namespace qlchain {

namespace {

constexpr double kPi = std::numbers::pi;
const cplx kI{0.0, 1.0};

cplx coth(cplx z) {
  if (std::abs(z) < 1e-4) return 1.0 / z + z / 3.0;
  if (z.real() > 20.0) return 1.0;
  return 1.0 / std::tanh(z);
}

// log(1 + x) / x for complex x, stable near 0.
cplx log1p_over(cplx x) {
  if (std::abs(x) < 1e-3) {
    cplx term = 1.0, sum = 0.0;
    for (int n = 1; n <= 8; ++n) {
      sum += term / static_cast<double>(n);
      term *= -x;
    }
    return sum;
  }
  return std::log(1.0 + x) / x;
}

}  // namespace

double NoiseKernelSpec::spectral_density(double w) const {
  const double lorentz = gamma / kPi * cutoff * cutoff / (cutoff * cutoff + w * w);
  if (classical) return lorentz * 2.0 * temperature;
  if (temperature <= 0.0) return lorentz * w;
  const double x = w / (2.0 * temperature);
  if (x < 1e-4) return lorentz * (2.0 * temperature + w * x / 3.0);
  if (x > 20.0) return lorentz * w;
  return lorentz * w / std::tanh(x);
}

cplx NoiseKernelSpec::spectral_density(cplx w) const {
  const cplx lorentz = gamma / kPi * cutoff * cutoff / (cutoff * cutoff + w * w);
  if (classical) return lorentz * 2.0 * temperature;
  if (temperature <= 0.0) return lorentz * w;
  const cplx x = w / (2.0 * temperature);
  if (std::abs(x) < 1e-4) return lorentz * (2.0 * temperature + w * x / 3.0);
  return lorentz * w * coth(x);
}

cplx digamma(cplx z) {
  cplx shift = 0.0;
  while (std::abs(z) < 12.0 || z.real() < 6.0) {
    shift -= 1.0 / z;
    z += 1.0;
  }
  const cplx r = 1.0 / z;
  const cplx r2 = r * r;
  const cplx series =
      r2 * (-1.0 / 12 +
            r2 * (1.0 / 120 +
                  r2 * (-1.0 / 252 +
                        r2 * (1.0 / 240 + r2 * (-1.0 / 132 + r2 * (691.0 / 32760 + r2 * (-1.0 / 12)))))));
  return shift + std::log(z) - 0.5 * r + series;
}

cplx trigamma(cplx z) {
  cplx shift = 0.0;
  while (std::abs(z) < 12.0 || z.real() < 6.0) {
    shift += 1.0 / (z * z);
    z += 1.0;
  }
  const cplx r = 1.0 / z;
  const cplx r2 = r * r;
  const cplx series =
      r * (1.0 + r * (0.5 + r * (1.0 / 6 + r2 * (-1.0 / 30 + r2 * (1.0 / 42 + r2 * (-1.0 / 30 + r2 * (5.0 / 66)))))));
  return shift + series;
}

cplx single_pole_integral(cplx lambda, const NoiseKernelSpec& k) {
  if (!(lambda.real() < 0.0)) throw NumericError("single_pole_integral needs Re(lambda) < 0");
  const cplx mu = -lambda;  // Re(mu) > 0
  const double g = k.gamma, c = k.cutoff, t = k.temperature;
  // n = 0 Matsubara term (identical to the classical kernel).
  const cplx classical_part = g * c * t / (mu * (c + mu));
  if (k.classical) return classical_part;
  const cplx pre = g * c * c / (kPi * (c + mu));
  const cplx delta = (mu - c) / c;
  if (t <= 0.0) return pre * log1p_over(delta) / c;
  // sum_{n>=1} 2T/((nu_n + mu)(nu_n + Gamma)) pi-scaled via digamma
  const double scale = 2.0 * kPi * t;
  cplx divided;
  if (std::abs(delta) < 1e-5) {
    divided = trigamma(1.0 + 0.5 * (mu + c) / scale) / scale;
  } else {
    divided = (digamma(1.0 + mu / scale) - digamma(1.0 + c / scale)) / (mu - c);
  }
  return classical_part + pre * divided;
}

cplx pair_integral(cplx lambda, cplx mu, const NoiseKernelSpec& k) {
  return (lambda * single_pole_integral(lambda, k) + mu * single_pole_integral(mu, k)) /
         (lambda + mu);
}

cplx omega_integral_pair(cplx lambda, cplx mu, const NoiseKernelSpec& k, double rel_tol) {
  if (!(lambda.real() < 0.0) || !(mu.real() < 0.0)) {
    throw NumericError("omega_integral_pair needs Re(lambda), Re(mu) < 0");
  }
  auto f = [&](double w) -> cplx {
    const cplx w2 = w * w;
    return k.spectral_density(w) * (lambda * mu + w2) / ((lambda * lambda + w2) * (mu * mu + w2));
  };
  QuadratureOptions opt;
  opt.rel_tol = rel_tol;
  opt.abs_tol = 1e-15;
  opt.max_intervals = 20000;
  const double scale = std::max({std::abs(lambda), std::abs(mu), 1.0});
  for (cplx z : {lambda, mu}) {
    const double peak = std::abs(z.imag());
    const double width = std::abs(z.real());
    if (peak > 0.0) {
      opt.breakpoints.push_back(peak);
      for (double m : {1.0, 10.0, 100.0}) {
        opt.breakpoints.push_back(peak - m * width);
        opt.breakpoints.push_back(peak + m * width);
      }
    }
  }
  opt.breakpoints.push_back(k.cutoff);
  return integrate_to_infinity(f, 0.0, scale, opt).value;
}

namespace {

// 1/2 int_0^inf h(w) dw along the ray w = r e^{i theta}.
template <typename H>
cplx ray_integral(H h, double theta, double scale, std::vector<double> breaks) {
  const cplx dir = std::polar(1.0, theta);
  auto f = [&](double r) -> cplx { return h(r * dir) * dir; };
  QuadratureOptions opt;
  opt.rel_tol = 1e-12;
  opt.abs_tol = 1e-16;
  opt.max_intervals = 20000;
  opt.breakpoints = std::move(breaks);
  return 0.5 * integrate_to_infinity(f, 0.0, scale, opt).value;
}

double ray_angle_avoiding(double pole_angle) {
  constexpr double q = kPi / 4.0;
  if (pole_angle <= 0.0 || pole_angle >= 2.0 * q) return q;
  return pole_angle > q ? 0.5 * pole_angle : 0.5 * (pole_angle + 2.0 * q);
}

std::vector<double> scales(cplx lambda, const NoiseKernelSpec& k, double tau) {
  std::vector<double> b{std::abs(lambda), k.cutoff};
  if (k.temperature > 0.0) b.push_back(2.0 * kPi * k.temperature);
  if (tau > 0.0) b.push_back(1.0 / tau);
  return b;
}

}  // namespace

cplx lagged_phi(cplx lambda, double tau, const NoiseKernelSpec& k) {
  if (!(lambda.real() < 0.0)) throw NumericError("lagged_phi needs Re(lambda) < 0");
  if (tau == 0.0) return lambda * single_pole_integral(lambda, k);
  const double theta = kPi / 4.0;
  const double scale = std::abs(lambda) + 1.0;
  auto br = scales(lambda, k, tau);
  // upper: S(w) e^{i w tau}/(lambda + i w), pole at i lambda (lower half plane)
  const cplx upper = ray_integral(
      [&](cplx w) { return k.spectral_density(w) * std::exp(kI * w * tau) / (lambda + kI * w); },
      theta, scale, br);
  // lower: S(w) e^{-i w tau}/(lambda - i w), pole at -i lambda (upper half plane)
  const cplx lower = ray_integral(
      [&](cplx w) { return k.spectral_density(w) * std::exp(-kI * w * tau) / (lambda - kI * w); },
      -theta, scale, br);
  return upper + lower;
}

cplx lagged_psi(cplx lambda, double tau, const NoiseKernelSpec& k) {
  if (!(lambda.real() < 0.0)) throw NumericError("lagged_psi needs Re(lambda) < 0");
  if (tau == 0.0) return lambda * single_pole_integral(lambda, k);
  const double a = -lambda.real();
  const double b = lambda.imag();
  const double scale = std::abs(lambda) + 1.0;
  auto br = scales(lambda, k, tau);
  // Pole of the integrand after folding onto Re(w) > 0: w = |b| + i a for
  // the upper (b > 0) or w = -b - i a for the lower (b < 0) ray.
  const double pole_angle = std::atan2(a, std::abs(b));
  const double theta = b != 0.0 ? ray_angle_avoiding(pole_angle) : kPi / 4.0;
  const double theta_up = b > 0.0 ? theta : kPi / 4.0;
  const double theta_dn = b < 0.0 ? theta : kPi / 4.0;

  cplx total = ray_integral(
      [&](cplx w) { return k.spectral_density(w) * std::exp(kI * w * tau) / (lambda - kI * w); },
      theta_up, scale, br);
  total += ray_integral(
      [&](cplx w) { return k.spectral_density(w) * std::exp(-kI * w * tau) / (lambda + kI * w); },
      -theta_dn, scale, br);
  const bool crossed = (b > 0.0 && pole_angle < theta_up) || (b < 0.0 && pole_angle < theta_dn);
  if (crossed) {
    const cplx w0 = b > 0.0 ? -kI * lambda : kI * lambda;  // Re(w0) > 0
    total += -kPi * k.spectral_density(w0) * std::exp(lambda * tau);
  }
  return total;
}

cplx lagged_pair_integral(cplx lambda, cplx mu, double tau, const NoiseKernelSpec& k) {
  if (tau == 0.0) return pair_integral(lambda, mu, k);
  return (lagged_phi(lambda, tau, k) + lagged_psi(mu, tau, k)) / (lambda + mu);
}

cplx lagged_pair_integral_quadrature(cplx lambda, cplx mu, double tau, const NoiseKernelSpec& k,
                                     double rel_tol) {
  // Fold the full line onto w >= 0 using S(-w) = S(w).
  auto f = [&](double w) -> cplx {
    const cplx e = std::exp(kI * w * tau);
    return 0.5 * k.spectral_density(w) *
           (e / ((lambda + kI * w) * (mu - kI * w)) + std::conj(e) / ((lambda - kI * w) * (mu + kI * w)));
  };
  QuadratureOptions opt;
  opt.rel_tol = rel_tol;
  opt.abs_tol = 1e-14;
  opt.max_intervals = 200000;
  for (cplx z : {lambda, mu}) {
    if (z.imag() != 0.0) opt.breakpoints.push_back(std::abs(z.imag()));
  }
  opt.breakpoints.push_back(k.cutoff);
  const double scale = std::max({std::abs(lambda), std::abs(mu), 1.0});
  return integrate_to_infinity(f, 0.0, scale, opt).value;
}

}  // namespace qlchain
