#pragma once

#include <complex>

namespace qlchain {

using cplx = std::complex<double>;

// Bath force autocorrelation K(t) = int_0^inf S(w) cos(w t) dw with the
// Drude-Ullersma density
//   S(w) = (gamma/pi) w Gamma^2/(Gamma^2+w^2) coth(w / 2T).
// `classical` replaces coth(w/2T) by 2T/w.
struct NoiseKernelSpec {
  double gamma = 1.0;
  double cutoff = 10.0;
  double temperature = 0.0;
  bool classical = false;

  double spectral_density(double w) const;
  // Analytic continuation into Re(w) > 0 (S is even on the real line).
  cplx spectral_density(cplx w) const;
};

cplx digamma(cplx z);
cplx trigamma(cplx z);

// J(lambda) = int_0^inf S(w) / (w^2 + lambda^2) dw for Re(lambda) < 0,
// in closed form (Matsubara series summed with the digamma function).
cplx single_pole_integral(cplx lambda, const NoiseKernelSpec& k);

// I(lambda, mu) = int_0^inf S(w) (lambda mu + w^2) / ((lambda^2+w^2)(mu^2+w^2)) dw
//               = (lambda J(lambda) + mu J(mu)) / (lambda + mu).
cplx pair_integral(cplx lambda, cplx mu, const NoiseKernelSpec& k);

// Same integral by adaptive Gauss-Kronrod quadrature on the real axis,
// split at the peak scales |Im lambda|, |Im mu| and Gamma. Independent of
// the closed form; throws NumericError on non-convergence.
cplx omega_integral_pair(cplx lambda, cplx mu, const NoiseKernelSpec& k, double rel_tol = 1e-11);

// Lagged single-pole integrals, tau >= 0:
//   Phi(lambda, tau) = 1/2 int_R S(w) e^{i w tau} / (lambda + i w) dw
//   Psi(lambda, tau) = 1/2 int_R S(w) e^{i w tau} / (lambda - i w) dw
// evaluated on rays rotated off the real axis (plus the residue of the
// pole when the rotation sweeps over it).
cplx lagged_phi(cplx lambda, double tau, const NoiseKernelSpec& k);
cplx lagged_psi(cplx lambda, double tau, const NoiseKernelSpec& k);

// C(lambda, mu; tau) = 1/2 int_R S(w) e^{i w tau} / ((lambda + i w)(mu - i w)) dw,
// the stationary weight of exp(lambda u) exp(mu u') for a lag tau.
cplx lagged_pair_integral(cplx lambda, cplx mu, double tau, const NoiseKernelSpec& k);

// Real-axis quadrature of C(lambda, mu; tau); test oracle.
cplx lagged_pair_integral_quadrature(cplx lambda, cplx mu, double tau, const NoiseKernelSpec& k,
                                     double rel_tol = 1e-10);

}  // namespace qlchain
