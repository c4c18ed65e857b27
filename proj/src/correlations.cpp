#include "qlchain/correlations.hpp"

#include <cmath>
#include <sstream>

#include "qlchain/errors.hpp"

namespace qlchain {

namespace {

struct Blocks {
  Eigen::MatrixXcd pos, mom, cross;
};

// rho_Y = residues (M = 1), rho_Q = lambda * residues.
Blocks contract(const Eigen::MatrixXcd& res, const Eigen::VectorXcd& poles, const Eigen::MatrixXcd& h) {
  const Eigen::MatrixXcd rq = res * poles.asDiagonal();
  Blocks b;
  const Eigen::MatrixXcd rh = res * h;
  b.pos = rh * res.transpose();
  b.cross = rh * rq.transpose();
  b.mom = rq * h * rq.transpose();
  return b;
}

void accumulate(Blocks& total, const Blocks& part) {
  if (total.pos.size() == 0) {
    total = part;
    return;
  }
  total.pos += part.pos;
  total.mom += part.mom;
  total.cross += part.cross;
}

CorrelationMatrices take_real(const Blocks& b, double time) {
  CorrelationMatrices c;
  c.pos = b.pos.real();
  c.mom = b.mom.real();
  c.cross = b.cross.real();
  c.time = time;
  const double scale = std::max({c.pos.cwiseAbs().maxCoeff(), c.mom.cwiseAbs().maxCoeff(), 1e-300});
  c.imaginary_residual = std::max({b.pos.imag().cwiseAbs().maxCoeff(), b.mom.imag().cwiseAbs().maxCoeff(),
                                   b.cross.imag().cwiseAbs().maxCoeff()}) /
                         scale;
  if (c.imaginary_residual > 1e-6) {
    std::ostringstream os;
    os << "correlations are not real: relative imaginary part " << c.imaginary_residual;
    throw NumericError(os.str());
  }
  return c;
}

Eigen::VectorXcd pole_integrals(const Eigen::VectorXcd& poles, const NoiseKernelSpec& k) {
  Eigen::VectorXcd j(poles.size());
  for (Eigen::Index m = 0; m < poles.size(); ++m) j(m) = single_pole_integral(poles(m), k);
  return j;
}

Eigen::MatrixXcd pair_matrix(const Eigen::VectorXcd& poles, const Eigen::VectorXcd& j) {
  const Eigen::Index n = poles.size();
  Eigen::MatrixXcd h(n, n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b)
      h(a, b) = (poles(a) * j(a) + poles(b) * j(b)) / (poles(a) + poles(b));
  return h;
}

}  // namespace

NoiseKernelSpec bath_kernel(const BathConfig& bath, double temperature, NoiseModel model) {
  NoiseKernelSpec k;
  k.gamma = bath.gamma;
  k.cutoff = bath.cutoff;
  k.temperature = temperature;
  k.classical = model == NoiseModel::Classical;
  return k;
}

CorrelationMatrices stationary_correlations(const ResponseSet& resp, const BathConfig& bath,
                                            NoiseModel model) {
  Blocks total;
  for (bool a : {true, false}) {
    const auto k = bath_kernel(bath, a ? bath.Ta : bath.Tb, model);
    const Eigen::MatrixXcd h = pair_matrix(resp.poles, pole_integrals(resp.poles, k));
    accumulate(total, contract(a ? resp.left : resp.right, resp.poles, h));
  }
  return take_real(total, std::numeric_limits<double>::infinity());
}

CorrelationMatrices thermal_chain_state(const ModeBasis& basis, double temperature) {
  const int l = basis.size();
  CorrelationMatrices c;
  c.pos = Eigen::MatrixXd::Zero(l, l);
  c.mom = Eigen::MatrixXd::Zero(l, l);
  c.cross = Eigen::MatrixXd::Zero(l, l);
  c.time = 0.0;
  for (int i = 0; i < l; ++i) {
    const double w = basis.frequencies(i);
    const double ct = temperature > 0.0 ? 1.0 / std::tanh(w / (2.0 * temperature)) : 1.0;
    c.pos(i, i) = ct / (2.0 * w);
    c.mom(i, i) = w * ct / 2.0;
  }
  return c;
}

CorrelationMatrices transient_correlations(const ResponseSet& resp, const BathConfig& bath,
                                           const CorrelationMatrices& initial, double t,
                                           NoiseModel model) {
  if (t < 0.0) throw ValidationError("transient time must be non-negative");
  if (t == 0.0) {
    CorrelationMatrices c = initial;
    c.time = 0.0;
    return c;
  }
  const Eigen::VectorXcd& lam = resp.poles;
  const Eigen::Index n = lam.size();
  Blocks total;
  for (bool a : {true, false}) {
    const auto k = bath_kernel(bath, a ? bath.Ta : bath.Tb, model);
    const Eigen::VectorXcd j = pole_integrals(lam, k);
    Eigen::VectorXcd phi(n), psi(n), e(n);
    for (Eigen::Index m = 0; m < n; ++m) {
      phi(m) = lagged_phi(lam(m), t, k);
      psi(m) = lagged_psi(lam(m), t, k);
      e(m) = std::exp(lam(m) * t);
    }
    Eigen::MatrixXcd w(n, n);
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = 0; q < n; ++q) {
        const cplx s = lam(p) + lam(q);
        const cplx stat = (lam(p) * j(p) + lam(q) * j(q)) / s;
        w(p, q) = stat * (1.0 + e(p) * e(q)) - e(p) * (phi(p) + psi(q)) / s -
                  e(q) * (phi(q) + psi(p)) / s;
      }
    }
    accumulate(total, contract(a ? resp.left : resp.right, lam, w));
  }
  CorrelationMatrices noise = take_real(total, t);

  const Eigen::MatrixXd a0 = resp.initial_response(t, 0);
  const Eigen::MatrixXd a1 = resp.initial_response(t, 1);
  const Eigen::MatrixXd a2 = resp.initial_response(t, 2);
  const Eigen::MatrixXd& yy = initial.pos;
  const Eigen::MatrixXd& qq = initial.mom;
  const Eigen::MatrixXd& yq = initial.cross;
  CorrelationMatrices c = noise;
  c.pos += a1 * yy * a1.transpose() + a0 * qq * a0.transpose() + a1 * yq * a0.transpose() +
           a0 * yq.transpose() * a1.transpose();
  c.mom += a2 * yy * a2.transpose() + a1 * qq * a1.transpose() + a2 * yq * a1.transpose() +
           a1 * yq.transpose() * a2.transpose();
  c.cross += a1 * yy * a2.transpose() + a0 * qq * a1.transpose() + a1 * yq * a1.transpose() +
             a0 * yq.transpose() * a2.transpose();
  c.basis = CorrelationBasis::NormalMode;
  return c;
}

CorrelationMatrices time_shifted_stationary(const ResponseSet& resp, const BathConfig& bath,
                                            double tau, NoiseModel model) {
  if (tau < 0.0) throw ValidationError("lag must be non-negative");
  if (tau == 0.0) return stationary_correlations(resp, bath, model);
  const Eigen::VectorXcd& lam = resp.poles;
  const Eigen::Index n = lam.size();
  Blocks total;
  for (bool a : {true, false}) {
    const auto k = bath_kernel(bath, a ? bath.Ta : bath.Tb, model);
    Eigen::VectorXcd phi(n), psi(n);
    for (Eigen::Index m = 0; m < n; ++m) {
      phi(m) = lagged_phi(lam(m), tau, k);
      psi(m) = lagged_psi(lam(m), tau, k);
    }
    Eigen::MatrixXcd h(n, n);
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = 0; q < n; ++q) h(p, q) = (phi(p) + psi(q)) / (lam(p) + lam(q));
    accumulate(total, contract(a ? resp.left : resp.right, lam, h));
  }
  CorrelationMatrices c = take_real(total, tau);
  return c;
}

CorrelationMatrices to_real_space(const CorrelationMatrices& corr, const ModeBasis& basis) {
  if (corr.basis != CorrelationBasis::NormalMode) {
    throw ValidationError("to_real_space expects normal-mode correlations");
  }
  const Eigen::MatrixXd& g = basis.transform;
  CorrelationMatrices r = corr;
  r.pos = g * corr.pos * g.transpose();
  r.mom = g * corr.mom * g.transpose();
  r.cross = g * corr.cross * g.transpose();
  r.basis = CorrelationBasis::RealSpace;
  return r;
}

CorrelationMatrices to_normal_modes(const CorrelationMatrices& corr, const ModeBasis& basis) {
  if (corr.basis != CorrelationBasis::RealSpace) {
    throw ValidationError("to_normal_modes expects real-space correlations");
  }
  const Eigen::MatrixXd& g = basis.transform;
  CorrelationMatrices r = corr;
  r.pos = g.transpose() * corr.pos * g;
  r.mom = g.transpose() * corr.mom * g;
  r.cross = g.transpose() * corr.cross * g;
  r.basis = CorrelationBasis::NormalMode;
  return r;
}

}  // namespace qlchain
