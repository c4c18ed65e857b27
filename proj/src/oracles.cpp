#include "qlchain/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <sstream>

#include "qlchain/errors.hpp"
#include "qlchain/observables.hpp"
#include "qlchain/pipeline.hpp"
#include "qlchain/quadrature.hpp"

namespace qlchain {

namespace {

using cd = std::complex<double>;

// (gamma/pi) w Gamma^2/(Gamma^2+w^2) coth(w/2T), written out again here.
double drude_noise(double w, const BathConfig& bath, double t, bool classical) {
  const double lorentz = bath.cutoff * bath.cutoff / (bath.cutoff * bath.cutoff + w * w);
  double wcoth;
  if (classical) {
    wcoth = 2.0 * t;
  } else if (t <= 0.0) {
    wcoth = w;
  } else {
    const double x = w / (2.0 * t);
    wcoth = x < 1e-8 ? 2.0 * t : w / std::tanh(x);
  }
  return bath.gamma / std::numbers::pi * lorentz * wcoth;
}

}  // namespace

CorrelationMatrices fourier_stationary_correlations(const ChainSpec& spec, const BathConfig& bath,
                                                    const FourierOptions& options) {
  spec.validate();
  bath.validate();
  const int l = spec.length();
  const Eigen::MatrixXd c = build_coupling_matrix(spec);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c);
  if (es.info() != Eigen::Success) throw NumericError("oracle: eigensolver failed");
  const Eigen::VectorXd freq = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();

  const int n2 = l * l;
  auto integrand = [&](double w) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(3 * n2);
    const cd gt = bath.gamma * bath.cutoff / cd(bath.cutoff, -w);
    Eigen::MatrixXcd a = c.cast<cd>();
    a.diagonal().array() -= w * w;
    a(0, 0) -= cd(0.0, w) * gt;
    a(l - 1, l - 1) -= cd(0.0, w) * gt;
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(a);
    Eigen::MatrixXcd rhs = Eigen::MatrixXcd::Zero(l, 2);
    rhs(0, 0) = 1.0;
    rhs(l - 1, 1) = 1.0;
    const Eigen::MatrixXcd r = lu.solve(rhs);
    const double temps[2] = {bath.Ta, bath.Tb};
    for (int side = 0; side < 2; ++side) {
      const double s = drude_noise(w, bath, temps[side], options.classical);
      const Eigen::VectorXcd v = r.col(side);
      const Eigen::MatrixXcd outer = v * v.adjoint();
      Eigen::Map<Eigen::MatrixXd> xx(out.data(), l, l);
      Eigen::Map<Eigen::MatrixXd> pp(out.data() + n2, l, l);
      Eigen::Map<Eigen::MatrixXd> xp(out.data() + 2 * n2, l, l);
      xx += s * outer.real();
      pp += s * w * w * outer.real();
      xp += s * (cd(0.0, w) * outer).real();
    }
    return out;
  };

  QuadratureOptions q;
  q.rel_tol = options.rel_tol;
  q.abs_tol = options.abs_tol;
  q.max_intervals = 20000;
  for (int i = 0; i < l; ++i) q.breakpoints.push_back(freq(i));
  q.breakpoints.push_back(bath.cutoff);
  const double scale = std::max(freq.maxCoeff(), 1.0);
  const auto res = integrate_to_infinity(integrand, 0.0, scale, q);

  CorrelationMatrices out;
  out.basis = CorrelationBasis::RealSpace;
  out.pos = Eigen::Map<const Eigen::MatrixXd>(res.value.data(), l, l);
  out.mom = Eigen::Map<const Eigen::MatrixXd>(res.value.data() + n2, l, l);
  out.cross = Eigen::Map<const Eigen::MatrixXd>(res.value.data() + 2 * n2, l, l);
  out.pos = 0.5 * (out.pos + out.pos.transpose()).eval();
  out.mom = 0.5 * (out.mom + out.mom.transpose()).eval();
  return out;
}

namespace {

// Linear split-step propagator for chain + two explicit baths. State columns
// are laid out as (X, P, x_a, p_a, x_b, p_b).
class SplitStep {
 public:
  SplitStep(const ChainSpec& spec, const BathConfig& bath, const ExplicitBathRun& run)
      : l_(spec.length()), n_(run.modes), dt_(run.dt) {
    w_.resize(n_);
    ck_.resize(n_);
    double counter = 0.0;
    for (int k = 0; k < n_; ++k) {
      const double w = (k + 1) * run.spacing;
      w_(k) = w;
      ck_(k) = std::sqrt(2.0 * bath.gamma * w * w * run.spacing / std::numbers::pi *
                         bath.cutoff * bath.cutoff / (w * w + bath.cutoff * bath.cutoff));
      counter += ck_(k) * ck_(k) / (w * w);
    }
    cos_ = (w_ * dt_).cos();
    sin_ = (w_ * dt_).sin();
    // chain with the counterterms of both baths
    Eigen::MatrixXd cp = build_coupling_matrix(spec);
    cp(0, 0) += counter;
    cp(l_ - 1, l_ - 1) += counter;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cp);
    if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 0.0) {
      throw NumericError("oracle: renormalized chain is not positive definite");
    }
    const Eigen::MatrixXd& u = es.eigenvectors();
    const Eigen::ArrayXd om = es.eigenvalues().array().sqrt();
    const Eigen::ArrayXd co = (om * dt_).cos(), si = (om * dt_).sin();
    chain_.resize(2 * l_, 2 * l_);
    chain_.topLeftCorner(l_, l_) = u * co.matrix().asDiagonal() * u.transpose();
    chain_.topRightCorner(l_, l_) = u * (si / om).matrix().asDiagonal() * u.transpose();
    chain_.bottomLeftCorner(l_, l_) = -(u * (om * si).matrix().asDiagonal() * u.transpose());
    chain_.bottomRightCorner(l_, l_) = chain_.topLeftCorner(l_, l_);
  }

  int dim() const { return 2 * l_ + 4 * n_; }
  int chain_size() const { return l_; }
  const Eigen::ArrayXd& frequencies() const { return w_; }
  const Eigen::ArrayXd& couplings() const { return ck_; }

  void forward(Eigen::MatrixXd& z) const {
    kick(z, 0.5 * dt_);
    rotate(z, false);
    kick(z, 0.5 * dt_);
  }
  void adjoint(Eigen::MatrixXd& a) const {
    kick_t(a, 0.5 * dt_);
    rotate(a, true);
    kick_t(a, 0.5 * dt_);
  }

  int xa() const { return 2 * l_; }
  int pa() const { return 2 * l_ + n_; }
  int xb() const { return 2 * l_ + 2 * n_; }
  int pb() const { return 2 * l_ + 3 * n_; }

 private:
  void kick(Eigen::MatrixXd& z, double h) const {
    const Eigen::RowVectorXd fa = ck_.matrix().transpose() * z.middleRows(xa(), n_);
    const Eigen::RowVectorXd fb = ck_.matrix().transpose() * z.middleRows(xb(), n_);
    z.middleRows(pa(), n_) += h * ck_.matrix() * z.row(0);
    z.middleRows(pb(), n_) += h * ck_.matrix() * z.row(l_ - 1);
    z.row(l_) += h * fa;
    z.row(2 * l_ - 1) += h * fb;
  }
  void kick_t(Eigen::MatrixXd& a, double h) const {
    const Eigen::RowVectorXd ga = ck_.matrix().transpose() * a.middleRows(pa(), n_);
    const Eigen::RowVectorXd gb = ck_.matrix().transpose() * a.middleRows(pb(), n_);
    a.middleRows(xa(), n_) += h * ck_.matrix() * a.row(l_);
    a.middleRows(xb(), n_) += h * ck_.matrix() * a.row(2 * l_ - 1);
    a.row(0) += h * ga;
    a.row(l_ - 1) += h * gb;
  }
  void rotate(Eigen::MatrixXd& z, bool transpose) const {
    const Eigen::MatrixXd& m = chain_;
    if (transpose) {
      z.topRows(2 * l_) = (m.transpose() * z.topRows(2 * l_)).eval();
    } else {
      z.topRows(2 * l_) = (m * z.topRows(2 * l_)).eval();
    }
    for (int side = 0; side < 2; ++side) {
      auto x = z.middleRows(side ? xb() : xa(), n_).array();
      auto p = z.middleRows(side ? pb() : pa(), n_).array();
      const Eigen::ArrayXXd x0 = x, p0 = p;
      const int cols = static_cast<int>(z.cols());
      for (int j = 0; j < cols; ++j) {
        if (!transpose) {
          x.col(j) = cos_ * x0.col(j) + sin_ / w_ * p0.col(j);
          p.col(j) = -w_ * sin_ * x0.col(j) + cos_ * p0.col(j);
        } else {
          x.col(j) = cos_ * x0.col(j) - w_ * sin_ * p0.col(j);
          p.col(j) = sin_ / w_ * x0.col(j) + cos_ * p0.col(j);
        }
      }
    }
  }

  int l_, n_;
  double dt_;
  Eigen::ArrayXd w_, ck_, cos_, sin_;
  Eigen::MatrixXd chain_;
};

struct WindowAccumulator {
  int l;
  std::vector<Eigen::MatrixXd> xx, pp, xp;  // one entry per window point
  void add(const Eigen::MatrixXd& cov) {
    xx.push_back(cov.topLeftCorner(l, l));
    pp.push_back(cov.bottomRightCorner(l, l));
    xp.push_back(cov.topRightCorner(l, l));
  }
};

CorrelationMatrices average(const WindowAccumulator& acc, std::size_t from, std::size_t to) {
  CorrelationMatrices c;
  c.basis = CorrelationBasis::RealSpace;
  c.pos = Eigen::MatrixXd::Zero(acc.l, acc.l);
  c.mom = c.pos;
  c.cross = c.pos;
  for (std::size_t i = from; i < to; ++i) {
    c.pos += acc.xx[i];
    c.mom += acc.pp[i];
    c.cross += acc.xp[i];
  }
  const double k = static_cast<double>(to - from);
  c.pos /= k;
  c.mom /= k;
  c.cross /= k;
  return c;
}

}  // namespace

ExplicitBathResult classical_explicit_bath(const ChainSpec& spec, const BathConfig& bath,
                                           const ExplicitBathRun& run) {
  spec.validate();
  bath.validate();
  if (run.modes < 1 || run.spacing <= 0.0 || run.dt <= 0.0 || run.horizon <= 0.0 ||
      run.window_points < 2) {
    throw ValidationError("explicit bath: modes, spacing, dt, horizon and window_points must be positive");
  }
  if (run.horizon >= 2.0 * std::numbers::pi / run.spacing) {
    throw ValidationError("explicit bath: horizon reaches the recurrence time 2 pi / spacing");
  }
  if (run.modes * run.spacing < 5.0 * bath.cutoff) {
    throw ValidationError("explicit bath: modes * spacing must cover at least 5 cutoffs");
  }
  const int l = spec.length();
  const double tch = run.chain_temperature < 0.0 ? 0.5 * (bath.Ta + bath.Tb) : run.chain_temperature;
  const SplitStep step(spec, bath, run);
  const int dim = step.dim();
  const int n = run.modes;
  const Eigen::ArrayXd& w = step.frequencies();
  const Eigen::ArrayXd& ck = step.couplings();
  const Eigen::MatrixXd cinv = build_coupling_matrix(spec).inverse();

  const long steps = std::lround(run.horizon / run.dt);
  const long first = steps / 2;
  std::vector<long> marks;
  for (int i = 0; i < run.window_points; ++i) {
    marks.push_back(first + (steps - first) * i / (run.window_points - 1));
  }
  WindowAccumulator acc{l, {}, {}, {}};

  if (run.samples <= 0) {
    // Rows of the propagator by the transposed recursion; the covariance
    // follows from the (block-diagonal) initial covariance.
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(dim, 2 * l);
    for (int i = 0; i < 2 * l; ++i) a(i, i) = 1.0;
    std::size_t next = 0;
    for (long s = 1; s <= steps && next < marks.size(); ++s) {
      step.adjoint(a);
      if (s != marks[next]) continue;
      ++next;
      // to initial coordinates (X, P, y, p): x = y + c X_end / w^2
      Eigen::MatrixXd u = a;
      const Eigen::VectorXd cw = (ck / (w * w)).matrix();
      u.row(0) += cw.transpose() * a.middleRows(step.xa(), n);
      u.row(l - 1) += cw.transpose() * a.middleRows(step.xb(), n);
      Eigen::MatrixXd cov = tch * (u.topRows(l).transpose() * cinv * u.topRows(l)) +
                            tch * (u.middleRows(l, l).transpose() * u.middleRows(l, l));
      const double temps[2] = {bath.Ta, bath.Tb};
      const int xs[2] = {step.xa(), step.xb()};
      const int ps[2] = {step.pa(), step.pb()};
      for (int side = 0; side < 2; ++side) {
        const Eigen::VectorXd vy = (temps[side] / (w * w)).matrix();
        const auto uy = u.middleRows(xs[side], n);
        const auto up = u.middleRows(ps[side], n);
        cov += uy.transpose() * vy.asDiagonal() * uy + temps[side] * (up.transpose() * up);
      }
      acc.add(cov);
    }
  } else {
    std::mt19937_64 rng(run.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd z = Eigen::MatrixXd::Zero(dim, run.samples);
    Eigen::LLT<Eigen::MatrixXd> chol(tch * cinv);
    const double temps[2] = {bath.Ta, bath.Tb};
    const int xs[2] = {step.xa(), step.xb()};
    const int ps[2] = {step.pa(), step.pb()};
    for (int j = 0; j < run.samples; ++j) {
      Eigen::VectorXd g(l);
      for (int i = 0; i < l; ++i) g(i) = gauss(rng);
      z.col(j).head(l) = chol.matrixL() * g;
      for (int i = 0; i < l; ++i) z(l + i, j) = std::sqrt(tch) * gauss(rng);
      for (int side = 0; side < 2; ++side) {
        const double xend = z(side ? l - 1 : 0, j);
        for (int k = 0; k < n; ++k) {
          z(xs[side] + k, j) = std::sqrt(temps[side]) / w(k) * gauss(rng) + ck(k) / (w(k) * w(k)) * xend;
          z(ps[side] + k, j) = std::sqrt(temps[side]) * gauss(rng);
        }
      }
    }
    std::size_t next = 0;
    for (long s = 1; s <= steps && next < marks.size(); ++s) {
      step.forward(z);
      if (s != marks[next]) continue;
      ++next;
      const Eigen::MatrixXd top = z.topRows(2 * l);
      acc.add(top * top.transpose() / static_cast<double>(run.samples));
    }
  }

  ExplicitBathResult out;
  const std::size_t m = acc.xx.size();
  out.correlations = average(acc, 0, m);
  const CorrelationMatrices early = average(acc, 0, m / 2);
  const CorrelationMatrices late = average(acc, m / 2, m);
  out.trend = max_relative_deviation(early, late);
  if (out.trend > run.trend_tolerance) {
    std::ostringstream os;
    os << "explicit bath: window halves differ by " << out.trend << " (tolerance "
       << run.trend_tolerance << "); horizon too short";
    throw OracleInconclusive(os.str());
  }
  out.bond_flux.resize(std::max(l - 1, 0));
  for (int i = 0; i + 1 < l; ++i) {
    out.bond_flux(i) = spec.couplings[static_cast<std::size_t>(i)] * out.correlations.cross(i, i + 1);
  }
  out.flux = l > 1 ? out.bond_flux.mean() : 0.0;
  return out;
}

double max_relative_deviation(const CorrelationMatrices& a, const CorrelationMatrices& b) {
  auto size = [](const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
    return std::max(x.cwiseAbs().maxCoeff(), y.cwiseAbs().maxCoeff());
  };
  auto block = [](const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, double scale) {
    if (scale == 0.0) return 0.0;
    return (x - y).cwiseAbs().maxCoeff() / scale;
  };
  const double sp = size(a.pos, b.pos), sm = size(a.mom, b.mom);
  // XP is bounded by sqrt(XX PP); near equilibrium its own maximum is noise
  const double sc = std::max(size(a.cross, b.cross), std::sqrt(sp * sm));
  return std::max({block(a.pos, b.pos, sp), block(a.mom, b.mom, sm), block(a.cross, b.cross, sc)});
}

TriangleReport verify_triangle(const ChainSpec& spec, const BathConfig& bath,
                               const ExplicitBathRun& run) {
  TriangleReport rep;
  const ChainSolver solver(spec, bath);
  const CorrelationMatrices laplace = solver.real_space(solver.stationary());
  rep.fourier_deviation = max_relative_deviation(laplace, fourier_stationary_correlations(spec, bath));

  const bool hot = std::min(bath.Ta, bath.Tb) >= 50.0;
  rep.classical_Ta = hot ? bath.Ta : 100.0;
  rep.classical_Tb = hot ? bath.Tb : 40.0;
  const BathConfig cb = bath.with_temperatures(rep.classical_Ta, rep.classical_Tb);
  const CorrelationMatrices kernel =
      solver.real_space(solver.stationary(cb.Ta, cb.Tb, NoiseModel::Classical));
  const ExplicitBathResult ex = classical_explicit_bath(spec, cb, run);
  const int l = spec.length();
  double jk = 0.0;
  for (int i = 0; i + 1 < l; ++i) jk += spec.couplings[static_cast<std::size_t>(i)] * kernel.cross(i, i + 1);
  if (l > 1) {
    jk /= (l - 1);
    rep.classical_flux_deviation = std::abs(ex.flux - jk) / std::abs(jk);
  }
  for (int i = 0; i < l; ++i) {
    rep.classical_energy_deviation =
        std::max(rep.classical_energy_deviation,
                 std::abs(ex.correlations.mom(i, i) - kernel.mom(i, i)) / kernel.mom(i, i));
  }
  return rep;
}

}  // namespace qlchain
