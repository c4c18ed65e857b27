#include "qlchain/observables.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <limits>
#include <sstream>

#include "qlchain/errors.hpp"
#include "qlchain/io.hpp"
#include "qlchain/numeric_policy.hpp"

namespace qlchain {

namespace {

void require_real_space(const CorrelationMatrices& c) {
  if (c.basis != CorrelationBasis::RealSpace) throw ValidationError("expected real-space correlations");
}

double coupling(const ChainSpec& spec, int bond) {
  return bond >= 0 && bond < static_cast<int>(spec.couplings.size()) ? spec.couplings[bond] : 0.0;
}

// (w/2) coth(w/2T), monotone increasing in T.
double thermal_energy(double w, double t) {
  if (t <= 0.0) return 0.5 * w;
  return 0.5 * w / std::tanh(w / (2.0 * t));
}

}  // namespace

double bose(double omega, double temperature) {
  if (temperature <= 0.0) return 0.0;
  return 1.0 / std::expm1(omega / temperature);
}

Eigen::VectorXd site_energies(const CorrelationMatrices& rs, const ChainSpec& spec) {
  require_real_space(rs);
  const int l = spec.length();
  Eigen::VectorXd e(l);
  for (int n = 0; n < l; ++n) {
    const double fl = coupling(spec, n - 1), fr = coupling(spec, n);
    const double w = spec.onsite[n];
    double v = 0.5 * rs.mom(n, n) / spec.mass + 0.5 * (spec.mass * w * w + fl + fr) * rs.pos(n, n);
    if (n > 0) v -= 0.5 * fl * rs.pos(n, n - 1);
    if (n + 1 < l) v -= 0.5 * fr * rs.pos(n, n + 1);
    e(n) = v;
  }
  return e;
}

double chain_energy(const CorrelationMatrices& rs, const ChainSpec& spec) {
  require_real_space(rs);
  const Eigen::MatrixXd c = build_coupling_matrix(spec);
  return 0.5 * rs.mom.trace() / spec.mass + 0.5 * spec.mass * (c.cwiseProduct(rs.pos)).sum();
}

double fit_temperature(const Eigen::VectorXd& omega, const Eigen::VectorXd& n, double t_max) {
  auto cost = [&](double logt) {
    const double t = std::exp(logt);
    double s = 0.0;
    for (Eigen::Index i = 0; i < omega.size(); ++i) {
      const double d = n(i) - bose(omega(i), t);
      s += d * d;
    }
    return s;
  };
  // coarse scan, then Brent around the best grid point
  const double lo = std::log(1e-4 * t_max), hi = std::log(t_max);
  const int grid = 200;
  int best = 0;
  double best_v = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= grid; ++i) {
    const double v = cost(lo + (hi - lo) * i / grid);
    if (v < best_v) {
      best_v = v;
      best = i;
    }
  }
  const double step = (hi - lo) / grid;
  const double a = lo + step * std::max(best - 1, 0), b = lo + step * std::min(best + 1, grid);
  auto r = boost::math::tools::brent_find_minima(cost, a, b, 50);
  return std::exp(r.first);
}

ModeOccupation effective_frequencies_and_occupations(const CorrelationMatrices& run,
                                                     const CorrelationMatrices& ground) {
  if (run.basis != CorrelationBasis::NormalMode || ground.basis != CorrelationBasis::NormalMode) {
    throw ValidationError("occupations need normal-mode correlations");
  }
  const int l = run.size();
  ModeOccupation occ;
  occ.omega_eff.resize(l);
  occ.occupation.resize(l);
  for (int i = 0; i < l; ++i) {
    const double q0 = ground.mom(i, i);
    if (!(q0 > 0.0)) throw NumericError("ground-state kinetic energy is not positive");
    occ.omega_eff(i) = 2.0 * q0;
    occ.occupation(i) = run.mom(i, i) / occ.omega_eff(i) - 0.5;
  }
  // modes are ascending in Omega; the lowest one is left out of the fit
  const Eigen::VectorXd w = occ.omega_eff.tail(l - 1);
  const Eigen::VectorXd n = occ.occupation.tail(l - 1);
  const double nmax = n.maxCoeff();
  const double tguess = nmax > 0.0 ? w.maxCoeff() / std::log1p(1.0 / std::max(nmax, 1e-300)) : 1.0;
  occ.T_fit = fit_temperature(w, n, std::max(10.0 * tguess, 1e-3) * 10.0);
  double s = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i) s += std::pow(n(i) - bose(w(i), occ.T_fit), 2);
  occ.fit_rms = std::sqrt(s / static_cast<double>(w.size()));
  return occ;
}

Eigen::VectorXd reconstruct_site_temperatures(const Eigen::VectorXd& energy,
                                              const Eigen::VectorXd& ground_energy, double t_max) {
  Eigen::VectorXd tr(energy.size());
  for (Eigen::Index n = 0; n < energy.size(); ++n) {
    const double e = energy(n), e0 = ground_energy(n);
    if (e < e0 - policy().zero_point_slack) {
      std::ostringstream os;
      os << "site " << n + 1 << ": energy " << e << " below zero-point energy " << e0;
      throw NumericError(os.str());
    }
    if (e <= e0 * (1.0 + 1e-12)) {
      tr(n) = 0.0;
      continue;
    }
    const double w = 2.0 * e0;
    double lo = 0.0, hi = t_max;
    if (thermal_energy(w, hi) < e) {
      std::ostringstream os;
      os << "site " << n + 1 << ": temperature exceeds the bisection bracket " << t_max;
      throw NumericError(os.str());
    }
    while (hi - lo > 1e-12 * std::max(1.0, hi)) {
      const double mid = 0.5 * (lo + hi);
      (thermal_energy(w, mid) < e ? lo : hi) = mid;
    }
    tr(n) = 0.5 * (lo + hi);
  }
  return tr;
}

SiteProfile site_profile(const ChainSolver& solver, double ta, double tb) {
  SiteProfile p;
  p.energy = site_energies(solver.real_space(solver.stationary(ta, tb)), solver.spec());
  const Eigen::VectorXd e0 = site_energies(solver.real_space(solver.ground()), solver.spec());
  p.omega_eff = 2.0 * e0;
  p.T_R = reconstruct_site_temperatures(p.energy, e0, 10.0 * std::max({ta, tb, 1e-3}));
  return p;
}

FluxReport heat_flux(const CorrelationMatrices& rs, const ChainSpec& spec, double ta, double tb) {
  require_real_space(rs);
  const int l = spec.length();
  FluxReport r;
  r.bonds.resize(l - 1);
  for (int n = 0; n + 1 < l; ++n) r.bonds(n) = spec.couplings[n] / spec.mass * rs.cross(n, n + 1);
  r.flux = r.bonds.mean();
  r.spread = (r.bonds.array() - r.flux).abs().maxCoeff();
  r.conductivity = ta != tb ? r.flux / (ta - tb) : std::numeric_limits<double>::quiet_NaN();
  // roundoff floor: energy scale of the state
  const double floor = std::max(1e-12, 1e-6 * rs.mom.diagonal().cwiseAbs().maxCoeff());
  if (r.spread > policy().flux_uniformity * std::max(std::abs(r.flux), floor)) {
    std::ostringstream os;
    os << "bond fluxes not uniform: spread " << r.spread << " at J = " << r.flux;
    throw NumericError(os.str());
  }
  return r;
}

FluxReport steady_flux(const ChainSolver& solver, double ta, double tb) {
  return heat_flux(solver.real_space(solver.stationary(ta, tb)), solver.spec(), ta, tb);
}

std::vector<ConductivityPoint> conductivity_scan(const ChainSpec& spec, const BathConfig& bath,
                                                 const std::vector<double>& tm_grid, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw ValidationError("eps: must lie in (0, 1)");
  for (std::size_t i = 0; i < tm_grid.size(); ++i) {
    if (!(tm_grid[i] > 0.0) || (i > 0 && !(tm_grid[i] > tm_grid[i - 1]))) {
      throw ValidationError("Tm grid must be positive and ascending");
    }
  }
  ChainSolver solver(spec, bath);
  std::vector<ConductivityPoint> out;
  for (double tm : tm_grid) {
    const double ta = (1.0 + eps) * tm, tb = (1.0 - eps) * tm;
    const FluxReport f = steady_flux(solver, ta, tb);
    out.push_back({tm, ta, tb, f.flux, f.conductivity});
  }
  return out;
}

FluxSurface flux_coupling_scan(int l, const std::vector<double>& f_grid,
                               const std::vector<double>& gamma_grid, const BathConfig& bath,
                               PinningStyle pinning) {
  if (gamma_grid.size() < 3) throw ValidationError("gamma grid needs at least three points");
  FluxSurface s;
  for (double f : f_grid) {
    if (!(f > 0.0)) throw ValidationError("f grid must be positive");
    const ChainSpec spec = make_ordered_chain(l, f, pinning);
    auto flux = [&](double g) {
      BathConfig b = bath;
      b.gamma = g;
      return steady_flux(ChainSolver(spec, b), bath.Ta, bath.Tb).flux;
    };
    std::size_t best = 0;
    double best_j = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < gamma_grid.size(); ++i) {
      const double j = flux(gamma_grid[i]);
      s.points.push_back({f, gamma_grid[i], j});
      if (j > best_j) {
        best_j = j;
        best = i;
      }
    }
    const double a = std::log(gamma_grid[best > 0 ? best - 1 : 0]);
    const double b = std::log(gamma_grid[std::min(best + 1, gamma_grid.size() - 1)]);
    double ga = a, gb = b;
    const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = gb - ratio * (gb - ga), x2 = ga + ratio * (gb - ga);
    double f1 = flux(std::exp(x1)), f2 = flux(std::exp(x2));
    while (gb - ga > 1e-6) {
      if (f1 > f2) {
        gb = x2;
        x2 = x1;
        f2 = f1;
        x1 = gb - ratio * (gb - ga);
        f1 = flux(std::exp(x1));
      } else {
        ga = x1;
        x1 = x2;
        f1 = f2;
        x2 = ga + ratio * (gb - ga);
        f2 = flux(std::exp(x2));
      }
    }
    const double gmax = std::exp(0.5 * (ga + gb));
    s.maxima.push_back({f, gmax, flux(gmax)});
  }
  return s;
}

void write_profile_csv(std::ostream& os, const SiteProfile& p) {
  CsvWriter w(os);
  w.header({"site", "E", "omega_eff", "T_R"});
  for (Eigen::Index n = 0; n < p.energy.size(); ++n) {
    w.row(static_cast<int>(n + 1), p.energy(n), p.omega_eff(n), p.T_R(n));
  }
}

void write_occupation_csv(std::ostream& os, const ModeOccupation& occ) {
  CsvWriter w(os);
  w.header({"mode", "Omega_eff", "n"});
  for (Eigen::Index i = 0; i < occ.omega_eff.size(); ++i) {
    w.row(static_cast<int>(i + 1), occ.omega_eff(i), occ.occupation(i));
  }
}

void write_conductivity_csv(std::ostream& os, const std::vector<ConductivityPoint>& rows) {
  CsvWriter w(os);
  w.header({"Tm", "Gth"});
  for (const auto& r : rows) w.row(r.Tm, r.Gth);
}

void write_flux_surface_csv(std::ostream& os, const FluxSurface& s) {
  CsvWriter w(os);
  w.header({"f", "gamma", "J"});
  for (const auto& p : s.points) w.row(p.f, p.gamma, p.J);
}

void write_flux_maxima_csv(std::ostream& os, const FluxSurface& s) {
  CsvWriter w(os);
  w.header({"f", "gamma_max", "J_max"});
  for (const auto& m : s.maxima) w.row(m.f, m.gamma_max, m.J_max);
}

}  // namespace qlchain
