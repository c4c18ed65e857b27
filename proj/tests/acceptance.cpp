// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qlchain/ensemble.hpp"
#include "qlchain/entanglement.hpp"
#include "qlchain/errors.hpp"
#include "qlchain/observables.hpp"
#include "qlchain/oracles.hpp"
#include "qlchain/pipeline.hpp"

using namespace qlchain;

namespace {

int failures = 0;

void report(int id, bool ok, const std::string& what) {
  std::printf("[%s] criterion %d: %s\n", ok ? "PASS" : "FAIL", id, what.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

template <typename F>
void guarded(int id, F&& f) {
  try {
    f();
  } catch (const std::exception& e) {
    report(id, false, std::string("threw: ") + e.what());
  }
}

double rel_spread(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  return (*hi - *lo) / std::abs(mean);
}

// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = std::log(x[i]), b = std::log(y[i]);
    sx += a;
    sy += b;
    sxx += a * a;
    sxy += a * b;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::vector<double> geomspace(double a, double b, int n) {
  std::vector<double> out;
  for (int i = 0; i < n; ++i) out.push_back(a * std::pow(b / a, static_cast<double>(i) / (n - 1)));
  return out;
}

void criterion1() {
  const BathConfig bath{2.0, 10.0, 0.0, 0.0};
  struct Case {
    double ta, tb, expected;
  };
  std::ostringstream os;
  bool ok = true;
  for (const Case c : {Case{5.0, 2.0, 3.54513}, Case{0.5, 0.2, 0.450906}}) {
    const auto t0 = std::chrono::steady_clock::now();
    const ChainSolver s(make_ordered_chain(20, 1.0), bath);
    const ModeOccupation occ = effective_frequencies_and_occupations(s.stationary(c.ta, c.tb), s.ground());
    const double secs = seconds_since(t0);
    const double rel = std::abs(occ.T_fit - c.expected) / c.expected;
    ok = ok && rel <= 0.02 && secs < 300.0;
    os << "(" << c.ta << "," << c.tb << ") T_fit=" << occ.T_fit << " vs " << c.expected << " rel " << rel
       << " in " << secs << "s; ";
  }
  report(1, ok, os.str());
}

void criterion2() {
  std::ostringstream os;
  bool ok = true;
  for (auto [ta, tb] : {std::pair{5.0, 2.0}, std::pair{0.5, 0.2}}) {
    const ChainSolver s(make_ordered_chain(20, 1.0), {2.0, 10.0, ta, tb});
    const SiteProfile p = site_profile(s, ta, tb);
    std::vector<double> e, t;
    for (int n = 2; n <= 17; ++n) {  // sites 3..l-2
      e.push_back(p.energy(n));
      t.push_back(p.T_R(n));
    }
    const double se = rel_spread(e), st = rel_spread(t);
    const double lo = *std::min_element(t.begin(), t.end()), hi = *std::max_element(t.begin(), t.end());
    const bool between = lo > tb && hi < ta && lo > 0.5 * (ta + tb);
    ok = ok && se < 0.02 && st < 0.02 && between;
    os << "(" << ta << "," << tb << ") E spread " << se << ", T_R spread " << st << ", T_R in [" << lo << ", "
       << hi << "]; ";
  }
  report(2, ok, os.str());
}

void criterion3() {
  std::vector<double> j;
  for (int l = 5; l <= 20; ++l) {
    const ChainSolver s(make_ordered_chain(l, 1.0), {2.0, 10.0, 5.0, 2.0});
    j.push_back(steady_flux(s, 5.0, 2.0).flux);
  }
  const double spread = rel_spread(j);
  std::ostringstream os;
  os << "ordered l=5..20 flux spread " << spread << " (J ~ " << j.front() << ")";
  report(3, spread < 0.01, os.str());
}

void criterion4() {
  const int l = 20;
  auto flux = [&](double g) {
    const ChainSolver s(make_ordered_chain(l, 1.0), {g, 10.0, 5.0, 2.0});
    return steady_flux(s, 5.0, 2.0).flux;
  };
  const std::vector<double> grid = geomspace(0.05, 80.0, 25);
  std::vector<double> j;
  for (double g : grid) j.push_back(flux(g));
  const auto imax = std::max_element(j.begin(), j.end()) - j.begin();
  const bool interior = imax > 0 && imax + 1 < static_cast<long>(j.size());
  const double j40 = flux(40.0) * 40.0, j80 = flux(80.0) * 80.0;
  const double tail = std::abs(j40 - j80) / std::max(j40, j80);
  std::ostringstream os;
  os << "J max at gamma=" << grid[static_cast<std::size_t>(imax)] << " (interior " << interior
     << "); J*gamma at 40, 80: " << j40 << ", " << j80 << " rel diff " << tail;
  report(4, interior && tail <= 0.15, os.str());
}

void criterion5() {
  const BathConfig bath{2.0, 10.0, 0.0, 0.0};
  const ChainSpec spec = make_ordered_chain(20, 1.0);
  const auto hi = conductivity_scan(spec, bath, geomspace(5.0, 10.0, 6), 0.1);
  std::vector<double> g;
  for (const auto& p : hi) g.push_back(p.Gth);
  const double plateau = rel_spread(g);
  const auto low = conductivity_scan(spec, bath, {0.1}, 0.1);
  const double suppression = hi.back().Gth / low.front().Gth;

  const std::vector<double> tm = geomspace(0.02, 0.2, 10);
  auto slope_for = [&](const ChainSpec& sp, const BathConfig& b) {
    const auto rows = conductivity_scan(sp, b, tm, 0.1);
    std::vector<double> y;
    for (const auto& p : rows) y.push_back(p.Gth);
    return loglog_slope(tm, y);
  };
  const ChainSpec ends = make_ordered_chain(20, 1.0, {Pinning::EndsOnly, 1.0});
  const double slope = slope_for(ends, bath);
  const double slope_weak = slope_for(ends, {0.5, 10.0, 0.0, 0.0});
  std::ostringstream os;
  os << "plateau variation " << plateau << ", suppression " << suppression << ", EndsOnly slope " << slope
     << " over T_m in [0.02, 0.2] (gamma=2; gamma=0.5 gives " << slope_weak << ")";
  report(5, plateau < 0.10 && suppression > 10.0 && std::abs(slope - 3.0) <= 0.3, os.str());
}

void criterion6() {
  const BathConfig bath{2.0, 10.0, 5.0, 2.0};
  DisorderSpec d;
  d.sigma = 0.2;
  const int l = 20, k = 50;
  const auto un = run_ensemble(d, l, bath, profile_columns(l), profile_observable(5, 2), k, 12345);
  d.symmetric = true;
  const auto sy = run_ensemble(d, l, bath, profile_columns(l), profile_observable(5, 2), k, 12345);
  const int c = un.column("slope");
  const double su = un.mean(c), ss = sy.mean(c);
  const double z = std::abs(su) / un.stderr_sqrt(c);
  const double ratio = su / ss;
  std::ostringstream os;
  os << "unsymmetric slope " << su << " +- " << un.stderr_sqrt(c) << " (" << z << " se); symmetric " << ss
     << " +- " << sy.stderr_sqrt(c) << "; ratio " << ratio;
  report(6, z > 3.0 && ratio >= 1.5 && ratio <= 3.0, os.str());
}

void criterion7() {
  const auto t0 = std::chrono::steady_clock::now();
  const BathConfig bath{2.0, 10.0, 5.0, 2.0};
  DisorderSpec d;
  d.sigma = 0.2;
  d.symmetric = true;
  int wins = 0;
  std::ostringstream os;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto scan = flux_length_scan(d, bath, {5, 10, 20, 40, 65}, 22, seed);
    wins += scan.sqrt.rss < scan.linear.rss;
    os << "seed " << seed << " rss sqrt " << scan.sqrt.rss << " vs l " << scan.linear.rss << "; ";
  }
  os << wins << "/3 prefer sqrt(l), " << seconds_since(t0) << "s";
  report(7, wins >= 2, os.str());
}

// Lowest T_m at which the negativity of `cut` has vanished, by bisection.
double vanishing_point(const ChainSpec& spec, const BathConfig& bath, int cut, double lo, double hi) {
  auto n_at = [&](double tm) { return negativity_temperature_scan(spec, bath, {tm}, 0.1, {cut}).front().N; };
  if (n_at(lo) <= 0.0 || n_at(hi) > 0.0) return std::nan("");
  for (int it = 0; it < 40; ++it) {
    const double mid = 0.5 * (lo + hi);
    (n_at(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

void criterion8() {
  const BathConfig bath{2.0, 10.0, 0.0, 0.0};
  const ChainSpec spec = make_ordered_chain(20, 1.0);
  const double t1 = vanishing_point(spec, bath, 1, 0.05, 3.0);
  const double t19 = vanishing_point(spec, bath, 19, 0.05, 3.0);
  const double t10 = vanishing_point(spec, bath, 10, 0.05, 3.0);
  const double t5 = vanishing_point(spec, bath, 5, 0.05, 3.0);
  auto within = [](double t, double ref) { return std::abs(t - ref) <= 0.2 * ref; };
  bool ok = within(t1, 0.45) && within(t19, 0.45) && within(t10, 0.67) && within(t5, 0.67);
  // f -> 0 emulated at f = 1e-6; the ground state keeps N = O(f), so T_m = 0 is the hard case
  double nmax = 0.0;
  std::string f_error;
  try {
    const ChainSolver s(make_ordered_chain(20, 1e-6), bath);
    for (double tm : {0.0, 0.1, 1.0}) {
      const Eigen::MatrixXd v = assemble_covariance(s.real_space(s.stationary(1.1 * tm, 0.9 * tm)), false);
      for (int k = 1; k < 20; ++k) nmax = std::max(nmax, log_negativity(v, k));
    }
  } catch (const std::exception& e) {
    f_error = e.what();
  }
  // resolvable weak coupling for comparison
  const ChainSolver weak(make_ordered_chain(20, 1e-4), bath);
  double n_weak = 0.0;
  for (int k = 1; k < 20; ++k)
    n_weak = std::max(n_weak, log_negativity(assemble_covariance(weak.real_space(weak.ground())), k));
  ok = ok && f_error.empty() && nmax <= 1e-10;
  std::ostringstream os;
  os << "N_1 vanishes at T_m=" << t1 << ", N_19 at " << t19 << " (ref 0.45); N_5 at " << t5 << ", N_10 at " << t10
     << " (ref 0.67); f=1e-6 max N " << nmax;
  if (!f_error.empty()) os << " (error: " << f_error << ")";
  os << "; f=1e-4 ground-state max N " << n_weak;
  report(8, ok, os.str());
}

void criterion9() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(909);
  std::uniform_real_distribution<double> gam(0.05, 20.0), cut(1.0, 50.0), temp(0.0, 10.0);
  DisorderSpec d;
  d.sigma = 0.3;
  int draws = 0, unstable = 0, degenerate = 0;
  double flux_spread = 0.0, eq_flux = 0.0, swap = 0.0, uncert = 1e300, sympl = 1e300, ortho = 0.0;
  while (draws < 1000) {
    d.symmetric = draws % 2 == 0;
    const int l = 2 + static_cast<int>(rng() % 30);
    const ChainSpec s = sample_chain(d, l, rng);
    const BathConfig b{gam(rng), cut(rng), 0.0, 0.0};
    try {
      const ChainSolver solver(s, b);
      ++draws;
      if (!(solver.response().poles.real().maxCoeff() < 0.0)) ++unstable;
      const Eigen::MatrixXd& g = solver.basis().transform;
      ortho = std::max(ortho, (g * g.transpose() - Eigen::MatrixXd::Identity(l, l)).cwiseAbs().maxCoeff());
      if (draws % 10 != 0) continue;
      const double ta = temp(rng), tb = temp(rng);
      const FluxReport f = steady_flux(solver, ta, tb);
      flux_spread = std::max(flux_spread, f.spread / std::max(std::abs(f.flux), 1e-300));
      eq_flux = std::max(eq_flux, std::abs(steady_flux(solver, ta, ta).flux));
      if (d.symmetric) {
        swap = std::max(swap, std::abs(steady_flux(solver, tb, ta).flux + f.flux) / std::max(1.0, std::abs(f.flux)));
      }
      const CorrelationMatrices g0 = solver.real_space(solver.ground());
      for (int n = 0; n < l; ++n) uncert = std::min(uncert, g0.pos(n, n) * g0.mom(n, n));
      const Eigen::MatrixXd v = assemble_covariance(solver.real_space(solver.stationary(ta, tb)), false);
      sympl = std::min(sympl, symplectic_eigenvalues(v).minCoeff());
    } catch (const DegeneracyError&) {
      ++degenerate;
    }
  }
  const double secs = seconds_since(t0);
  const bool ok = unstable == 0 && flux_spread <= 1e-8 && eq_flux <= 1e-9 && swap <= 1e-9 && uncert > 0.25 &&
                  sympl >= 1.0 - 1e-9 && ortho <= 1e-9 && secs < 600.0;
  std::ostringstream os;
  os << draws << " draws (" << degenerate << " degenerate redrawn): unstable " << unstable << ", flux spread "
     << flux_spread << ", |J| at T_a=T_b " << eq_flux << ", swap asymmetry " << swap << ", min <X^2><P^2> "
     << uncert << ", min symplectic " << sympl << ", orthogonality " << ortho << ", " << secs << "s";
  report(9, ok, os.str());
}

void criterion10() {
  std::mt19937_64 rng(1010);
  std::uniform_real_distribution<double> gam(0.2, 5.0), cut(2.0, 30.0), temp(0.0, 8.0), sig(0.0, 0.3);
  double worst = 0.0;
  for (int i = 0; i < 10; ++i) {
    DisorderSpec d;
    d.sigma = sig(rng);
    d.symmetric = i % 3 == 0;
    const int l = 2 + static_cast<int>(rng() % 9);
    const ChainSpec s = sample_chain(d, l, rng);
    const BathConfig b{gam(rng), cut(rng), temp(rng), temp(rng)};
    const ChainSolver solver(s, b);
    worst = std::max(worst, max_relative_deviation(solver.real_space(solver.stationary()),
                                                   fourier_stationary_correlations(s, b)));
  }
  double flux_dev = 0.0, p_dev = 0.0;
  for (auto [l, ta, tb] : {std::tuple{4, 100.0, 40.0}, std::tuple{6, 60.0, 50.0}}) {
    ChainSpec s = make_ordered_chain(l, 1.0);
    if (l == 6) s.couplings = {0.9, 1.1, 1.0, 0.8, 1.2};
    const BathConfig b{1.0, 10.0, ta, tb};
    const ChainSolver solver(s, b);
    const CorrelationMatrices k = solver.real_space(solver.stationary(ta, tb, NoiseModel::Classical));
    const ExplicitBathResult ex = classical_explicit_bath(s, b);
    double jk = 0.0;
    for (int n = 0; n + 1 < l; ++n) jk += s.couplings[static_cast<std::size_t>(n)] * k.cross(n, n + 1);
    jk /= (l - 1);
    flux_dev = std::max(flux_dev, std::abs(ex.flux - jk) / std::abs(jk));
    for (int n = 0; n < l; ++n) p_dev = std::max(p_dev, std::abs(ex.correlations.mom(n, n) - k.mom(n, n)) / k.mom(n, n));
  }
  std::ostringstream os;
  os << "Fourier vs Laplace worst entry deviation " << worst << " over 10 configs; explicit bath vs classical kernel: flux "
     << flux_dev << ", <P^2> " << p_dev;
  report(10, worst <= 1e-6 && flux_dev <= 0.03 && p_dev <= 0.03, os.str());
}

void criterion11() {
  const BathConfig bath{0.5, 10.0, 5.0, 2.0};
  const ChainSolver s(make_ordered_chain(4, 1.0), bath);
  const CorrelationMatrices init = thermal_chain_state(s.basis(), 0.0);
  const CorrelationMatrices stat = s.real_space(s.stationary());
  const double t_late = 50.0 / s.response().slowest_decay();
  const CorrelationMatrices late = s.real_space(transient_correlations(s.response(), bath, init, t_late));
  double pdev = 0.0;
  for (int n = 0; n < 4; ++n) pdev = std::max(pdev, std::abs(late.mom(n, n) - stat.mom(n, n)) / stat.mom(n, n));
  const double tau = 50.0 / s.response().slowest_decay();
  const CorrelationMatrices lag = s.real_space(time_shifted_stationary(s.response(), bath, tau));
  double decay = 0.0;
  for (int n = 0; n < 4; ++n) {
    decay = std::max(decay, std::abs(lag.pos(n, n)) / stat.pos(n, n));
    decay = std::max(decay, std::abs(lag.mom(n, n)) / stat.mom(n, n));
  }
  std::ostringstream os;
  os << "<P_n^2>(t=" << t_late << ") vs stationary " << pdev << "; lagged/equal-time at tau=" << tau << ": " << decay;
  report(11, pdev <= 1e-6 && decay <= 1e-6, os.str());
}

}  // namespace

int main() {
  const std::vector<std::function<void()>> all = {criterion1, criterion2, criterion3,  criterion4,
                                                  criterion5, criterion6, criterion7,  criterion8,
                                                  criterion9, criterion10, criterion11};
  for (std::size_t i = 0; i < all.size(); ++i) guarded(static_cast<int>(i + 1), all[i]);
  std::printf("%d of %zu criteria failed\n", failures, all.size());
  return failures == 0 ? 0 : 1;
}
