#pragma once

#include <Eigen/Dense>
#include <ostream>
#include <vector>

#include "qlchain/correlations.hpp"
#include "qlchain/model.hpp"
#include "qlchain/pipeline.hpp"

namespace qlchain {

// Bose-Einstein occupation 1/(exp(w/T)-1); zero at T = 0.
double bose(double omega, double temperature);

// Energy per site with each spring split evenly between its two sites:
// E_n = <P_n^2>/2 + (omega_n^2 + f_{n-1} + f_n)<X_n^2>/2
//       - f_{n-1}<X_n X_{n-1}>/2 - f_n <X_n X_{n+1}>/2
Eigen::VectorXd site_energies(const CorrelationMatrices& real_space, const ChainSpec& spec);

// <H_ch> = tr(PP)/2 + tr(C XX)/2.
double chain_energy(const CorrelationMatrices& real_space, const ChainSpec& spec);

struct ModeOccupation {
  Eigen::VectorXd omega_eff;  // 2 <Q_i^2>_0
  Eigen::VectorXd occupation; // <Q_i^2>/Omega_eff - 1/2
  double T_fit = 0.0;
  double fit_rms = 0.0;       // rms of n_i - n_BE over the fitted modes
};

// Both arguments in the normal-mode basis; `ground` is the T_a = T_b = 0 run.
// T_fit minimises sum_i (n_i - n_BE(Omega_eff,i; T))^2 over all modes but
// the lowest one.
ModeOccupation effective_frequencies_and_occupations(const CorrelationMatrices& run,
                                                     const CorrelationMatrices& ground);

// Least-squares Bose-Einstein temperature for a set of (Omega, n) points.
double fit_temperature(const Eigen::VectorXd& omega, const Eigen::VectorXd& n, double t_max);

// Inverts E = (w/2) coth(w / 2T) with w = 2 E0 by bisection on (0, t_max].
Eigen::VectorXd reconstruct_site_temperatures(const Eigen::VectorXd& energy,
                                              const Eigen::VectorXd& ground_energy,
                                              double t_max);

struct SiteProfile {
  Eigen::VectorXd energy;
  Eigen::VectorXd omega_eff;
  Eigen::VectorXd T_R;
};

SiteProfile site_profile(const ChainSolver& solver, double ta, double tb);

struct FluxReport {
  Eigen::VectorXd bonds;  // J_{n,n+1}
  double flux = 0.0;
  double conductivity = 0.0;  // J/(T_a-T_b), NaN when T_a = T_b
  double spread = 0.0;        // max_n |J_{n,n+1} - J|
};

// J_{n,n+1} = f_n <X_n P_{n+1}>_sym. Throws NumericError when the bond
// fluxes disagree by more than NumericPolicy::flux_uniformity.
FluxReport heat_flux(const CorrelationMatrices& real_space, const ChainSpec& spec, double ta,
                     double tb);

FluxReport steady_flux(const ChainSolver& solver, double ta, double tb);

struct ConductivityPoint {
  double Tm, Ta, Tb, J, Gth;
};

// T_a = (1+eps) T_m, T_b = (1-eps) T_m for every grid point.
std::vector<ConductivityPoint> conductivity_scan(const ChainSpec& spec, const BathConfig& bath,
                                                 const std::vector<double>& tm_grid, double eps);

struct FluxSurfacePoint {
  double f, gamma, J;
};

struct FluxMaximum {
  double f, gamma_max, J_max;
};

struct FluxSurface {
  std::vector<FluxSurfacePoint> points;
  std::vector<FluxMaximum> maxima;
};

// J(f, gamma) on the grid for ordered chains of length l; gamma_max(f) is
// refined by golden-section search on log(gamma) around the grid maximum.
FluxSurface flux_coupling_scan(int l, const std::vector<double>& f_grid,
                               const std::vector<double>& gamma_grid, const BathConfig& bath,
                               PinningStyle pinning = {});

// CSV emitters.
void write_profile_csv(std::ostream& os, const SiteProfile& p);
void write_occupation_csv(std::ostream& os, const ModeOccupation& occ);
void write_conductivity_csv(std::ostream& os, const std::vector<ConductivityPoint>& rows);
void write_flux_surface_csv(std::ostream& os, const FluxSurface& s);
void write_flux_maxima_csv(std::ostream& os, const FluxSurface& s);

}  // namespace qlchain
