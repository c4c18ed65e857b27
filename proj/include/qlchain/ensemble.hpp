#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "qlchain/model.hpp"
#include "qlchain/pipeline.hpp"

namespace qlchain {

// f = mean +- sigma (Gaussian), redrawn until f >= cutoff_fraction * mean.
struct DisorderSpec {
  double mean = 1.0;
  double sigma = 0.0;
  bool symmetric = false;
  double cutoff_fraction = 0.05;
  PinningStyle pinning;

  void validate() const;
};

// Independent 64-bit seed for realization `index`, draw `attempt`.
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index, std::uint64_t attempt = 0);

ChainSpec sample_chain(const DisorderSpec& disorder, int l, std::mt19937_64& rng);

// One row of observables per realization.
using RealizationFn = std::function<std::vector<double>(const ChainSolver&)>;

struct RealizationRow {
  std::uint64_t index = 0;
  int attempt = 0;  // number of rejected draws before this one
  std::vector<double> values;
};

struct EnsembleOptions {
  int workers = 1;
  std::filesystem::path store;  // per-realization rows, appended; empty = in memory only
  bool resume = false;
  int max_attempts = 20;
};

struct EnsembleResult {
  std::vector<std::string> columns;
  Eigen::VectorXd mean, std;       // std: population standard deviation
  Eigen::VectorXd stderr_sqrt;     // std / sqrt(k-1)
  Eigen::VectorXd stderr_linear;   // std / (k-1)
  int k = 0;
  int rejections = 0;
  int resumed = 0;                 // rows taken from the store
  std::uint64_t seed = 0;
  std::vector<RealizationRow> rows;  // sorted by index

  int column(const std::string& name) const;
};

// Realization i uses substream_seed(seed, i, attempt); DegeneracyError
// triggers a redraw with the next attempt. More than 10% rejected draws is
// a configuration error (ValidationError).
EnsembleResult run_ensemble(const DisorderSpec& disorder, int l, const BathConfig& bath,
                            const std::vector<std::string>& columns, const RealizationFn& fn,
                            int k, std::uint64_t seed, const EnsembleOptions& options = {});

// Observable rows -------------------------------------------------------

// Columns T_R_1..T_R_l, E_1..E_l, J, slope (least-squares T_R slope over
// sites 3..l-2).
std::vector<std::string> profile_columns(int l);
RealizationFn profile_observable(double ta, double tb);
double interior_slope(const Eigen::VectorXd& tr);

// Columns Omega_eff_1..l, n_1..l.
std::vector<std::string> occupation_columns(int l);
RealizationFn occupation_observable(double ta, double tb);

// Weighted fit of J = c / (R_c + R x) with c = T_a - T_b, x = l or sqrt(l).
struct ScalingFit {
  enum class Model { Linear, Sqrt } model = Model::Linear;
  double Rc = 0.0, R = 0.0;
  double rss = 0.0;  // weighted residual sum of squares
  bool preferred = false;
};

ScalingFit fit_scaling(const std::vector<double>& l, const std::vector<double>& j,
                       const std::vector<double>& se, double delta_t, ScalingFit::Model model);

struct FluxLengthRow {
  int l;
  double J_mean, J_std, stderr_sqrt, stderr_linear;
  int k, rejections;
};

struct FluxLengthScan {
  std::vector<FluxLengthRow> rows;
  ScalingFit linear, sqrt;
};

FluxLengthScan flux_length_scan(const DisorderSpec& disorder, const BathConfig& bath,
                                const std::vector<int>& lengths, int k, std::uint64_t seed,
                                const EnsembleOptions& options = {});

struct OccupationPoint {
  std::uint64_t realization;
  int mode;
  double omega_eff, n, T_eff;
};

struct OccupationEnsemble {
  std::vector<OccupationPoint> points;
  double T_pooled = 0.0;  // Bose-Einstein fit over all pooled points
  double rms_Ta = 0.0, rms_Tb = 0.0, rms_Tm = 0.0, rms_pooled = 0.0;
  double teff_var_top = 0.0, teff_var_bottom = 0.0;  // by Omega_eff quartile
  int rejections = 0;
};

OccupationEnsemble occupation_ensemble(const DisorderSpec& disorder, int l, const BathConfig& bath,
                                       int k, std::uint64_t seed,
                                       const EnsembleOptions& options = {});

struct LocalizationPoint {
  std::uint64_t realization;
  int mode;
  double omega, xi;
};

std::vector<LocalizationPoint> localization_ensemble(const DisorderSpec& disorder, int l, int k,
                                                     std::uint64_t seed);

// Spearman rank correlation and two-sided p-value (t approximation).
std::pair<double, double> spearman(const std::vector<double>& x, const std::vector<double>& y);

void write_ensemble_csv(std::ostream& os, const EnsembleResult& r);
void write_flux_length_csv(std::ostream& os, const FluxLengthScan& s);
void write_fits_csv(std::ostream& os, const FluxLengthScan& s);
void write_occupation_ensemble_csv(std::ostream& os, const OccupationEnsemble& e);
void write_localization_ensemble_csv(std::ostream& os, const std::vector<LocalizationPoint>& rows);

}  // namespace qlchain
