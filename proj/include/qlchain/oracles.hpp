#pragma once
#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <vector>
#include "qlchain/correlations.hpp"
#include "qlchain/model.hpp"

namespace qlchain {

// The explicit-bath run could not establish a stationary window.
class OracleInconclusive : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct FourierOptions {
  double rel_tol = 1e-11;
  double abs_tol = 1e-14;
  bool classical = false;  // coth(w/2T) -> 2T/w
};

// Stationary real-space correlations from the frequency-domain resolvent
//   R(w) = [-w^2 + C - i w gamma Gamma/(Gamma - i w) nu]^-1,
//   XX = sum_a int_0^inf S_a(w) Re[R nu_a R^H] dw,
// PP with an extra w^2 and XP with i w. Uses nothing from the Laplace path.
CorrelationMatrices fourier_stationary_correlations(const ChainSpec& spec, const BathConfig& bath,
                                                    const FourierOptions& options = {});

// Classical chain coupled to two explicit baths of N oscillators each
// (m_k = 1, w_k = k Delta, Drude-Ullersma c_k), started from Gibbs states
// at T_a, T_b and T_ch. Integrated with a Strang split step: exact bath
// rotations and exact chain propagation, bath-chain coupling as kicks.
struct ExplicitBathRun {
  int modes = 2000;          // N per bath
  double spacing = 0.05;     // Delta
  double horizon = 120.0;    // must stay below the recurrence time 2 pi / Delta
  double dt = 0.005;
  double chain_temperature = -1.0;  // < 0: (T_a + T_b) / 2
  int samples = 0;           // 0: exact ensemble covariance, else Monte Carlo trajectories
  std::uint64_t seed = 1;
  int window_points = 200;   // evaluations in [horizon/2, horizon]
  double trend_tolerance = 0.01;
};

struct ExplicitBathResult {
  CorrelationMatrices correlations;  // real space, window average
  Eigen::VectorXd bond_flux;         // f_n <X_n P_{n+1}> per bond
  double flux = 0.0;                 // mean over bonds
  double trend = 0.0;                // relative change between window halves
};

// Throws OracleInconclusive when the two halves of the window differ by
// more than trend_tolerance (relative to the largest correlation entry),
// ValidationError when the horizon reaches the recurrence time.
ExplicitBathResult classical_explicit_bath(const ChainSpec& spec, const BathConfig& bath,
                                           const ExplicitBathRun& run = {});

// Max |a - b| over the entries of each block, relative to the largest entry
// of that block (XP: at least sqrt(max XX * max PP)); the worst block is reported.
double max_relative_deviation(const CorrelationMatrices& a, const CorrelationMatrices& b);

struct TriangleReport {
  double fourier_deviation = 0.0;    // Fourier vs Laplace, all blocks
  double classical_flux_deviation = 0.0;
  double classical_energy_deviation = 0.0;  // worst site, <P_n^2>
  double classical_Ta = 0.0, classical_Tb = 0.0;
  double fourier_tol = 1e-6, classical_tol = 0.03;
  bool fourier_pass() const { return fourier_deviation <= fourier_tol; }
  bool classical_pass() const {
    return classical_flux_deviation <= classical_tol && classical_energy_deviation <= classical_tol;
  }
  bool pass() const { return fourier_pass() && classical_pass(); }
};

// Fourier leg at the configured temperatures; classical leg against the
// classical-kernel pipeline at the configured temperatures when both are
// >= 50, otherwise at (100, 40).
TriangleReport verify_triangle(const ChainSpec& spec, const BathConfig& bath,
                               const ExplicitBathRun& run = {});

}  // namespace qlchain
