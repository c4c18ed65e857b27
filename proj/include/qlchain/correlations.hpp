#pragma once

#include <Eigen/Dense>
#include <limits>

#include "qlchain/kernel.hpp"
#include "qlchain/model.hpp"
#include "qlchain/response.hpp"
#include "qlchain/spectral.hpp"

namespace qlchain {

enum class CorrelationBasis { NormalMode, RealSpace };

// Symmetrized equal-time (or lagged) two-point functions. In the normal-mode
// basis the blocks are <Y Y>, <Q Q>, <Y Q>; in real space <X X>, <P P>,
// <X P>. cross(i, j) = <pos_i mom_j>_sym.
struct CorrelationMatrices {
  Eigen::MatrixXd pos;
  Eigen::MatrixXd mom;
  Eigen::MatrixXd cross;
  double time = std::numeric_limits<double>::infinity();
  CorrelationBasis basis = CorrelationBasis::NormalMode;
  double imaginary_residual = 0.0;  // largest discarded imaginary part

  int size() const { return static_cast<int>(pos.rows()); }
};

enum class NoiseModel { Quantum, Classical };

NoiseKernelSpec bath_kernel(const BathConfig& bath, double temperature,
                            NoiseModel model = NoiseModel::Quantum);

// t -> infinity correlations in the normal-mode basis. Each bath contributes
// sum_{k,k'} rho_k rho_k' I(lambda_k, lambda_k'); initial conditions have
// decayed. Throws NumericError if the result fails to be real.
CorrelationMatrices stationary_correlations(const ResponseSet& resp, const BathConfig& bath,
                                            NoiseModel model = NoiseModel::Quantum);

// Thermal state of the isolated chain at temperature T_ch (normal modes).
CorrelationMatrices thermal_chain_state(const ModeBasis& basis, double temperature);

// Correlations at finite time t after switching on the bath couplings, from
// the initial chain correlations (normal-mode basis, uncorrelated with the
// baths). t = 0 returns `initial` unchanged.
CorrelationMatrices transient_correlations(const ResponseSet& resp, const BathConfig& bath,
                                           const CorrelationMatrices& initial, double t,
                                           NoiseModel model = NoiseModel::Quantum);

// Stationary lagged correlations: pos(i,j) = <Y_i(t) Y_j(t+tau)>_sym etc.
// for t -> infinity, tau >= 0.
CorrelationMatrices time_shifted_stationary(const ResponseSet& resp, const BathConfig& bath,
                                            double tau, NoiseModel model = NoiseModel::Quantum);

// X = G Y, P = G Q.
CorrelationMatrices to_real_space(const CorrelationMatrices& corr, const ModeBasis& basis);
CorrelationMatrices to_normal_modes(const CorrelationMatrices& corr, const ModeBasis& basis);

}  // namespace qlchain
